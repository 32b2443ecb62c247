// Random session types and processes for the property tests.
#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pik/encoder.hpp"
#include "pik/env.hpp"
#include "pik/process.hpp"
#include "pik/types.hpp"

namespace pik::gen {

using Rng = std::mt19937_64;

struct TypeOptions {
  int depth = 6;
  int width = 4;
  bool recursion = true;
  bool delegation = true;
};

/// A closed, guarded session type of at most the given depth.
STypePtr session_type(Rng& rng, const TypeOptions& opts);

/// A pair (a, b) where b is often a variation of a, so that both verdicts of
/// a <: b occur.
std::pair<STypePtr, STypePtr> subtype_pair(Rng& rng, const TypeOptions& opts);

struct Sample {
  ProcPtr proc;
  SessionEnv env;
};

/// A process following the protocol s on channel ch. s must be recursion-free.
ProcPtr endpoint(Rng& rng, const std::string& ch, const STypePtr& s);

/// One to two restricted sessions with both endpoints implemented, and
/// sometimes a free endpoint typed by the environment.
Sample well_typed(Rng& rng, int type_depth = 3);

/// A random local edit of a well-typed sample: a changed payload, a repeated
/// or dropped prefix, an unknown label, a missing arm or a wrong subject.
/// The result may or may not still be typable.
Sample mutate(Rng& rng, const Sample& s);

struct MergeCase {
  ProcPtr proc;
  SessionEnv env;
  RenamingFunction f; // maps the two free endpoints to one channel
};

/// Two free endpoints of one session, implemented in parallel, whose
/// renaming merges them into one channel.
MergeCase merge_case(Rng& rng);

/// Two or three sessions of plain values whose endpoints are spread over
/// threads with their actions interleaved at random; many of them deadlock.
ProcPtr interleaved(Rng& rng);

} // namespace pik::gen

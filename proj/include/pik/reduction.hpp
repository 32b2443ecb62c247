// Small-step reduction for both calculi, case normalisation and the
// operational correspondence harness.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pik/encoder.hpp"
#include "pik/env.hpp"
#include "pik/process.hpp"

namespace pik {

struct Redex {
  enum class Kind { SessionCom, SessionCase, PiCom, PiCase, Cond };
  Kind kind = Kind::Cond;
  /// Thread indices in flatten(p): the sender then the receiver for a
  /// communication, the single thread for a case or a conditional.
  std::vector<int> location;
  /// R-Com, R-Case, R-StndCom, R-Cond, Rpi-Com, Rpi-Case.
  std::string rule;
  /// Subject of the communication (sender side); empty otherwise.
  std::string channel;
};

std::string to_string(Redex::Kind k);
std::string to_string(const Redex& r);

/// All redexes of a session process. R-Com and R-Case need both endpoints
/// bound by one session restriction; R-StndCom fires on any other name.
std::vector<Redex> redexes_session(const ProcPtr& p);
/// All redexes of a pi process. Rpi-Com fires on free names too.
std::vector<Redex> redexes_pi(const ProcPtr& p);
std::vector<Redex> redexes(const ProcPtr& p, Calculus c);

/// Contracts one redex returned for p. Throws "arity" on a payload arity
/// mismatch and "label-not-offered" when the chosen label has no branch.
/// Restriction annotations follow the reduction: a session pair moves to the
/// continuation type and a linear pi channel becomes empty[].
ProcPtr step(const ProcPtr& p, const Redex& r);

/// Every process reachable from p by contracting one case on a variant value
/// at any depth.
std::vector<ProcPtr> case_contractions(const ProcPtr& p);
/// q rewrites to q2 by structural congruence plus case contractions.
bool hook_equiv(const ProcPtr& q, const ProcPtr& q2);

struct TraceStep {
  ProcPtr before;
  Redex redex;
  ProcPtr after;
};

/// One maximal trace under a seeded random scheduler, cut at max_steps.
std::vector<TraceStep> run(const ProcPtr& p, Calculus c, std::uint64_t seed, int max_steps = 1000);
/// Short stable fingerprint of the congruence class of p.
std::string process_hash(const ProcPtr& p);

struct CorrespondenceEntry {
  int clause = 1;        // 1: source step matched by a target step; 2: the converse
  ProcPtr source;        // source state
  ProcPtr target;        // encoded source state
  std::string step;      // the redex checked
  std::string witness;   // how it was matched; empty for a counterexample
  bool restricted = false; // clause 2 matched only after restricting a merged pair
};

struct CorrespondenceReport {
  std::vector<CorrespondenceEntry> entries;
  int states = 0;
  int counterexamples() const;
  bool ok() const { return counterexamples() == 0; }
};

/// Explores all source states up to `depth` steps and checks both directions
/// of the operational correspondence between p and its encoding under f.
CorrespondenceReport correspondence_check(const ProcPtr& p, const RenamingFunction& f, int depth);

/// Every state reachable from p within depth steps is well typed under env.
/// Returns the first state that is not, with its diagnostic.
struct SubjectReductionFailure {
  ProcPtr state;
  std::string diagnostic;
};
std::optional<SubjectReductionFailure> session_subject_reduction_probe(const SessionEnv& env, const ProcPtr& p,
                                                                       int depth);

} // namespace pik

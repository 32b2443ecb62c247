// Duality on session types and subtyping for both type languages.
#pragma once

#include <string>
#include <vector>

#include "pik/types.hpp"

namespace pik {

/// Structural dual. Types containing recursion are handled by complement.
STypePtr dual(const STypePtr& s);

/// Duality that stays sound under recursion: payload occurrences of a
/// recursion variable are replaced by the whole recursive type before the
/// communication structure is dualized, so payloads keep their meaning.
STypePtr complement(const STypePtr& s);

struct SubtypeJudgement {
  std::string left;
  std::string right;
  bool holds = false;
  /// Rules applied, in order; on failure the last entry names the failing pair.
  std::vector<std::string> derivation;
};

/// Coinductive subtyping on session and payload types. Branching is
/// covariant in breadth (the subtype offers a subset of the labels), selection
/// contravariant in breadth, both covariant in depth; send is contravariant in
/// its payload.
SubtypeJudgement session_subtype(const STypePtr& a, const STypePtr& b);

/// Coinductive subtyping on pi types: lin_i covariant, lin_o contravariant,
/// lin_io and #[..] invariant, empty[] related only to itself, variants and
/// tuples covariant in breadth and depth. Priorities are ignored.
SubtypeJudgement pi_subtype(const PTypePtr& a, const PTypePtr& b);

/// Equality of the infinite trees denoted by two pi types (equality up to
/// unfolding and renaming of recursion variables). Priorities are compared.
bool pi_tree_equal(const PTypePtr& a, const PTypePtr& b);
/// Same for session types.
bool session_tree_equal(const STypePtr& a, const STypePtr& b);

/// Whether session_subtype(a, b) agrees with pi_subtype on the encodings.
bool check_subtyping_theorem(const STypePtr& a, const STypePtr& b);

} // namespace pik

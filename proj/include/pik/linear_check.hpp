// Type checking for the linear pi-calculus with variants: every linear
// capability is used exactly once along every control path.
#pragma once

#include <map>
#include <optional>
#include <utility>

#include "pik/diagnostic.hpp"
#include "pik/env.hpp"
#include "pik/process.hpp"

namespace pik {

/// Types chosen for the names a process binds: restrictions by node, input
/// binders by (node, position), case binders by (node, label index in label
/// order).
struct PiTyping {
  std::map<const Proc*, PTypePtr> restrictions;
  std::map<std::pair<const Proc*, int>, PTypePtr> binders;
  std::map<std::string, PTypePtr> free;
};

/// Checks env |- p. Restrictions without an annotation get a type inferred
/// from the uses of the name; an inferred restriction must end up with both
/// capabilities or with none. Throws DiagnosticError with code linearity,
/// capability-missing, variant-label, type-mismatch or unknown-name.
PiTyping check_pi(const PiEnv& env, const ProcPtr& p);

std::optional<Diagnostic> pi_diagnostic(const PiEnv& env, const ProcPtr& p);
inline bool pi_typable(const PiEnv& env, const ProcPtr& p) { return !pi_diagnostic(env, p); }

/// lin_io[ts] into (lin_i[ts], lin_o[ts]); anything else throws "not-splittable".
std::pair<PTypePtr, PTypePtr> capability_split(const PTypePtr& t);

} // namespace pik

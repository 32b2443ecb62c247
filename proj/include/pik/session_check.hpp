// Type checking for the session pi-calculus.
#pragma once

#include <optional>
#include <set>

#include "pik/diagnostic.hpp"
#include "pik/env.hpp"
#include "pik/process.hpp"

namespace pik {

/// Checks env |- p. Restrictions without a type annotation get one from
/// infer_session_types first. Throws DiagnosticError with code linearity,
/// type-mismatch, duality-mismatch or unknown-name.
void check_session(const SessionEnv& env, const ProcPtr& p);

/// Non-throwing form: the diagnostic, or nothing when p is well typed.
std::optional<Diagnostic> session_diagnostic(const SessionEnv& env, const ProcPtr& p);
inline bool session_typable(const SessionEnv& env, const ProcPtr& p) { return !session_diagnostic(env, p); }

struct SplitResult {
  SessionEnv left;
  SessionEnv right;
};

/// Linear entries go to the side demanding them (right when nobody does);
/// unrestricted entries go to both. Throws "linear-overlap" when both sides
/// demand one linear name.
SplitResult split_env(const SessionEnv& env, const std::set<std::string>& demand_left,
                      const std::set<std::string>& demand_right = {});

} // namespace pik

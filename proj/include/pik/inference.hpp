// Session type inference: constraints over encoded channel types whose
// capabilities are variables, solved by unification, and read back as
// session types by inverting the type encoding.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "pik/env.hpp"
#include "pik/process.hpp"
#include "pik/unify.hpp"

namespace pik {

struct Constraint {
  enum class Kind { TypeEq, CapEq };
  Kind kind = Kind::TypeEq;
  TermPtr a, b;
  CapTerm ca, cb;
  std::string origin; // the process fragment that produced it

  static Constraint type_eq(TermPtr a, TermPtr b, std::string origin = "");
  static Constraint cap_eq(CapTerm a, CapTerm b, std::string origin = "");
};
using ConstraintSet = std::vector<Constraint>;

/// {a.in = b.out, a.out = b.in, payload(a) = payload(b)}: the two channel
/// types describe the two ends of one session.
ConstraintSet dual_constraint(const TermPtr& a, const TermPtr& b);

/// Solves the constraints in order. Throws DiagnosticError with code "unify"
/// or "occurs-check" naming the originating fragment.
void unify(Unifier& u, const ConstraintSet& cs);
/// Whether every constraint holds under the current substitution.
bool satisfied(const Unifier& u, const ConstraintSet& cs);

struct ConstraintProblem {
  std::map<std::string, TermPtr> free;                  // free names of the process
  std::map<const Proc*, std::pair<TermPtr, TermPtr>> ends; // session restrictions
  std::map<const Proc*, TermPtr> shared;                 // channel restrictions
  ConstraintSet constraints;
};

/// Walks a session process emitting one channel-type term per endpoint and
/// the equality constraints of its uses. Restriction annotations and the
/// types in env become constraints too.
ConstraintProblem gen_constraints(Unifier& u, const ProcPtr& p, const SessionEnv& env = {});

/// Inverse of encode_type on its image; throws DiagnosticError "not-decodable".
STypePtr decode_type(const PTypePtr& t);

struct InferenceResult {
  /// Free names and restricted endpoints with their decoded session types.
  /// Endpoint names that occur more than once are suffixed with #n.
  SessionEnv env;
  /// Encoded (pi) form of the same entries.
  PiEnv encoded;
  /// Type of the first endpoint of every session restriction, and the #T of
  /// every channel restriction.
  std::map<const Proc*, STypePtr> annotations;
};

InferenceResult infer_session_types(const ProcPtr& p, const SessionEnv& env = {}, bool recursive_types = false);

/// Copy of p with the inferred annotations on unannotated restrictions.
ProcPtr annotate_process(const ProcPtr& p, const std::map<const Proc*, STypePtr>& annotations);

} // namespace pik

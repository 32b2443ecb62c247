// Priority-based deadlock analysis for linear pi processes, and for session
// processes through their encoding.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pik/diagnostic.hpp"
#include "pik/env.hpp"
#include "pik/process.hpp"

namespace pik {

/// A priority: a variable plus an offset, or a constant (the offset alone).
struct PriorityTerm {
  int var = -1;
  long long offset = 0;

  static PriorityTerm constant(long long k) { return {-1, k}; }
  static PriorityTerm variable(int v, long long offset = 0) { return {v, offset}; }
  bool is_var() const { return var >= 0; }
  bool operator==(const PriorityTerm& o) const { return var == o.var && offset == o.offset; }
};

/// lhs < rhs when strict, lhs = rhs otherwise.
struct PriorityConstraint {
  PriorityTerm lhs;
  PriorityTerm rhs;
  bool strict = true;
  std::string origin;
};

struct PriorityConstraintSet {
  std::vector<PriorityConstraint> constraints;
  std::vector<std::string> var_names;

  int fresh(const std::string& name);
  void less(PriorityTerm a, PriorityTerm b, std::string origin = "");
  void equal(PriorityTerm a, PriorityTerm b, std::string origin = "");
  std::string name(const PriorityTerm& t) const;
  std::string describe(const PriorityConstraint& c) const;
};

struct PrioritySolution {
  bool satisfiable = true;
  std::map<int, long long> assignment;
  /// For an unsatisfiable set: constraints forming one cycle.
  std::vector<PriorityConstraint> cycle;

  long long value(const PriorityTerm& t) const;
  bool satisfies(const PriorityConstraint& c) const;
};

/// Merges plain equalities, then finds a longest-path layering of the
/// difference graph or a cycle that forces a priority above itself.
PrioritySolution solve(const PriorityConstraintSet& cs);

struct DeadlockOptions {
  /// Replicated inputs are polymorphic in the priorities of their payload.
  bool polymorphic = true;
};

struct DeadlockReport {
  bool ok = true;
  PriorityConstraintSet constraints;
  PrioritySolution solution;
  /// Priorities of the named linear channels (free, restricted, received).
  std::map<std::string, long long> priorities;
  /// The cycle in readable form, e.g. "x < y".
  std::vector<std::string> cycle;
  /// Channels mentioned by the cycle.
  std::set<std::string> channels;

  Diagnostic diagnostic() const;
};

/// Assigns priorities to every linear channel of p (typed under env by
/// check_pi) or reports a cycle. Throws DiagnosticError when p is ill typed.
DeadlockReport infer_priorities(const ProcPtr& p, const PiEnv& env = {}, DeadlockOptions opts = {});

/// Runs infer_priorities on the encoding of p. Channels in the report are
/// source endpoints: "x/y" for a session restriction, or the endpoint name.
DeadlockReport check_deadlock_session(const ProcPtr& p, const SessionEnv& env = {}, DeadlockOptions opts = {});

/// Explores every state reachable from p (up to max_states) and returns one
/// with no redex and a prefix on a restricted channel, if there is one.
std::optional<ProcPtr> find_stuck_state(const ProcPtr& p, Calculus c, int max_states = 2000);

} // namespace pik

// Encoding of session types, values, processes and contexts into the linear
// pi-calculus, continuation-passing style.
#pragma once

#include <map>
#include <set>
#include <string>

#include "pik/env.hpp"
#include "pik/process.hpp"
#include "pik/types.hpp"

namespace pik {

/// Session type to pi type. Recursive types are encoded as the regular tree
/// they denote, written with rec binders wherever the tree loops back.
PTypePtr encode_type(const STypePtr& t);

/// Finite partial map from the free names of a session process to the names
/// that carry them in the encoding.
struct RenamingFunction {
  std::map<std::string, std::string> map;

  static RenamingFunction identity(const std::set<std::string>& names);
  /// Throws DiagnosticError "unmapped-name" outside the domain.
  const std::string& operator()(const std::string& x) const;
  RenamingFunction with(const std::string& x, const std::string& c) const;
  bool injective() const;
};

/// Emits <prefix>0, <prefix>1, ... skipping everything in the avoid set.
class FreshNameSupply {
public:
  explicit FreshNameSupply(std::set<std::string> avoid = {}, std::string prefix = "c")
      : avoid_(std::move(avoid)), prefix_(std::move(prefix)) {}
  std::string next();
  /// As next(), recording the source endpoint the new name stands for.
  std::string next(const std::string& origin);
  void avoid(const std::string& x) { avoid_.insert(x); }
  void avoid(const std::set<std::string>& xs) { avoid_.insert(xs.begin(), xs.end()); }
  const std::map<std::string, std::string>& origins() const { return origins_; }

private:
  std::set<std::string> avoid_;
  std::string prefix_;
  int counter_ = 0;
  std::map<std::string, std::string> origins_;
};

ExprPtr encode_value(const ExprPtr& v, const RenamingFunction& f);

/// Validates f as a renaming function for p under env: every free name maps
/// to itself or to a name fresh for p and env, and f is the identity on the
/// bound names it mentions. Throws DiagnosticError on violation.
void validate_renaming(const RenamingFunction& f, const ProcPtr& p, const SessionEnv& env = {});

ProcPtr encode_process(const ProcPtr& p, const RenamingFunction& f, FreshNameSupply& supply);
/// Uses a supply avoiding the names of p and of f.
ProcPtr encode_process(const ProcPtr& p, const RenamingFunction& f);

/// Each x:T becomes f(x):[[T]]. Two entries that f merges must be the two
/// ends of one channel; they combine into a single lin_io entry.
PiEnv encode_env(const SessionEnv& env, const RenamingFunction& f);

} // namespace pik

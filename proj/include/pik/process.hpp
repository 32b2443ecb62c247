// Process terms for the session pi-calculus and the linear pi-calculus.
//
// Both calculi share one tree. Selection, branching and session restriction
// only occur in session processes; case and variant values only occur in pi
// processes. Output/input carry a single value/binder in session processes
// and a tuple in pi processes.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pik/types.hpp"

namespace pik {

enum class Calculus { Session, Pi };

// ============================================================================
// Values and expressions
// ============================================================================

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Values (names, the unit value, ground literals, variant values) and the
/// arithmetic/comparison expressions used by the ground-data examples.
struct Expr {
  enum class Kind { Name, Unit, Int, Bool, Variant, Binary };

  Kind kind = Kind::Unit;
  std::string name; // Name; Variant label; Binary operator
  long long value = 0;
  bool flag = false;
  ExprPtr lhs, rhs; // Binary operands; Variant payload in lhs

  static ExprPtr make_name(std::string n);
  static ExprPtr unit();
  static ExprPtr integer(long long v);
  static ExprPtr boolean(bool b);
  static ExprPtr variant(std::string label, ExprPtr payload);
  static ExprPtr binary(std::string op, ExprPtr lhs, ExprPtr rhs);

  bool is_name() const { return kind == Kind::Name; }
  bool is_ground() const { return kind == Kind::Unit || kind == Kind::Int || kind == Kind::Bool; }
};

std::set<std::string> free_names(const ExprPtr& e);
ExprPtr substitute(const ExprPtr& e, const ExprPtr& v, const std::string& x);
/// Folds closed arithmetic/comparison subterms into literals. Anything that
/// still mentions a name is left in place.
ExprPtr evaluate(const ExprPtr& e);
bool equal(const ExprPtr& a, const ExprPtr& b);

// ============================================================================
// Processes
// ============================================================================

struct Proc;
using ProcPtr = std::shared_ptr<const Proc>;

struct Arm {
  std::string binder; // case binder; empty for session branching
  ProcPtr body;
};
using Arms = std::map<std::string, Arm>;

struct Proc {
  enum class Kind { Nil, Out, In, Sel, Bra, Case, Par, SRes, Res, Rep, If };

  Kind kind = Kind::Nil;
  std::string chan;                 // subject of Out/In/Sel/Bra; name bound by Res; first endpoint of SRes
  std::string chan2;                // second endpoint of SRes
  std::string label;                // Sel
  std::vector<ExprPtr> args;        // Out payload
  std::vector<std::string> binders; // In binders
  ExprPtr expr;                     // Case scrutinee, If condition
  Arms arms;                        // Bra and Case
  ProcPtr cont;                     // prefix continuation; Res/SRes/Rep body
  ProcPtr left, right;              // Par; If then/else
  STypePtr session_annot;           // SRes endpoint type, or #T for a session Res
  PTypePtr pi_annot;                // Res in a pi process

  static ProcPtr nil();
  static ProcPtr out(std::string chan, std::vector<ExprPtr> args, ProcPtr cont);
  static ProcPtr in(std::string chan, std::vector<std::string> binders, ProcPtr cont);
  static ProcPtr sel(std::string chan, std::string label, ProcPtr cont);
  static ProcPtr bra(std::string chan, Arms arms);
  static ProcPtr case_of(ExprPtr scrutinee, Arms arms);
  static ProcPtr par(ProcPtr l, ProcPtr r);
  static ProcPtr sres(std::string x, std::string y, ProcPtr body, STypePtr annot = nullptr);
  static ProcPtr res(std::string x, ProcPtr body, STypePtr session_annot = nullptr, PTypePtr pi_annot = nullptr);
  static ProcPtr rep(ProcPtr body);
  static ProcPtr cond(ExprPtr c, ProcPtr then_branch, ProcPtr else_branch);

  bool is_prefix() const {
    return kind == Kind::Out || kind == Kind::In || kind == Kind::Sel || kind == Kind::Bra;
  }
};

/// Left-nested parallel composition of a list; `0` for the empty list.
ProcPtr par_all(const std::vector<ProcPtr>& ps);

bool uses_session_constructs(const ProcPtr& p);
bool uses_pi_constructs(const ProcPtr& p);

std::set<std::string> free_names(const ProcPtr& p);
/// All names of the process, free and bound.
std::set<std::string> all_names(const ProcPtr& p);
std::set<std::string> bound_names(const ProcPtr& p);

/// A name of the form base<n> (or base itself) not in `avoid`.
std::string fresh_name(const std::string& base, const std::set<std::string>& avoid);

/// Capture-avoiding substitution p[v/x]. Binders that would capture a free
/// name of v are alpha-renamed.
ProcPtr substitute(const ProcPtr& p, const ExprPtr& v, const std::string& x);
/// Simultaneous substitution of several names.
ProcPtr substitute_all(const ProcPtr& p, const std::vector<ExprPtr>& vs, const std::vector<std::string>& xs);

/// Equality up to consistent renaming of bound names. Type annotations on
/// restrictions are ignored.
bool alpha_equiv(const ProcPtr& p, const ProcPtr& q);
/// Canonical text used by alpha_equiv.
std::string alpha_key(const ProcPtr& p);

/// Canonical text of the structural-congruence class of p: parallel
/// components are a sorted multiset, 0 is dropped, restrictions float to the
/// top of their scope with canonical binder numbering and unused restrictions
/// disappear. With `replication_unfolding`, a component alpha-equal to the
/// body of a replicated component next to it is absorbed (*P | P == *P).
std::string congruence_key(const ProcPtr& p, bool replication_unfolding);
bool struct_congruent(const ProcPtr& p, const ProcPtr& q);

// ============================================================================
// Flattened configurations used by the reduction engine
// ============================================================================

struct Binder {
  std::string x;
  std::string y; // nonempty for a session restriction
  STypePtr session_annot;
  PTypePtr pi_annot;
  bool is_session() const { return !y.empty(); }
};

/// P written as (nu binders)(thread_1 | ... | thread_n) where every thread is
/// a prefix, a case, a conditional or a replication. Restricted names are
/// renamed apart from each other and from the free names of P.
struct Config {
  std::vector<Binder> binders;
  std::vector<ProcPtr> threads;
};

Config flatten(const ProcPtr& p);
ProcPtr rebuild(const Config& c);

} // namespace pik

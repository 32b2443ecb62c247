// First-order unification over linear channel types whose capabilities are
// variables ranging over {absent, present}. Duality of session types becomes
// plain equality of these terms with the two capabilities swapped.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pik/types.hpp"

namespace pik {

/// A capability: a variable or a constant.
struct CapTerm {
  int var = -1; // >= 0 for a variable
  Cap value = Cap::Absent;

  static CapTerm constant(Cap c) { return CapTerm{-1, c}; }
  static CapTerm variable(int v) { return CapTerm{v, Cap::Absent}; }
  bool is_var() const { return var >= 0; }
};

struct Term;
using TermPtr = std::shared_ptr<Term>;

struct Term {
  enum class Kind { Meta, Chan, Shared, Variant, Tuple, Unit, Base };

  Kind kind = Kind::Meta;
  int id = -1;                          // Meta
  CapTerm in, out;                      // Chan
  TermPtr payload;                      // Chan, Shared: a Tuple or a Meta
  std::map<std::string, TermPtr> fields; // Variant
  TermPtr row;                          // Variant: Meta (open) or null (closed)
  std::vector<TermPtr> elems;           // Tuple
  std::string name;                     // Base
};

struct UnifyError : std::runtime_error {
  enum class Kind { ConstructorClash, CapabilityClash, OccursCheck, Arity, Label };
  Kind kind;
  UnifyError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

/// Owns the metavariables and capability variables of one inference run.
class Unifier {
public:
  explicit Unifier(bool recursive_types = false) : recursive_(recursive_types) {}

  TermPtr meta();
  CapTerm cap_var();
  /// Chan(k, i, A) with fresh k, i and A.
  TermPtr fresh_chan();
  TermPtr chan(CapTerm in, CapTerm out, TermPtr payload);
  TermPtr tuple(std::vector<TermPtr> elems);
  TermPtr variant(std::map<std::string, TermPtr> fields, bool open);
  TermPtr shared(TermPtr payload);
  TermPtr unit();
  TermPtr base(const std::string& name);
  /// Chan with the capabilities swapped and the same payload.
  TermPtr swapped(const TermPtr& chan);

  void unify(const TermPtr& a, const TermPtr& b);
  void unify_cap(const CapTerm& a, const CapTerm& b);
  /// a.in = b.out, a.out = b.in, equal payloads.
  void unify_dual(const TermPtr& a, const TermPtr& b);

  /// Follows meta bindings at the root.
  TermPtr resolve(const TermPtr& t) const;
  std::optional<Cap> cap_value(const CapTerm& c) const;
  /// Whether two terms are equal under the current substitution.
  bool same(const TermPtr& a, const TermPtr& b) const;
  bool same_cap(const CapTerm& a, const CapTerm& b) const;

  /// Reads a term back as a pi type. Unresolved capabilities become absent,
  /// unresolved channel payloads the empty sequence, open variant rows are
  /// closed and other unresolved metas become Unit. Cycles (possible only with
  /// recursive types enabled) become rec binders.
  PTypePtr to_type(const TermPtr& t) const;
  /// Term for a pi type; rec types are not supported and throw.
  TermPtr from_type(const PTypePtr& t);

  bool recursive_types() const { return recursive_; }

private:
  bool recursive_;
  int unify_depth_ = 0;
  std::set<std::pair<const Term*, const Term*>> unify_active_; // pairs under comparison
  std::vector<TermPtr> metas_;    // binding per meta id (null = unbound)
  std::vector<int> cap_parent_;
  std::vector<std::optional<Cap>> cap_val_;

  int cap_find(int v) const;
  bool occurs(int id, const TermPtr& t) const;
  void bind(const TermPtr& meta, const TermPtr& t);
  void unify_variant(const TermPtr& a, const TermPtr& b);
  std::map<std::string, TermPtr> all_fields(const TermPtr& v, TermPtr& tail) const;
};

std::string to_string(const Unifier& u, const TermPtr& t);

} // namespace pik

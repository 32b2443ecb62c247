// Multiparty session types: the type of one participant towards several
// roles, its projection onto a single role, and the encoding of projections
// into linear pi types.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pik/types.hpp"

namespace pik {

struct LocalType;
using LocalTypePtr = std::shared_ptr<const LocalType>;

/// A message payload: a base type name or a closed local type.
struct Payload {
  std::string base; // Unit, Int or Bool when local is null
  LocalTypePtr local;
};

struct LocalBranch {
  Payload payload;
  LocalTypePtr cont;
};

/// Projected types: end | X | rec X.H | +{l(U).H, ...} | &{l(U).H, ...}
struct LocalType {
  enum class Kind { End, Var, Rec, Select, Branch };
  Kind kind = Kind::End;
  std::string name; // Var, Rec binder
  LocalTypePtr body; // Rec
  std::map<std::string, LocalBranch> branches;

  static LocalTypePtr end();
  static LocalTypePtr var(std::string x);
  static LocalTypePtr rec(std::string x, LocalTypePtr body);
  static LocalTypePtr select(std::map<std::string, LocalBranch> bs);
  static LocalTypePtr branch(std::map<std::string, LocalBranch> bs);
};

struct MultipartyType;
using MultipartyTypePtr = std::shared_ptr<const MultipartyType>;

struct MultipartyBranch {
  Payload payload;
  MultipartyTypePtr cont;
};

/// end | X | rec X.S | p+{l(U).S, ...} (select towards p) | p&{l(U).S, ...}
/// (branch from p)
struct MultipartyType {
  enum class Kind { End, Var, Rec, Select, Branch };
  Kind kind = Kind::End;
  std::string role; // Select, Branch
  std::string name; // Var, Rec binder
  MultipartyTypePtr body;
  std::map<std::string, MultipartyBranch> branches;

  static MultipartyTypePtr end();
  static MultipartyTypePtr var(std::string x);
  static MultipartyTypePtr rec(std::string x, MultipartyTypePtr body);
  static MultipartyTypePtr select(std::string role, std::map<std::string, MultipartyBranch> bs);
  static MultipartyTypePtr branch(std::string role, std::map<std::string, MultipartyBranch> bs);
};

std::string to_string(const Payload& u);
std::string to_string(const LocalTypePtr& h);
std::string to_string(const MultipartyTypePtr& s);

LocalTypePtr parse_local_type(const std::string& text, const std::string& file = "<input>");
MultipartyTypePtr parse_multiparty_type(const std::string& text, const std::string& file = "<input>");

/// Swaps select and branch throughout; payloads are unchanged.
LocalTypePtr dual(const LocalTypePtr& h);

/// Roles mentioned by s, in order.
std::vector<std::string> roles(const MultipartyTypePtr& s);

/// Plain projection: actions towards or from q keep their direction, every
/// other choice must project identically in all branches. Throws
/// "not-projectable" naming the two branches that differ, or "unguarded".
LocalTypePtr project(const MultipartyTypePtr& s, const std::string& q);

/// The select case carries the encoding of the dual continuation, as in the
/// binary encoding; end is empty[] and the rest is homomorphic. Throws
/// "unguarded" on unguarded recursion.
PTypePtr encode_local(const LocalTypePtr& h);

/// One entry per role of s: the encoding of the projection onto that role.
std::map<std::string, PTypePtr> encode_mpst(const MultipartyTypePtr& s);
std::map<std::string, LocalTypePtr> project_all(const MultipartyTypePtr& s);

} // namespace pik

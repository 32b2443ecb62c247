// Type languages of the two calculi: session types (with the ground payload
// types T around them) and linear pi types.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace pik {

/// Raised when a recursive type fails the guardedness condition.
struct UnguardedRecursion : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ============================================================================
// Session types and payload types
// ============================================================================

struct SType;
using STypePtr = std::shared_ptr<const SType>;
using SBranches = std::map<std::string, STypePtr>;

/// One node of a session type or of a payload type T. The session fragment is
/// End, Send, Recv, Select, Branch, Rec and Var; Shared (#T), Unit and Base are
/// the non-session payload types.
struct SType {
  enum class Kind { End, Send, Recv, Select, Branch, Rec, Var, Shared, Unit, Base };

  Kind kind = Kind::End;
  std::string name;   // Rec binder, Var name, Base name
  STypePtr payload;   // Send/Recv/Shared
  STypePtr cont;      // Send/Recv continuation, Rec body
  SBranches branches; // Select/Branch, nonempty

  static STypePtr end();
  static STypePtr send(STypePtr payload, STypePtr cont);
  static STypePtr recv(STypePtr payload, STypePtr cont);
  static STypePtr select(SBranches branches);
  static STypePtr branch(SBranches branches);
  static STypePtr rec(std::string var, STypePtr body);
  static STypePtr var(std::string name);
  static STypePtr shared(STypePtr payload);
  static STypePtr unit();
  static STypePtr base(std::string name);

  bool is_session() const {
    return kind != Kind::Shared && kind != Kind::Unit && kind != Kind::Base;
  }
};

bool equal(const STypePtr& a, const STypePtr& b);
std::string to_string(const STypePtr& t);
std::size_t size(const STypePtr& t);

std::set<std::string> free_type_vars(const STypePtr& t);
/// Capture-avoiding replacement of the type variable `var` by `by`.
STypePtr subst_type_var(const STypePtr& t, const std::string& var, const STypePtr& by);
/// Throws UnguardedRecursion if some `rec X.` has X outside any communication.
void check_guarded(const STypePtr& t);
bool is_guarded(const STypePtr& t);
/// One-step unfolding of a top-level `rec`. Throws on non-rec or unguarded input.
STypePtr unfold_rec(const STypePtr& t);
/// Unfolds until the top constructor is not a `rec`.
STypePtr unfold_all(const STypePtr& t);
bool is_recursion_free(const STypePtr& t);

// ============================================================================
// Linear pi types
// ============================================================================

enum class Cap { Absent, Present };

inline Cap cap_of(bool present) { return present ? Cap::Present : Cap::Absent; }

struct PType;
using PTypePtr = std::shared_ptr<const PType>;
using PBranches = std::map<std::string, PTypePtr>;

/// One node of a linear pi type. Linear channel types are a capability pair
/// (input, output) over a payload sequence: (Present, Absent) is lin_i,
/// (Absent, Present) is lin_o, both present is lin_io and both absent is the
/// capability-free empty[] whose payload is always empty. Tuple only appears
/// as a variant payload produced by the multiparty encoding.
struct PType {
  enum class Kind { Chan, Shared, Variant, Tuple, Unit, Base, Rec, Var };

  Kind kind = Kind::Unit;
  Cap in = Cap::Absent;
  Cap out = Cap::Absent;
  std::vector<PTypePtr> args; // Chan/Shared payload, Tuple components
  PBranches branches;         // Variant
  std::string name;           // Base name, Rec binder, Var name
  PTypePtr body;              // Rec body
  std::optional<int> priority;

  static PTypePtr chan(Cap in, Cap out, std::vector<PTypePtr> args,
                       std::optional<int> priority = std::nullopt);
  static PTypePtr lin_i(std::vector<PTypePtr> args) { return chan(Cap::Present, Cap::Absent, std::move(args)); }
  static PTypePtr lin_o(std::vector<PTypePtr> args) { return chan(Cap::Absent, Cap::Present, std::move(args)); }
  static PTypePtr lin_io(std::vector<PTypePtr> args) { return chan(Cap::Present, Cap::Present, std::move(args)); }
  static PTypePtr empty() { return chan(Cap::Absent, Cap::Absent, {}); }
  static PTypePtr shared(std::vector<PTypePtr> args);
  static PTypePtr variant(PBranches branches);
  static PTypePtr tuple(std::vector<PTypePtr> elems);
  static PTypePtr unit();
  static PTypePtr base(std::string name);
  static PTypePtr rec(std::string var, PTypePtr body);
  static PTypePtr var(std::string name);

  bool is_chan() const { return kind == Kind::Chan; }
  bool is_empty_chan() const { return kind == Kind::Chan && in == Cap::Absent && out == Cap::Absent; }
  /// Has at least one linear capability that must be used exactly once.
  bool has_capability() const { return kind == Kind::Chan && (in == Cap::Present || out == Cap::Present); }
};

bool equal(const PTypePtr& a, const PTypePtr& b);
std::string to_string(const PTypePtr& t);
std::size_t size(const PTypePtr& t);

PTypePtr subst_type_var(const PTypePtr& t, const std::string& var, const PTypePtr& by);
void check_guarded(const PTypePtr& t);
PTypePtr unfold_rec(const PTypePtr& t);
PTypePtr unfold_all(const PTypePtr& t);

/// Swaps the outermost input/output capabilities of a channel type, leaving
/// the payload untouched. A top-level rec is unfolded first. Identity on
/// everything else.
PTypePtr swap_caps(const PTypePtr& t);
/// Returns t with the priority annotation dropped everywhere.
PTypePtr strip_priorities(const PTypePtr& t);

} // namespace pik

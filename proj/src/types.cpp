#include "pik/types.hpp"

#include <algorithm>
#include <sstream>

namespace pik {

// ============================================================================
// Session type constructors
// ============================================================================

namespace {

std::shared_ptr<SType> snode(SType::Kind k) {
  auto n = std::make_shared<SType>();
  n->kind = k;
  return n;
}

std::shared_ptr<PType> pnode(PType::Kind k) {
  auto n = std::make_shared<PType>();
  n->kind = k;
  return n;
}

} // namespace

STypePtr SType::end() { return snode(Kind::End); }

STypePtr SType::send(STypePtr payload, STypePtr cont) {
  auto n = snode(Kind::Send);
  n->payload = std::move(payload);
  n->cont = std::move(cont);
  return n;
}

STypePtr SType::recv(STypePtr payload, STypePtr cont) {
  auto n = snode(Kind::Recv);
  n->payload = std::move(payload);
  n->cont = std::move(cont);
  return n;
}

STypePtr SType::select(SBranches branches) {
  if (branches.empty()) throw std::invalid_argument("select needs at least one label");
  auto n = snode(Kind::Select);
  n->branches = std::move(branches);
  return n;
}

STypePtr SType::branch(SBranches branches) {
  if (branches.empty()) throw std::invalid_argument("branch needs at least one label");
  auto n = snode(Kind::Branch);
  n->branches = std::move(branches);
  return n;
}

STypePtr SType::rec(std::string var, STypePtr body) {
  auto n = snode(Kind::Rec);
  n->name = std::move(var);
  n->cont = std::move(body);
  return n;
}

STypePtr SType::var(std::string name) {
  auto n = snode(Kind::Var);
  n->name = std::move(name);
  return n;
}

STypePtr SType::shared(STypePtr payload) {
  auto n = snode(Kind::Shared);
  n->payload = std::move(payload);
  return n;
}

STypePtr SType::unit() { return snode(Kind::Unit); }

STypePtr SType::base(std::string name) {
  auto n = snode(Kind::Base);
  n->name = std::move(name);
  return n;
}

// ============================================================================
// Session type utilities
// ============================================================================

namespace {

using Binders = std::vector<std::pair<std::string, std::string>>;

bool bound_match(const Binders& env, const std::string& a, const std::string& b) {
  for (auto it = env.rbegin(); it != env.rend(); ++it) {
    if (it->first == a || it->second == b) return it->first == a && it->second == b;
  }
  return a == b;
}

bool equal_s(const STypePtr& a, const STypePtr& b, Binders& env) {
  if (a->kind != b->kind) return false;
  using K = SType::Kind;
  switch (a->kind) {
  case K::End:
  case K::Unit: return true;
  case K::Base: return a->name == b->name;
  case K::Var: return bound_match(env, a->name, b->name);
  case K::Send:
  case K::Recv: return equal_s(a->payload, b->payload, env) && equal_s(a->cont, b->cont, env);
  case K::Shared: return equal_s(a->payload, b->payload, env);
  case K::Select:
  case K::Branch: {
    if (a->branches.size() != b->branches.size()) return false;
    for (auto ia = a->branches.begin(), ib = b->branches.begin(); ia != a->branches.end(); ++ia, ++ib) {
      if (ia->first != ib->first || !equal_s(ia->second, ib->second, env)) return false;
    }
    return true;
  }
  case K::Rec: {
    env.emplace_back(a->name, b->name);
    bool r = equal_s(a->cont, b->cont, env);
    env.pop_back();
    return r;
  }
  }
  return false;
}

bool is_atom(const STypePtr& t) {
  using K = SType::Kind;
  switch (t->kind) {
  case K::End:
  case K::Unit:
  case K::Base:
  case K::Var: return true;
  case K::Shared: return is_atom(t->payload);
  default: return false;
  }
}

void print_s(std::ostream& os, const STypePtr& t);

void print_payload(std::ostream& os, const STypePtr& t) {
  if (is_atom(t)) {
    print_s(os, t);
  } else {
    os << '(';
    print_s(os, t);
    os << ')';
  }
}

void print_s(std::ostream& os, const STypePtr& t) {
  using K = SType::Kind;
  switch (t->kind) {
  case K::End: os << "end"; break;
  case K::Unit: os << "Unit"; break;
  case K::Base: os << t->name; break;
  case K::Var: os << t->name; break;
  case K::Send:
  case K::Recv:
    os << (t->kind == K::Send ? '!' : '?');
    print_payload(os, t->payload);
    os << '.';
    print_s(os, t->cont);
    break;
  case K::Shared:
    os << '#';
    print_payload(os, t->payload);
    break;
  case K::Select:
  case K::Branch: {
    os << (t->kind == K::Select ? "+{" : "&{");
    bool first = true;
    for (const auto& [l, s] : t->branches) {
      if (!first) os << ", ";
      first = false;
      os << l << ": ";
      print_s(os, s);
    }
    os << '}';
    break;
  }
  case K::Rec:
    os << "rec " << t->name << '.';
    print_s(os, t->cont);
    break;
  }
}

void collect_free(const STypePtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
  using K = SType::Kind;
  switch (t->kind) {
  case K::Var:
    if (!bound.count(t->name)) out.insert(t->name);
    break;
  case K::Send:
  case K::Recv:
    collect_free(t->payload, bound, out);
    collect_free(t->cont, bound, out);
    break;
  case K::Shared: collect_free(t->payload, bound, out); break;
  case K::Select:
  case K::Branch:
    for (const auto& [l, s] : t->branches) collect_free(s, bound, out);
    break;
  case K::Rec: {
    bool had = bound.count(t->name) > 0;
    bound.insert(t->name);
    collect_free(t->cont, bound, out);
    if (!had) bound.erase(t->name);
    break;
  }
  default: break;
  }
}

std::string fresh_type_var(const std::string& base, const std::set<std::string>& avoid) {
  for (int i = 0;; ++i) {
    std::string c = base + "_" + std::to_string(i);
    if (!avoid.count(c)) return c;
  }
}

// `guarded` tracks whether we are below at least one communication constructor.
void guard_walk(const STypePtr& t, std::map<std::string, bool>& vars, bool guarded) {
  using K = SType::Kind;
  switch (t->kind) {
  case K::Var: {
    auto it = vars.find(t->name);
    if (it != vars.end() && !it->second && !guarded) {
      throw UnguardedRecursion("unguarded recursion variable " + t->name);
    }
    break;
  }
  case K::Send:
  case K::Recv:
    guard_walk(t->payload, vars, true);
    guard_walk(t->cont, vars, true);
    break;
  case K::Shared: guard_walk(t->payload, vars, guarded); break;
  case K::Select:
  case K::Branch:
    for (const auto& [l, s] : t->branches) guard_walk(s, vars, true);
    break;
  case K::Rec: {
    // Variables bound further out are already guarded if we are guarded now.
    std::map<std::string, bool> inner;
    for (const auto& [v, g] : vars) inner[v] = g || guarded;
    inner[t->name] = false;
    guard_walk(t->cont, inner, false);
    break;
  }
  default: break;
  }
}

} // namespace

bool equal(const STypePtr& a, const STypePtr& b) {
  Binders env;
  return equal_s(a, b, env);
}

std::string to_string(const STypePtr& t) {
  std::ostringstream os;
  print_s(os, t);
  return os.str();
}

std::size_t size(const STypePtr& t) {
  using K = SType::Kind;
  switch (t->kind) {
  case K::Send:
  case K::Recv: return 1 + size(t->payload) + size(t->cont);
  case K::Shared: return 1 + size(t->payload);
  case K::Rec: return 1 + size(t->cont);
  case K::Select:
  case K::Branch: {
    std::size_t n = 1;
    for (const auto& [l, s] : t->branches) n += size(s);
    return n;
  }
  default: return 1;
  }
}

std::set<std::string> free_type_vars(const STypePtr& t) {
  std::set<std::string> bound, out;
  collect_free(t, bound, out);
  return out;
}

STypePtr subst_type_var(const STypePtr& t, const std::string& var, const STypePtr& by) {
  using K = SType::Kind;
  switch (t->kind) {
  case K::Var: return t->name == var ? by : t;
  case K::Send: return SType::send(subst_type_var(t->payload, var, by), subst_type_var(t->cont, var, by));
  case K::Recv: return SType::recv(subst_type_var(t->payload, var, by), subst_type_var(t->cont, var, by));
  case K::Shared: return SType::shared(subst_type_var(t->payload, var, by));
  case K::Select:
  case K::Branch: {
    SBranches bs;
    for (const auto& [l, s] : t->branches) bs[l] = subst_type_var(s, var, by);
    return t->kind == K::Select ? SType::select(std::move(bs)) : SType::branch(std::move(bs));
  }
  case K::Rec: {
    if (t->name == var) return t;
    auto fv = free_type_vars(by);
    if (fv.count(t->name)) {
      auto avoid = fv;
      for (const auto& v : free_type_vars(t->cont)) avoid.insert(v);
      avoid.insert(var);
      auto fresh = fresh_type_var(t->name, avoid);
      auto body = subst_type_var(t->cont, t->name, SType::var(fresh));
      return SType::rec(fresh, subst_type_var(body, var, by));
    }
    return SType::rec(t->name, subst_type_var(t->cont, var, by));
  }
  default: return t;
  }
}

void check_guarded(const STypePtr& t) {
  std::map<std::string, bool> vars;
  guard_walk(t, vars, false);
}

bool is_guarded(const STypePtr& t) {
  try {
    check_guarded(t);
    return true;
  } catch (const UnguardedRecursion&) {
    return false;
  }
}

STypePtr unfold_rec(const STypePtr& t) {
  if (t->kind != SType::Kind::Rec) throw std::invalid_argument("unfold_rec: not a recursive type");
  check_guarded(t);
  return subst_type_var(t->cont, t->name, t);
}

STypePtr unfold_all(const STypePtr& t) {
  STypePtr cur = t;
  while (cur->kind == SType::Kind::Rec) cur = unfold_rec(cur);
  return cur;
}

bool is_recursion_free(const STypePtr& t) {
  using K = SType::Kind;
  switch (t->kind) {
  case K::Rec:
  case K::Var: return false;
  case K::Send:
  case K::Recv: return is_recursion_free(t->payload) && is_recursion_free(t->cont);
  case K::Shared: return is_recursion_free(t->payload);
  case K::Select:
  case K::Branch:
    return std::all_of(t->branches.begin(), t->branches.end(),
                       [](const auto& b) { return is_recursion_free(b.second); });
  default: return true;
  }
}

// ============================================================================
// Pi types
// ============================================================================

PTypePtr PType::chan(Cap in, Cap out, std::vector<PTypePtr> args, std::optional<int> priority) {
  auto n = pnode(Kind::Chan);
  n->in = in;
  n->out = out;
  if (in == Cap::Present || out == Cap::Present) n->args = std::move(args);
  n->priority = priority;
  return n;
}

PTypePtr PType::shared(std::vector<PTypePtr> args) {
  auto n = pnode(Kind::Shared);
  n->args = std::move(args);
  return n;
}

PTypePtr PType::variant(PBranches branches) {
  if (branches.empty()) throw std::invalid_argument("variant needs at least one label");
  auto n = pnode(Kind::Variant);
  n->branches = std::move(branches);
  return n;
}

PTypePtr PType::tuple(std::vector<PTypePtr> elems) {
  auto n = pnode(Kind::Tuple);
  n->args = std::move(elems);
  return n;
}

PTypePtr PType::unit() { return pnode(Kind::Unit); }

PTypePtr PType::base(std::string name) {
  auto n = pnode(Kind::Base);
  n->name = std::move(name);
  return n;
}

PTypePtr PType::rec(std::string var, PTypePtr body) {
  auto n = pnode(Kind::Rec);
  n->name = std::move(var);
  n->body = std::move(body);
  return n;
}

PTypePtr PType::var(std::string name) {
  auto n = pnode(Kind::Var);
  n->name = std::move(name);
  return n;
}

namespace {

bool equal_p(const PTypePtr& a, const PTypePtr& b, Binders& env) {
  if (a->kind != b->kind) return false;
  using K = PType::Kind;
  auto seq = [&](const std::vector<PTypePtr>& x, const std::vector<PTypePtr>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!equal_p(x[i], y[i], env)) return false;
    }
    return true;
  };
  switch (a->kind) {
  case K::Unit: return true;
  case K::Base: return a->name == b->name;
  case K::Var: return bound_match(env, a->name, b->name);
  case K::Chan: return a->in == b->in && a->out == b->out && a->priority == b->priority && seq(a->args, b->args);
  case K::Shared:
  case K::Tuple: return seq(a->args, b->args);
  case K::Variant: {
    if (a->branches.size() != b->branches.size()) return false;
    for (auto ia = a->branches.begin(), ib = b->branches.begin(); ia != a->branches.end(); ++ia, ++ib) {
      if (ia->first != ib->first || !equal_p(ia->second, ib->second, env)) return false;
    }
    return true;
  }
  case K::Rec: {
    env.emplace_back(a->name, b->name);
    bool r = equal_p(a->body, b->body, env);
    env.pop_back();
    return r;
  }
  }
  return false;
}

void print_p(std::ostream& os, const PTypePtr& t) {
  using K = PType::Kind;
  auto seq = [&](const std::vector<PTypePtr>& xs) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) os << ", ";
      print_p(os, xs[i]);
    }
  };
  switch (t->kind) {
  case K::Unit: os << "Unit"; break;
  case K::Base: os << t->name; break;
  case K::Var: os << t->name; break;
  case K::Chan:
    if (t->is_empty_chan()) {
      os << "empty[]";
    } else {
      os << (t->in == Cap::Present ? (t->out == Cap::Present ? "lin_io[" : "lin_i[") : "lin_o[");
      seq(t->args);
      os << ']';
    }
    if (t->priority) os << '^' << *t->priority;
    break;
  case K::Shared:
    os << "#[";
    seq(t->args);
    os << ']';
    break;
  case K::Tuple:
    os << '(';
    seq(t->args);
    os << ')';
    break;
  case K::Variant: {
    os << '<';
    bool first = true;
    for (const auto& [l, s] : t->branches) {
      if (!first) os << ", ";
      first = false;
      os << l << ": ";
      print_p(os, s);
    }
    os << '>';
    break;
  }
  case K::Rec:
    os << "rec " << t->name << '.';
    print_p(os, t->body);
    break;
  }
}

void collect_free_p(const PTypePtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
  using K = PType::Kind;
  switch (t->kind) {
  case K::Var:
    if (!bound.count(t->name)) out.insert(t->name);
    break;
  case K::Chan:
  case K::Shared:
  case K::Tuple:
    for (const auto& a : t->args) collect_free_p(a, bound, out);
    break;
  case K::Variant:
    for (const auto& [l, s] : t->branches) collect_free_p(s, bound, out);
    break;
  case K::Rec: {
    bool had = bound.count(t->name) > 0;
    bound.insert(t->name);
    collect_free_p(t->body, bound, out);
    if (!had) bound.erase(t->name);
    break;
  }
  default: break;
  }
}

void guard_walk_p(const PTypePtr& t, std::map<std::string, bool>& vars, bool guarded) {
  using K = PType::Kind;
  switch (t->kind) {
  case K::Var: {
    auto it = vars.find(t->name);
    if (it != vars.end() && !it->second && !guarded) {
      throw UnguardedRecursion("unguarded recursion variable " + t->name);
    }
    break;
  }
  case K::Chan:
  case K::Shared:
    for (const auto& a : t->args) guard_walk_p(a, vars, true);
    break;
  case K::Tuple:
    for (const auto& a : t->args) guard_walk_p(a, vars, guarded);
    break;
  case K::Variant:
    for (const auto& [l, s] : t->branches) guard_walk_p(s, vars, guarded);
    break;
  case K::Rec: {
    std::map<std::string, bool> inner;
    for (const auto& [v, g] : vars) inner[v] = g || guarded;
    inner[t->name] = false;
    guard_walk_p(t->body, inner, false);
    break;
  }
  default: break;
  }
}

} // namespace

bool equal(const PTypePtr& a, const PTypePtr& b) {
  Binders env;
  return equal_p(a, b, env);
}

std::string to_string(const PTypePtr& t) {
  std::ostringstream os;
  print_p(os, t);
  return os.str();
}

std::size_t size(const PTypePtr& t) {
  std::size_t n = 1;
  for (const auto& a : t->args) n += size(a);
  for (const auto& [l, s] : t->branches) n += size(s);
  if (t->body) n += size(t->body);
  return n;
}

PTypePtr subst_type_var(const PTypePtr& t, const std::string& var, const PTypePtr& by) {
  using K = PType::Kind;
  auto seq = [&](const std::vector<PTypePtr>& xs) {
    std::vector<PTypePtr> r;
    r.reserve(xs.size());
    for (const auto& x : xs) r.push_back(subst_type_var(x, var, by));
    return r;
  };
  switch (t->kind) {
  case K::Var: return t->name == var ? by : t;
  case K::Chan: return PType::chan(t->in, t->out, seq(t->args), t->priority);
  case K::Shared: return PType::shared(seq(t->args));
  case K::Tuple: return PType::tuple(seq(t->args));
  case K::Variant: {
    PBranches bs;
    for (const auto& [l, s] : t->branches) bs[l] = subst_type_var(s, var, by);
    return PType::variant(std::move(bs));
  }
  case K::Rec: {
    if (t->name == var) return t;
    std::set<std::string> bound, fv;
    collect_free_p(by, bound, fv);
    if (fv.count(t->name)) {
      std::set<std::string> avoid = fv;
      collect_free_p(t->body, bound, avoid);
      avoid.insert(var);
      auto fresh = fresh_type_var(t->name, avoid);
      auto body = subst_type_var(t->body, t->name, PType::var(fresh));
      return PType::rec(fresh, subst_type_var(body, var, by));
    }
    return PType::rec(t->name, subst_type_var(t->body, var, by));
  }
  default: return t;
  }
}

void check_guarded(const PTypePtr& t) {
  std::map<std::string, bool> vars;
  guard_walk_p(t, vars, false);
}

PTypePtr unfold_rec(const PTypePtr& t) {
  if (t->kind != PType::Kind::Rec) throw std::invalid_argument("unfold_rec: not a recursive type");
  check_guarded(t);
  return subst_type_var(t->body, t->name, t);
}

PTypePtr unfold_all(const PTypePtr& t) {
  PTypePtr cur = t;
  while (cur->kind == PType::Kind::Rec) cur = unfold_rec(cur);
  return cur;
}

PTypePtr swap_caps(const PTypePtr& t) {
  auto u = t->kind == PType::Kind::Rec ? unfold_all(t) : t;
  if (u->kind != PType::Kind::Chan) return t;
  return PType::chan(u->out, u->in, u->args, u->priority);
}

PTypePtr strip_priorities(const PTypePtr& t) {
  using K = PType::Kind;
  auto seq = [](const std::vector<PTypePtr>& xs) {
    std::vector<PTypePtr> r;
    for (const auto& x : xs) r.push_back(strip_priorities(x));
    return r;
  };
  switch (t->kind) {
  case K::Chan: return PType::chan(t->in, t->out, seq(t->args));
  case K::Shared: return PType::shared(seq(t->args));
  case K::Tuple: return PType::tuple(seq(t->args));
  case K::Variant: {
    PBranches bs;
    for (const auto& [l, s] : t->branches) bs[l] = strip_priorities(s);
    return PType::variant(std::move(bs));
  }
  case K::Rec: return PType::rec(t->name, strip_priorities(t->body));
  default: return t;
  }
}

} // namespace pik

#include "pik/unify.hpp"

#include <functional>
#include <set>

namespace pik {

namespace {

std::shared_ptr<Term> tnode(Term::Kind k) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  return t;
}

const char* kind_name(Term::Kind k) {
  switch (k) {
  case Term::Kind::Meta: return "a type variable";
  case Term::Kind::Chan: return "a linear channel";
  case Term::Kind::Shared: return "a shared channel";
  case Term::Kind::Variant: return "a variant";
  case Term::Kind::Tuple: return "a tuple";
  case Term::Kind::Unit: return "Unit";
  case Term::Kind::Base: return "a base type";
  }
  return "";
}

} // namespace

// ============================================================================
// Construction
// ============================================================================

TermPtr Unifier::meta() {
  auto t = tnode(Term::Kind::Meta);
  t->id = static_cast<int>(metas_.size());
  metas_.push_back(nullptr);
  return t;
}

CapTerm Unifier::cap_var() {
  int v = static_cast<int>(cap_parent_.size());
  cap_parent_.push_back(v);
  cap_val_.push_back(std::nullopt);
  return CapTerm::variable(v);
}

TermPtr Unifier::chan(CapTerm in, CapTerm out, TermPtr payload) {
  auto t = tnode(Term::Kind::Chan);
  t->in = in;
  t->out = out;
  t->payload = std::move(payload);
  return t;
}

TermPtr Unifier::fresh_chan() { return chan(cap_var(), cap_var(), meta()); }

TermPtr Unifier::tuple(std::vector<TermPtr> elems) {
  auto t = tnode(Term::Kind::Tuple);
  t->elems = std::move(elems);
  return t;
}

TermPtr Unifier::variant(std::map<std::string, TermPtr> fields, bool open) {
  auto t = tnode(Term::Kind::Variant);
  t->fields = std::move(fields);
  if (open) t->row = meta();
  return t;
}

TermPtr Unifier::shared(TermPtr payload) {
  auto t = tnode(Term::Kind::Shared);
  t->payload = std::move(payload);
  return t;
}

TermPtr Unifier::unit() { return tnode(Term::Kind::Unit); }

TermPtr Unifier::base(const std::string& name) {
  auto t = tnode(Term::Kind::Base);
  t->name = name;
  return t;
}

TermPtr Unifier::swapped(const TermPtr& c) {
  auto r = resolve(c);
  if (r->kind != Term::Kind::Chan) {
    auto fresh = fresh_chan();
    unify(r, fresh);
    r = fresh;
  }
  return chan(r->out, r->in, r->payload);
}

// ============================================================================
// Capabilities
// ============================================================================

int Unifier::cap_find(int v) const {
  while (cap_parent_[v] != v) v = cap_parent_[v];
  return v;
}

std::optional<Cap> Unifier::cap_value(const CapTerm& c) const {
  if (!c.is_var()) return c.value;
  return cap_val_[cap_find(c.var)];
}

bool Unifier::same_cap(const CapTerm& a, const CapTerm& b) const {
  auto va = cap_value(a), vb = cap_value(b);
  if (va && vb) return *va == *vb;
  if (a.is_var() && b.is_var()) return cap_find(a.var) == cap_find(b.var);
  return false;
}

void Unifier::unify_cap(const CapTerm& a, const CapTerm& b) {
  auto clash = [](Cap x, Cap y) {
    auto s = [](Cap c) { return c == Cap::Present ? "present" : "absent"; };
    return UnifyError(UnifyError::Kind::CapabilityClash,
                      std::string("capability clash: ") + s(x) + " against " + s(y));
  };
  if (!a.is_var() && !b.is_var()) {
    if (a.value != b.value) throw clash(a.value, b.value);
    return;
  }
  if (!a.is_var() || !b.is_var()) {
    const auto& v = a.is_var() ? a : b;
    Cap c = a.is_var() ? b.value : a.value;
    int r = cap_find(v.var);
    if (cap_val_[r] && *cap_val_[r] != c) throw clash(*cap_val_[r], c);
    cap_val_[r] = c;
    return;
  }
  int ra = cap_find(a.var), rb = cap_find(b.var);
  if (ra == rb) return;
  if (cap_val_[ra] && cap_val_[rb] && *cap_val_[ra] != *cap_val_[rb]) throw clash(*cap_val_[ra], *cap_val_[rb]);
  cap_parent_[ra] = rb;
  if (!cap_val_[rb]) cap_val_[rb] = cap_val_[ra];
}

// ============================================================================
// Terms
// ============================================================================

TermPtr Unifier::resolve(const TermPtr& t) const {
  TermPtr cur = t;
  while (cur && cur->kind == Term::Kind::Meta && metas_[cur->id]) cur = metas_[cur->id];
  return cur;
}

bool Unifier::occurs(int id, const TermPtr& t) const {
  std::set<const Term*> seen;
  std::function<bool(const TermPtr&)> go = [&](const TermPtr& x0) -> bool {
    auto x = resolve(x0);
    if (!x) return false;
    if (x->kind == Term::Kind::Meta) return x->id == id;
    if (!seen.insert(x.get()).second) return false;
    if (go(x->payload) || go(x->row)) return true;
    for (const auto& [l, f] : x->fields) {
      if (go(f)) return true;
    }
    for (const auto& e : x->elems) {
      if (go(e)) return true;
    }
    return false;
  };
  return go(t);
}

void Unifier::bind(const TermPtr& m, const TermPtr& t) {
  auto r = resolve(t);
  if (r->kind == Term::Kind::Meta && r->id == m->id) return;
  if (!recursive_ && occurs(m->id, r)) {
    throw UnifyError(UnifyError::Kind::OccursCheck, "occurs check: the type would be infinite");
  }
  metas_[m->id] = r;
}

std::map<std::string, TermPtr> Unifier::all_fields(const TermPtr& v, TermPtr& tail) const {
  std::map<std::string, TermPtr> out = v->fields;
  TermPtr r = resolve(v->row);
  std::set<const Term*> seen;
  while (r && r->kind == Term::Kind::Variant && seen.insert(r.get()).second) {
    for (const auto& [l, f] : r->fields) out.emplace(l, f);
    r = resolve(r->row);
  }
  tail = r;
  return out;
}

void Unifier::unify_variant(const TermPtr& a, const TermPtr& b) {
  TermPtr ta, tb;
  auto fa = all_fields(a, ta);
  auto fb = all_fields(b, tb);
  std::map<std::string, TermPtr> only_a, only_b;
  for (const auto& [l, t] : fa) {
    if (fb.count(l)) {
      unify(t, fb.at(l));
    } else {
      only_a[l] = t;
    }
  }
  for (const auto& [l, t] : fb) {
    if (!fa.count(l)) only_b[l] = t;
  }
  auto label_error = [](const std::map<std::string, TermPtr>& extra) {
    return UnifyError(UnifyError::Kind::Label, "variant label " + extra.begin()->first + " is not offered");
  };
  if (!only_b.empty() && !ta) throw label_error(only_b);
  if (!only_a.empty() && !tb) throw label_error(only_a);
  if (!ta && !tb) return;
  if (!ta) {
    bind(tb, variant(only_a, false));
  } else if (!tb) {
    bind(ta, variant(only_b, false));
  } else if (ta->id == tb->id) {
    if (!only_a.empty() || !only_b.empty()) throw label_error(only_a.empty() ? only_b : only_a);
  } else {
    auto rest = meta();
    auto va = variant(only_b, false);
    va->row = rest;
    auto vb = variant(only_a, false);
    vb->row = rest;
    bind(ta, va);
    bind(tb, vb);
  }
}

void Unifier::unify(const TermPtr& a0, const TermPtr& b0) {
  struct Depth {
    Unifier& u;
    explicit Depth(Unifier& u) : u(u) {
      if (u.unify_depth_++ == 0) u.unify_active_.clear();
    }
    ~Depth() { --u.unify_depth_; }
  } depth(*this);
  auto& active = unify_active_;
  std::function<void(const TermPtr&, const TermPtr&)> go = [&](const TermPtr& x0, const TermPtr& y0) {
    auto a = resolve(x0), b = resolve(y0);
    if (a == b) return;
    if (a->kind == Term::Kind::Meta) return bind(a, b);
    if (b->kind == Term::Kind::Meta) return bind(b, a);
    if (!active.emplace(a.get(), b.get()).second) return;
    if (a->kind != b->kind) {
      throw UnifyError(UnifyError::Kind::ConstructorClash,
                       std::string("expected ") + kind_name(a->kind) + ", found " + kind_name(b->kind));
    }
    switch (a->kind) {
    case Term::Kind::Chan:
      unify_cap(a->in, b->in);
      unify_cap(a->out, b->out);
      go(a->payload, b->payload);
      break;
    case Term::Kind::Shared: go(a->payload, b->payload); break;
    case Term::Kind::Tuple:
      if (a->elems.size() != b->elems.size()) {
        throw UnifyError(UnifyError::Kind::Arity, "payload arity " + std::to_string(a->elems.size()) + " against " +
                                                      std::to_string(b->elems.size()));
      }
      for (std::size_t i = 0; i < a->elems.size(); ++i) go(a->elems[i], b->elems[i]);
      break;
    case Term::Kind::Variant: unify_variant(a, b); break;
    case Term::Kind::Base:
      if (a->name != b->name) {
        throw UnifyError(UnifyError::Kind::ConstructorClash, "expected " + a->name + ", found " + b->name);
      }
      break;
    default: break;
    }
  };
  go(a0, b0);
}

void Unifier::unify_dual(const TermPtr& a, const TermPtr& b) {
  auto ra = resolve(a);
  if (ra->kind != Term::Kind::Chan) {
    auto fresh = fresh_chan();
    unify(ra, fresh);
    ra = fresh;
  }
  unify(b, chan(ra->out, ra->in, ra->payload));
}

bool Unifier::same(const TermPtr& a0, const TermPtr& b0) const {
  std::set<std::pair<const Term*, const Term*>> assumed;
  std::function<bool(const TermPtr&, const TermPtr&)> go = [&](const TermPtr& x0, const TermPtr& y0) -> bool {
    auto a = resolve(x0), b = resolve(y0);
    if (!a || !b) return a == b;
    if (a == b) return true;
    if (a->kind != b->kind) return false;
    if (a->kind == Term::Kind::Meta) return a->id == b->id;
    if (!assumed.emplace(a.get(), b.get()).second) return true;
    switch (a->kind) {
    case Term::Kind::Chan: return same_cap(a->in, b->in) && same_cap(a->out, b->out) && go(a->payload, b->payload);
    case Term::Kind::Shared: return go(a->payload, b->payload);
    case Term::Kind::Tuple:
      if (a->elems.size() != b->elems.size()) return false;
      for (std::size_t i = 0; i < a->elems.size(); ++i) {
        if (!go(a->elems[i], b->elems[i])) return false;
      }
      return true;
    case Term::Kind::Variant: {
      TermPtr ta, tb;
      auto fa = all_fields(a, ta), fb = all_fields(b, tb);
      if (fa.size() != fb.size()) return false;
      for (const auto& [l, t] : fa) {
        if (!fb.count(l) || !go(t, fb.at(l))) return false;
      }
      return (!ta && !tb) || (ta && tb && ta->id == tb->id);
    }
    case Term::Kind::Base: return a->name == b->name;
    default: return true;
    }
  };
  return go(a0, b0);
}

// ============================================================================
// Conversion to and from pi types
// ============================================================================

PTypePtr Unifier::to_type(const TermPtr& t0) const {
  std::map<const Term*, std::pair<std::string, bool>> open;
  int counter = 0;
  std::function<PTypePtr(const TermPtr&)> go = [&](const TermPtr& x) -> PTypePtr {
    auto t = resolve(x);
    if (t->kind == Term::Kind::Meta) return PType::unit();
    if (t->kind == Term::Kind::Unit) return PType::unit();
    if (t->kind == Term::Kind::Base) return PType::base(t->name);
    if (auto it = open.find(t.get()); it != open.end()) {
      it->second.second = true;
      return PType::var(it->second.first);
    }
    auto var = "R" + std::to_string(counter++);
    open[t.get()] = {var, false};
    auto seq = [&](const TermPtr& payload) {
      std::vector<PTypePtr> out;
      auto p = resolve(payload);
      if (p->kind == Term::Kind::Tuple) {
        for (const auto& e : p->elems) out.push_back(go(e));
      } else if (p->kind != Term::Kind::Meta) {
        out.push_back(go(p));
      }
      return out;
    };
    PTypePtr body;
    switch (t->kind) {
    case Term::Kind::Chan: {
      Cap in = cap_value(t->in).value_or(Cap::Absent);
      Cap out = cap_value(t->out).value_or(Cap::Absent);
      body = PType::chan(in, out, in == Cap::Absent && out == Cap::Absent ? std::vector<PTypePtr>{} : seq(t->payload));
      break;
    }
    case Term::Kind::Shared: body = PType::shared(seq(t->payload)); break;
    case Term::Kind::Tuple: {
      std::vector<PTypePtr> es;
      for (const auto& e : t->elems) es.push_back(go(e));
      body = PType::tuple(std::move(es));
      break;
    }
    case Term::Kind::Variant: {
      TermPtr tail;
      PBranches bs;
      for (const auto& [l, f] : all_fields(t, tail)) bs[l] = go(f);
      body = PType::variant(std::move(bs));
      break;
    }
    default: body = PType::unit(); break;
    }
    bool used = open[t.get()].second;
    open.erase(t.get());
    return used ? PType::rec(var, body) : body;
  };
  return go(t0);
}

TermPtr Unifier::from_type(const PTypePtr& t0) {
  std::map<std::string, TermPtr> vars;
  std::function<TermPtr(const PTypePtr&)> go = [&](const PTypePtr& t) -> TermPtr {
    using K = PType::Kind;
    auto seq = [&](const std::vector<PTypePtr>& xs) {
      std::vector<TermPtr> out;
      for (const auto& x : xs) out.push_back(go(x));
      return tuple(std::move(out));
    };
    switch (t->kind) {
    case K::Chan: {
      auto payload = t->is_empty_chan() ? meta() : seq(t->args);
      return chan(CapTerm::constant(t->in), CapTerm::constant(t->out), payload);
    }
    case K::Shared: return shared(seq(t->args));
    case K::Tuple: return seq(t->args);
    case K::Variant: {
      std::map<std::string, TermPtr> fs;
      for (const auto& [l, b] : t->branches) fs[l] = go(b);
      return variant(std::move(fs), false);
    }
    case K::Unit: return unit();
    case K::Base: return base(t->name);
    case K::Var: {
      auto it = vars.find(t->name);
      if (it == vars.end()) throw std::invalid_argument("free type variable " + t->name);
      return it->second;
    }
    case K::Rec: {
      auto m = meta();
      auto saved = vars.count(t->name) ? vars[t->name] : nullptr;
      vars[t->name] = m;
      auto body = go(t->body);
      if (saved) {
        vars[t->name] = saved;
      } else {
        vars.erase(t->name);
      }
      metas_[m->id] = resolve(body);
      return metas_[m->id];
    }
    }
    return unit();
  };
  return go(t0);
}

std::string to_string(const Unifier& u, const TermPtr& t) { return to_string(u.to_type(t)); }

} // namespace pik

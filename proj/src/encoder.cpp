#include "pik/encoder.hpp"

#include "pik/diagnostic.hpp"
#include "pik/duality.hpp"

namespace pik {

// ============================================================================
// Types
// ============================================================================

namespace {

class TypeEncoder {
public:
  PTypePtr encode(const STypePtr& t) {
    using K = SType::Kind;
    switch (t->kind) {
    case K::Unit: return PType::unit();
    case K::Base: return PType::base(t->name);
    case K::Shared: return PType::shared({encode(t->payload)});
    case K::Var: return PType::var(t->name);
    default: break;
    }
    if (is_recursion_free(t)) return structural(t);

    auto key = to_string(t);
    if (auto it = open_.find(key); it != open_.end()) {
      it->second.used = true;
      return PType::var(it->second.var);
    }
    if (open_.size() > 4096) throw std::runtime_error("encoding of " + key + " does not converge");
    auto var = "X" + std::to_string(counter_++);
    open_[key] = Open{var, false};
    auto body = structural(unfold_all(t));
    bool used = open_[key].used;
    open_.erase(key);
    return used ? PType::rec(var, body) : body;
  }

private:
  struct Open {
    std::string var;
    bool used;
  };
  std::map<std::string, Open> open_;
  int counter_ = 0;

  PTypePtr structural(const STypePtr& t) {
    using K = SType::Kind;
    switch (t->kind) {
    case K::End: return PType::empty();
    case K::Send: return PType::lin_o({encode(t->payload), encode(dual(t->cont))});
    case K::Recv: return PType::lin_i({encode(t->payload), encode(t->cont)});
    case K::Select: {
      PBranches bs;
      for (const auto& [l, s] : t->branches) bs[l] = encode(dual(s));
      return PType::lin_o({PType::variant(std::move(bs))});
    }
    case K::Branch: {
      PBranches bs;
      for (const auto& [l, s] : t->branches) bs[l] = encode(s);
      return PType::lin_i({PType::variant(std::move(bs))});
    }
    case K::Var: return PType::var(t->name);
    default: return encode(t);
    }
  }
};

// Joins the two encoded ends of one channel into a single entry.
std::optional<PTypePtr> combine(const PTypePtr& a, const PTypePtr& b) {
  if (!is_linear(a) && !is_linear(b)) {
    if (pi_tree_equal(a, b)) return a;
    if (unfold_all(a)->is_empty_chan()) return b;
    if (unfold_all(b)->is_empty_chan()) return a;
    return std::nullopt;
  }
  if (!is_linear(a)) return unfold_all(a)->is_empty_chan() ? std::optional(b) : std::nullopt;
  if (!is_linear(b)) return unfold_all(b)->is_empty_chan() ? std::optional(a) : std::nullopt;
  auto x = unfold_all(a), y = unfold_all(b);
  if (x->kind != PType::Kind::Chan || y->kind != PType::Kind::Chan) return std::nullopt;
  if ((x->in == Cap::Present && y->in == Cap::Present) || (x->out == Cap::Present && y->out == Cap::Present)) {
    return std::nullopt;
  }
  if (x->args.size() != y->args.size()) return std::nullopt;
  for (std::size_t i = 0; i < x->args.size(); ++i) {
    if (!pi_tree_equal(x->args[i], y->args[i])) return std::nullopt;
  }
  return PType::chan(cap_of(x->in == Cap::Present || y->in == Cap::Present),
                     cap_of(x->out == Cap::Present || y->out == Cap::Present), x->args);
}

} // namespace

PTypePtr encode_type(const STypePtr& t) {
  try {
    check_guarded(t);
  } catch (const UnguardedRecursion& e) {
    fail("unguarded", e.what());
  }
  return TypeEncoder().encode(t);
}

// ============================================================================
// Renaming functions and fresh names
// ============================================================================

RenamingFunction RenamingFunction::identity(const std::set<std::string>& names) {
  RenamingFunction f;
  for (const auto& n : names) f.map[n] = n;
  return f;
}

const std::string& RenamingFunction::operator()(const std::string& x) const {
  auto it = map.find(x);
  if (it == map.end()) fail("unmapped-name", "renaming function is undefined on " + x);
  return it->second;
}

RenamingFunction RenamingFunction::with(const std::string& x, const std::string& c) const {
  RenamingFunction g = *this;
  g.map[x] = c;
  return g;
}

bool RenamingFunction::injective() const {
  std::set<std::string> seen;
  for (const auto& [x, c] : map) {
    if (!seen.insert(c).second) return false;
  }
  return true;
}

std::string FreshNameSupply::next() {
  for (;;) {
    auto c = prefix_ + std::to_string(counter_++);
    if (avoid_.insert(c).second) return c;
  }
}

std::string FreshNameSupply::next(const std::string& origin) {
  auto c = next();
  origins_[c] = origin;
  return c;
}

void validate_renaming(const RenamingFunction& f, const ProcPtr& p, const SessionEnv& env) {
  auto names = all_names(p);
  for (const auto& x : free_names(p)) {
    auto it = f.map.find(x);
    if (it == f.map.end()) fail("unmapped-name", "renaming function is undefined on free name " + x);
    if (it->second == x) continue;
    if (names.count(it->second)) {
      fail("invalid-renaming", "f(" + x + ") = " + it->second + " is neither " + x + " nor fresh for the process");
    }
    if (env.count(it->second)) {
      fail("invalid-renaming", "f(" + x + ") = " + it->second + " is not fresh for the typing context");
    }
  }
  for (const auto& b : bound_names(p)) {
    auto it = f.map.find(b);
    if (it != f.map.end() && it->second != b) {
      fail("invalid-renaming", "f is not the identity on bound name " + b);
    }
  }
}

// ============================================================================
// Values and processes
// ============================================================================

ExprPtr encode_value(const ExprPtr& v, const RenamingFunction& f) {
  switch (v->kind) {
  case Expr::Kind::Name: return Expr::make_name(f(v->name));
  case Expr::Kind::Variant: return Expr::variant(v->name, encode_value(v->lhs, f));
  case Expr::Kind::Binary: return Expr::binary(v->name, encode_value(v->lhs, f), encode_value(v->rhs, f));
  default: return v;
  }
}

namespace {

ProcPtr encode_proc(const ProcPtr& p, const RenamingFunction& f, FreshNameSupply& supply) {
  using K = Proc::Kind;
  switch (p->kind) {
  case K::Nil: return p;
  case K::Out: {
    auto c = supply.next(p->chan);
    std::vector<ExprPtr> args;
    for (const auto& a : p->args) args.push_back(encode_value(a, f));
    args.push_back(Expr::make_name(c));
    auto body = Proc::out(f(p->chan), std::move(args), encode_proc(p->cont, f.with(p->chan, c), supply));
    return Proc::res(c, body);
  }
  case K::In: {
    auto c = supply.next(p->chan);
    auto g = f.with(p->chan, c);
    for (const auto& b : p->binders) g = g.with(b, b);
    auto bs = p->binders;
    bs.push_back(c);
    return Proc::in(f(p->chan), std::move(bs), encode_proc(p->cont, g, supply));
  }
  case K::Sel: {
    auto c = supply.next(p->chan);
    auto body = Proc::out(f(p->chan), {Expr::variant(p->label, Expr::make_name(c))},
                          encode_proc(p->cont, f.with(p->chan, c), supply));
    return Proc::res(c, body);
  }
  case K::Bra: {
    auto y = supply.next(p->chan);
    auto c = supply.next(p->chan);
    Arms arms;
    for (const auto& [l, a] : p->arms) arms[l] = Arm{c, encode_proc(a.body, f.with(p->chan, c), supply)};
    return Proc::in(f(p->chan), {y}, Proc::case_of(Expr::make_name(y), std::move(arms)));
  }
  case K::Case: fail("wrong-calculus", "case is not a session process");
  case K::Par: return Proc::par(encode_proc(p->left, f, supply), encode_proc(p->right, f, supply));
  case K::SRes: {
    auto c = supply.next(p->chan + "/" + p->chan2);
    PTypePtr annot;
    if (p->session_annot) annot = combine(encode_type(p->session_annot), encode_type(dual(p->session_annot))).value();
    return Proc::res(c, encode_proc(p->cont, f.with(p->chan, c).with(p->chan2, c), supply), nullptr, annot);
  }
  case K::Res: {
    PTypePtr annot = p->session_annot ? encode_type(p->session_annot) : nullptr;
    return Proc::res(p->chan, encode_proc(p->cont, f.with(p->chan, p->chan), supply), nullptr, annot);
  }
  case K::Rep: return Proc::rep(encode_proc(p->cont, f, supply));
  case K::If:
    return Proc::cond(encode_value(p->expr, f), encode_proc(p->left, f, supply), encode_proc(p->right, f, supply));
  }
  return p;
}

} // namespace

ProcPtr encode_process(const ProcPtr& p, const RenamingFunction& f, FreshNameSupply& supply) {
  if (uses_pi_constructs(p)) fail("wrong-calculus", "encode expects a session process");
  supply.avoid(all_names(p));
  for (const auto& [x, c] : f.map) {
    supply.avoid(x);
    supply.avoid(c);
  }
  return encode_proc(p, f, supply);
}

ProcPtr encode_process(const ProcPtr& p, const RenamingFunction& f) {
  FreshNameSupply supply;
  return encode_process(p, f, supply);
}

PiEnv encode_env(const SessionEnv& env, const RenamingFunction& f) {
  PiEnv out;
  std::map<std::string, std::string> origin;
  for (const auto& [x, t] : env) {
    auto fx = f.map.count(x) ? f.map.at(x) : x;
    auto enc = encode_type(t);
    auto it = out.find(fx);
    if (it == out.end()) {
      out[fx] = enc;
      origin[fx] = x;
      continue;
    }
    auto merged = combine(it->second, enc);
    if (!merged) {
      fail("collision-on-linear", "renaming merges " + origin[fx] + " and " + x + " whose types " +
                                      to_string(it->second) + " and " + to_string(enc) + " do not combine");
    }
    it->second = *merged;
  }
  return out;
}

} // namespace pik

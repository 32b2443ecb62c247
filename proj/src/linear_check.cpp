#include "pik/linear_check.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "pik/duality.hpp"
#include "pik/printer.hpp"
#include "pik/unify.hpp"

namespace pik {

namespace {

// ============================================================================
// Phase 1: payload shapes and capabilities of unannotated names
// ============================================================================

class Inference {
public:
  Inference(const PiEnv& env, const ProcPtr& p) {
    collect_replicated(p);
    std::map<std::string, TermPtr> scope;
    for (const auto& x : free_names(p)) {
      auto it = env.find(x);
      if (it == env.end()) fail("unknown-name", "free name " + x + " has no type");
      scope[x] = u_.from_type(strip_priorities(it->second));
    }
    for (const auto& [x, t] : scope) free_[x] = t;
    walk(p, scope);
    propagate();
  }

  PiTyping result() const {
    PiTyping r;
    for (const auto& [n, t] : restrictions_) r.restrictions[n] = u_.to_type(t);
    for (const auto& [k, t] : binders_) r.binders[k] = u_.to_type(t);
    for (const auto& [x, t] : free_) r.free[x] = u_.to_type(t);
    return r;
  }

private:
  Unifier u_;
  std::set<std::string> replicated_;
  std::map<std::string, TermPtr> free_;
  std::map<const Proc*, TermPtr> restrictions_;
  std::map<std::pair<const Proc*, int>, TermPtr> binders_;
  std::vector<std::pair<TermPtr, bool>> uses_;          // subject, is output
  std::vector<std::pair<TermPtr, TermPtr>> transfers_;  // sent name, view it is sent at

  void collect_replicated(const ProcPtr& p) {
    if (!p) return;
    if (p->kind == Proc::Kind::Rep && p->cont->kind == Proc::Kind::In) replicated_.insert(p->cont->chan);
    collect_replicated(p->cont);
    collect_replicated(p->left);
    collect_replicated(p->right);
    for (const auto& [l, a] : p->arms) collect_replicated(a.body);
  }

  void unify(const TermPtr& a, const TermPtr& b, const ProcPtr& at) {
    try {
      u_.unify(a, b);
    } catch (const UnifyError& e) {
      fail(e.kind == UnifyError::Kind::Label ? "variant-label" : "type-mismatch",
           std::string(e.what()) + " in " + pretty_print(at));
    }
  }

  TermPtr lookup(const std::map<std::string, TermPtr>& scope, const std::string& x, const ProcPtr& at) {
    auto it = scope.find(x);
    if (it == scope.end()) fail("unknown-name", "unknown name " + x + " in " + pretty_print(at));
    return it->second;
  }

  // The subject's channel term, made linear when nothing is known yet.
  TermPtr channel(const TermPtr& t, const ProcPtr& at) {
    auto r = u_.resolve(t);
    if (r->kind == Term::Kind::Meta) {
      auto c = u_.fresh_chan();
      unify(r, c, at);
      return c;
    }
    if (r->kind != Term::Kind::Chan && r->kind != Term::Kind::Shared) {
      fail("type-mismatch", "communication on a non-channel in " + pretty_print(at));
    }
    return r;
  }

  TermPtr value(const ExprPtr& e, const std::map<std::string, TermPtr>& scope, const ProcPtr& at) {
    switch (e->kind) {
    case Expr::Kind::Name: {
      auto t = u_.resolve(lookup(scope, e->name, at));
      if (t->kind != Term::Kind::Chan) return t;
      auto view = u_.chan(u_.cap_var(), u_.cap_var(), t->payload);
      transfers_.emplace_back(t, view);
      return view;
    }
    case Expr::Kind::Unit: return u_.unit();
    case Expr::Kind::Int: return u_.base("Int");
    case Expr::Kind::Bool: return u_.base("Bool");
    case Expr::Kind::Variant: return u_.variant({{e->name, value(e->lhs, scope, at)}}, true);
    case Expr::Kind::Binary: {
      auto l = value(e->lhs, scope, at);
      auto r = value(e->rhs, scope, at);
      if (e->name == "==") {
        unify(l, r, at);
        return u_.base("Bool");
      }
      unify(l, u_.base("Int"), at);
      unify(r, u_.base("Int"), at);
      return u_.base(e->name == "<" || e->name == "<=" ? "Bool" : "Int");
    }
    }
    return u_.unit();
  }

  void walk(const ProcPtr& p, std::map<std::string, TermPtr> scope) {
    using K = Proc::Kind;
    switch (p->kind) {
    case K::Nil: return;
    case K::Out: {
      auto x = channel(lookup(scope, p->chan, p), p);
      std::vector<TermPtr> vs;
      for (const auto& a : p->args) vs.push_back(value(a, scope, p));
      unify(x->payload, u_.tuple(vs), p);
      if (x->kind == Term::Kind::Chan) uses_.emplace_back(x, true);
      return walk(p->cont, scope);
    }
    case K::In: {
      auto x = channel(lookup(scope, p->chan, p), p);
      std::vector<TermPtr> ts;
      for (std::size_t j = 0; j < p->binders.size(); ++j) {
        ts.push_back(u_.meta());
        binders_[{p.get(), static_cast<int>(j)}] = ts.back();
      }
      unify(x->payload, u_.tuple(ts), p);
      if (x->kind == Term::Kind::Chan) uses_.emplace_back(x, false);
      for (std::size_t j = 0; j < p->binders.size(); ++j) scope[p->binders[j]] = ts[j];
      return walk(p->cont, scope);
    }
    case K::Case: {
      auto scrut = value(p->expr, scope, p);
      std::map<std::string, TermPtr> fields;
      int idx = 0;
      for (const auto& [l, a] : p->arms) {
        fields[l] = u_.meta();
        binders_[{p.get(), idx++}] = fields[l];
      }
      unify(scrut, u_.variant(fields, false), p);
      for (const auto& [l, a] : p->arms) {
        auto inner = scope;
        inner[a.binder] = fields[l];
        walk(a.body, inner);
      }
      return;
    }
    case K::Sel:
    case K::Bra:
    case K::SRes: fail("wrong-calculus", "session construct in a pi process: " + pretty_print(p));
    case K::Par:
      walk(p->left, scope);
      walk(p->right, scope);
      return;
    case K::Res: {
      TermPtr t;
      if (p->pi_annot) {
        t = u_.from_type(strip_priorities(p->pi_annot));
      } else if (replicated_.count(p->chan)) {
        t = u_.shared(u_.meta());
      } else {
        t = u_.fresh_chan();
      }
      restrictions_[p.get()] = t;
      scope[p->chan] = t;
      return walk(p->cont, scope);
    }
    case K::Rep: return walk(p->cont, scope);
    case K::If:
      unify(value(p->expr, scope, p), u_.base("Bool"), p);
      walk(p->left, scope);
      walk(p->right, scope);
      return;
    }
  }

  // A capability is present when the name is used with it, or hands it on.
  void propagate() {
    const CapTerm present = CapTerm::constant(Cap::Present);
    auto raise = [&](const CapTerm& c) {
      if (c.is_var() && !u_.cap_value(c)) {
        u_.unify_cap(c, present);
        return true;
      }
      return false;
    };
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& [t, out] : uses_) {
        auto c = u_.resolve(t);
        changed |= raise(out ? c->out : c->in);
      }
      for (const auto& [name, view] : transfers_) {
        auto n = u_.resolve(name), v = u_.resolve(view);
        if (u_.cap_value(v->in) == Cap::Present) changed |= raise(n->in);
        if (u_.cap_value(v->out) == Cap::Present) changed |= raise(n->out);
      }
      if (changed) continue;
      // A used restricted channel has both ends.
      for (const auto& [at, t] : restrictions_) {
        auto c = u_.resolve(t);
        if (c->kind != Term::Kind::Chan) continue;
        if (u_.cap_value(c->in) == Cap::Present || u_.cap_value(c->out) == Cap::Present) {
          changed |= raise(c->in);
          changed |= raise(c->out);
        }
      }
      if (changed) continue;
      // An open view carries the capabilities its name holds but does not use.
      for (const auto& [name, view] : transfers_) {
        auto n = u_.resolve(name), v = u_.resolve(view);
        for (bool out : {false, true}) {
          const auto& vc = out ? v->out : v->in;
          if (!vc.is_var() || u_.cap_value(vc) || u_.cap_value(out ? n->out : n->in) != Cap::Present) continue;
          bool used = std::any_of(uses_.begin(), uses_.end(), [&](const std::pair<TermPtr, bool>& use) {
            return use.second == out && u_.resolve(use.first) == n;
          });
          if (!used) changed |= raise(vc);
        }
      }
    }
  }
};

// ============================================================================
// Phase 2: capability accounting
// ============================================================================

bool linear_content(const PTypePtr& t0) {
  auto t = unfold_all(t0);
  if (t->kind == PType::Kind::Chan) return t->has_capability();
  if (t->kind == PType::Kind::Variant) {
    for (const auto& [l, b] : t->branches) {
      if (linear_content(b)) return true;
    }
  }
  if (t->kind == PType::Kind::Tuple) {
    for (const auto& a : t->args) {
      if (linear_content(a)) return true;
    }
  }
  return false;
}

struct Slot {
  PTypePtr type;
  bool in = false;   // input capability still available
  bool out = false;  // output capability still available
  bool whole = false; // a variant with linear content, not yet consumed

  static Slot of(const PTypePtr& t) {
    Slot s;
    s.type = t;
    auto u = unfold_all(t);
    if (u->kind == PType::Kind::Chan) {
      s.in = u->in == Cap::Present;
      s.out = u->out == Cap::Present;
    } else {
      s.whole = linear_content(u);
    }
    return s;
  }
  bool pending() const { return in || out || whole; }
  bool operator==(const Slot& o) const { return in == o.in && out == o.out && whole == o.whole; }
};
using Ctx = std::map<std::string, Slot>;

bool same_shape(const PTypePtr& a, const PTypePtr& b) {
  return pi_tree_equal(strip_priorities(a), strip_priorities(b));
}

bool same_args(const PTypePtr& a, const PTypePtr& b) {
  auto x = unfold_all(a), y = unfold_all(b);
  if (x->args.size() != y->args.size()) return false;
  for (std::size_t i = 0; i < x->args.size(); ++i) {
    if (!same_shape(x->args[i], y->args[i])) return false;
  }
  return true;
}

class Accounting {
public:
  explicit Accounting(const PiTyping& typing) : typing_(typing) {}

  Ctx check(const ProcPtr& p, Ctx ctx) {
    using K = Proc::Kind;
    switch (p->kind) {
    case K::Nil: return ctx;
    case K::Out: {
      auto t = use(ctx, p->chan, true, p);
      if (t->args.size() != p->args.size()) arity(p, t);
      for (std::size_t i = 0; i < p->args.size(); ++i) send_value(p->args[i], t->args[i], ctx, p);
      return check(p->cont, ctx);
    }
    case K::In: {
      auto t = use(ctx, p->chan, false, p);
      if (t->args.size() != p->binders.size()) arity(p, t);
      std::vector<std::optional<Slot>> saved;
      for (std::size_t j = 0; j < p->binders.size(); ++j) {
        saved.push_back(save(ctx, p->binders[j]));
        ctx[p->binders[j]] = Slot::of(t->args[j]);
      }
      auto r = check(p->cont, ctx);
      for (std::size_t j = p->binders.size(); j-- > 0;) {
        finish(r, p->binders[j], p);
        restore(r, p->binders[j], saved[j]);
      }
      return r;
    }
    case K::Case: {
      std::map<std::string, PTypePtr> arm_types;
      if (p->expr->kind == Expr::Kind::Name) {
        auto it = ctx.find(p->expr->name);
        if (it == ctx.end()) fail("unknown-name", "unknown name " + p->expr->name + " in " + pretty_print(p));
        auto v = unfold_all(it->second.type);
        if (v->kind != PType::Kind::Variant) {
          fail("type-mismatch", p->expr->name + " has type " + to_string(v) + ", not a variant, in " + pretty_print(p));
        }
        if (it->second.whole) {
          it->second.whole = false;
        } else if (linear_content(v)) {
          fail("linearity", "variant " + p->expr->name + " consumed more than once in " + pretty_print(p));
        }
        std::set<std::string> want, have;
        for (const auto& [l, b] : v->branches) want.insert(l);
        for (const auto& [l, a] : p->arms) have.insert(l);
        if (want != have) fail("variant-label", "case labels differ from those of " + to_string(v) + " in " + pretty_print(p));
        arm_types = std::map<std::string, PTypePtr>(v->branches.begin(), v->branches.end());
      } else if (p->expr->kind == Expr::Kind::Variant) {
        if (!p->arms.count(p->expr->name)) {
          fail("variant-label", "label " + p->expr->name + " has no branch in " + pretty_print(p));
        }
        int idx = 0;
        for (const auto& [l, a] : p->arms) arm_types[l] = typing_.binders.at({p.get(), idx++});
        send_value(p->expr->lhs, arm_types.at(p->expr->name), ctx, p);
      } else {
        fail("type-mismatch", "case on a non-variant value in " + pretty_print(p));
      }
      std::optional<Ctx> agreed;
      for (const auto& [l, a] : p->arms) {
        Ctx c = ctx;
        auto saved = save(c, a.binder);
        c[a.binder] = Slot::of(arm_types.at(l));
        auto r = check(a.body, c);
        finish(r, a.binder, p);
        restore(r, a.binder, saved);
        join(agreed, r, p);
      }
      return *agreed;
    }
    case K::Sel:
    case K::Bra:
    case K::SRes: fail("wrong-calculus", "session construct in a pi process: " + pretty_print(p));
    case K::Par: return check(p->right, check(p->left, std::move(ctx)));
    case K::Res: {
      bool inferred = !p->pi_annot;
      auto t = inferred ? typing_.restrictions.at(p.get()) : p->pi_annot;
      auto u = unfold_all(t);
      if (inferred && u->kind == PType::Kind::Chan && u->in != u->out) {
        fail("linearity", "restricted channel " + p->chan + " is only used for " +
                              (u->in == Cap::Present ? "input" : "output") + " in " + pretty_print(p));
      }
      auto saved = save(ctx, p->chan);
      ctx[p->chan] = Slot::of(t);
      auto r = check(p->cont, ctx);
      finish(r, p->chan, p);
      restore(r, p->chan, saved);
      return r;
    }
    case K::Rep: {
      auto r = check(p->cont, ctx);
      for (const auto& [x, s] : ctx) {
        if (!(r.at(x) == s)) fail("linearity", "replicated process uses linear name " + x + " in " + pretty_print(p));
      }
      return ctx;
    }
    case K::If: {
      auto c = value_type(p->expr, ctx, p);
      if (!same_shape(c, PType::base("Bool"))) fail("type-mismatch", "condition is not a Bool in " + pretty_print(p));
      std::optional<Ctx> agreed;
      join(agreed, check(p->left, ctx), p);
      join(agreed, check(p->right, ctx), p);
      return *agreed;
    }
    }
    return ctx;
  }

  static void finish(Ctx& r, const std::string& x, const ProcPtr& p) {
    auto it = r.find(x);
    if (it == r.end() || !it->second.pending()) return;
    std::string what = it->second.in ? "input capability" : it->second.out ? "output capability" : "variant value";
    fail("linearity", "the " + what + " of " + x + " : " + to_string(it->second.type) + " is never used in " +
                          pretty_print(p));
  }

private:
  const PiTyping& typing_;

  [[noreturn]] static void arity(const ProcPtr& p, const PTypePtr& t) {
    fail("type-mismatch", "payload arity differs from " + to_string(t) + " in " + pretty_print(p));
  }

  static std::optional<Slot> save(const Ctx& ctx, const std::string& x) {
    auto it = ctx.find(x);
    if (it == ctx.end()) return std::nullopt;
    return it->second;
  }

  static void restore(Ctx& ctx, const std::string& x, const std::optional<Slot>& saved) {
    if (saved) {
      ctx[x] = *saved;
    } else {
      ctx.erase(x);
    }
  }

  static Slot& lookup(Ctx& ctx, const std::string& x, const ProcPtr& p) {
    auto it = ctx.find(x);
    if (it == ctx.end()) fail("unknown-name", "unknown name " + x + " in " + pretty_print(p));
    return it->second;
  }

  // Consumes the capability of the subject and returns its unfolded type.
  static PTypePtr use(Ctx& ctx, const std::string& x, bool output, const ProcPtr& p) {
    auto& s = lookup(ctx, x, p);
    auto t = unfold_all(s.type);
    if (t->kind == PType::Kind::Shared) return t;
    if (t->kind != PType::Kind::Chan) {
      fail("type-mismatch", x + " has type " + to_string(t) + ", not a channel, in " + pretty_print(p));
    }
    bool granted = output ? t->out == Cap::Present : t->in == Cap::Present;
    bool& avail = output ? s.out : s.in;
    const char* what = output ? "output" : "input";
    if (!granted) fail("capability-missing", x + " : " + to_string(t) + " has no " + what + " capability in " + pretty_print(p));
    if (!avail) fail("linearity", "the " + std::string(what) + " capability of " + x + " is used twice in " + pretty_print(p));
    avail = false;
    return t;
  }

  static void join(std::optional<Ctx>& agreed, const Ctx& r, const ProcPtr& p) {
    if (!agreed) {
      agreed = r;
      return;
    }
    for (const auto& [x, s] : r) {
      if (!(agreed->at(x) == s)) fail("linearity", "alternatives use " + x + " differently in " + pretty_print(p));
    }
  }

  // Checks that e can travel at type want, consuming what it hands over.
  void send_value(const ExprPtr& e, const PTypePtr& want0, Ctx& ctx, const ProcPtr& p) {
    auto want = unfold_all(want0);
    if (e->kind == Expr::Kind::Variant) {
      if (want->kind != PType::Kind::Variant) {
        fail("type-mismatch", pretty_print(e) + " sent where " + to_string(want) + " is expected in " + pretty_print(p));
      }
      auto it = want->branches.find(e->name);
      if (it == want->branches.end()) {
        fail("variant-label", "label " + e->name + " is not in " + to_string(want) + " in " + pretty_print(p));
      }
      return send_value(e->lhs, it->second, ctx, p);
    }
    if (e->kind != Expr::Kind::Name) {
      auto got = value_type(e, ctx, p);
      if (!same_shape(got, want)) {
        fail("type-mismatch", pretty_print(e) + " : " + to_string(got) + " where " + to_string(want) + " is expected in " +
                                  pretty_print(p));
      }
      return;
    }
    auto& s = lookup(ctx, e->name, p);
    auto have = unfold_all(s.type);
    if (want->kind == PType::Kind::Chan) {
      if (have->kind != PType::Kind::Chan) {
        fail("type-mismatch", e->name + " : " + to_string(have) + " where " + to_string(want) + " is expected in " +
                                  pretty_print(p));
      }
      if (!want->has_capability()) return;
      if (!same_args(have, want)) {
        fail("type-mismatch", e->name + " : " + to_string(have) + " where " + to_string(want) + " is expected in " +
                                  pretty_print(p));
      }
      for (bool output : {false, true}) {
        bool needed = output ? want->out == Cap::Present : want->in == Cap::Present;
        if (!needed) continue;
        bool granted = output ? have->out == Cap::Present : have->in == Cap::Present;
        bool& avail = output ? s.out : s.in;
        const char* what = output ? "output" : "input";
        if (!granted) fail("capability-missing", e->name + " lacks the " + std::string(what) + " capability it is sent with in " + pretty_print(p));
        if (!avail) fail("linearity", "the " + std::string(what) + " capability of " + e->name + " is used twice in " + pretty_print(p));
        avail = false;
      }
      return;
    }
    if (!same_shape(have, want)) {
      fail("type-mismatch", e->name + " : " + to_string(have) + " where " + to_string(want) + " is expected in " +
                                pretty_print(p));
    }
    if (s.whole) {
      s.whole = false;
    } else if (linear_content(have)) {
      fail("linearity", e->name + " is used twice in " + pretty_print(p));
    }
  }

  static PTypePtr value_type(const ExprPtr& e, Ctx& ctx, const ProcPtr& p) {
    switch (e->kind) {
    case Expr::Kind::Name: {
      auto& s = lookup(ctx, e->name, p);
      if (s.pending() && linear_content(s.type)) {
        fail("linearity", "linear name " + e->name + " used as data in " + pretty_print(p));
      }
      return s.type;
    }
    case Expr::Kind::Unit: return PType::unit();
    case Expr::Kind::Int: return PType::base("Int");
    case Expr::Kind::Bool: return PType::base("Bool");
    case Expr::Kind::Variant: fail("type-mismatch", "variant value used as data in " + pretty_print(p));
    case Expr::Kind::Binary: {
      auto l = value_type(e->lhs, ctx, p);
      auto r = value_type(e->rhs, ctx, p);
      if (e->name == "==") {
        auto ul = unfold_all(l);
        bool ground = ul->kind == PType::Kind::Base || ul->kind == PType::Kind::Unit;
        if (!ground || !same_shape(l, r)) {
          fail("type-mismatch", "cannot compare " + to_string(l) + " with " + to_string(r) + " in " + pretty_print(p));
        }
        return PType::base("Bool");
      }
      auto i = PType::base("Int");
      if (!same_shape(l, i) || !same_shape(r, i)) {
        fail("type-mismatch", "arithmetic on " + to_string(l) + " and " + to_string(r) + " in " + pretty_print(p));
      }
      return PType::base(e->name == "<" || e->name == "<=" ? "Bool" : "Int");
    }
    }
    return PType::unit();
  }
};

} // namespace

PiTyping check_pi(const PiEnv& env, const ProcPtr& p) {
  if (uses_session_constructs(p)) fail("wrong-calculus", "not a pi process");
  for (const auto& [x, t] : env) {
    try {
      check_guarded(t);
    } catch (const UnguardedRecursion& e) {
      fail("unguarded", e.what());
    }
  }
  auto typing = Inference(env, p).result();
  Ctx ctx;
  for (const auto& [x, t] : env) ctx[x] = Slot::of(t);
  auto r = Accounting(typing).check(p, ctx);
  for (const auto& [x, s] : r) {
    if (s.pending()) {
      fail("linearity", "the capabilities of " + x + " : " + to_string(s.type) + " are not all used");
    }
  }
  for (const auto& [x, t] : env) typing.free[x] = t;
  return typing;
}

std::optional<Diagnostic> pi_diagnostic(const PiEnv& env, const ProcPtr& p) {
  try {
    check_pi(env, p);
    return std::nullopt;
  } catch (const DiagnosticError& e) {
    return e.diag;
  }
}

std::pair<PTypePtr, PTypePtr> capability_split(const PTypePtr& t) {
  auto u = unfold_all(t);
  if (u->kind != PType::Kind::Chan || u->in != Cap::Present || u->out != Cap::Present) {
    fail("not-splittable", to_string(t) + " does not carry both capabilities");
  }
  return {PType::chan(Cap::Present, Cap::Absent, u->args, u->priority),
          PType::chan(Cap::Absent, Cap::Present, u->args, u->priority)};
}

} // namespace pik

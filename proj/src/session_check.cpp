#include "pik/session_check.hpp"

#include <functional>

#include "pik/duality.hpp"
#include "pik/inference.hpp"
#include "pik/printer.hpp"

namespace pik {

namespace {

struct Slot {
  STypePtr type;
  bool consumed = false;
};
using Ctx = std::map<std::string, Slot>;

bool same_type(const STypePtr& a, const STypePtr& b) { return session_tree_equal(a, b); }

bool open_obligation(const Slot& s) { return !s.consumed && is_linear(s.type); }

class Checker {
public:
  explicit Checker(std::map<const Proc*, STypePtr> annotations) : annotations_(std::move(annotations)) {}

  Ctx check(const ProcPtr& p, Ctx ctx) {
    using K = Proc::Kind;
    switch (p->kind) {
    case K::Nil: return ctx;
    case K::Out: {
      auto t = subject(ctx, p->chan, p);
      if (t->kind == SType::Kind::Shared) {
        expect_value(p->args.at(0), t->payload, ctx, p);
        return check(p->cont, ctx);
      }
      if (t->kind != SType::Kind::Send) mismatch(p, p->chan + " has type " + to_string(t) + ", which does not send");
      expect_value(p->args.at(0), t->payload, ctx, p);
      ctx[p->chan] = Slot{t->cont, false};
      return finish(check(p->cont, ctx), p->chan, p);
    }
    case K::In: {
      auto t = subject(ctx, p->chan, p);
      const auto& y = p->binders.at(0);
      STypePtr payload;
      bool linear_subject = t->kind != SType::Kind::Shared;
      if (t->kind == SType::Kind::Shared) {
        payload = t->payload;
      } else if (t->kind == SType::Kind::Recv) {
        payload = t->payload;
        ctx[p->chan] = Slot{t->cont, false};
      } else {
        mismatch(p, p->chan + " has type " + to_string(t) + ", which does not receive");
      }
      auto saved = save(ctx, y);
      ctx[y] = Slot{payload, false};
      auto r = finish(check(p->cont, ctx), y, p);
      restore(r, y, saved);
      return linear_subject ? finish(std::move(r), p->chan, p) : r;
    }
    case K::Sel: {
      auto t = subject(ctx, p->chan, p);
      if (t->kind != SType::Kind::Select) mismatch(p, p->chan + " has type " + to_string(t) + ", which does not select");
      auto it = t->branches.find(p->label);
      if (it == t->branches.end()) {
        fail("variant-label", "label " + p->label + " is not among the choices of " + to_string(t) + " in " + pretty_print(p));
      }
      ctx[p->chan] = Slot{it->second, false};
      return finish(check(p->cont, ctx), p->chan, p);
    }
    case K::Bra: {
      auto t = subject(ctx, p->chan, p);
      if (t->kind != SType::Kind::Branch) mismatch(p, p->chan + " has type " + to_string(t) + ", which does not branch");
      std::set<std::string> offered, expected;
      for (const auto& [l, a] : p->arms) offered.insert(l);
      for (const auto& [l, s] : t->branches) expected.insert(l);
      if (offered != expected) {
        fail("variant-label", "branches offered by the process differ from those of " + to_string(t) + " in " + pretty_print(p));
      }
      std::optional<Ctx> agreed;
      for (const auto& [l, a] : p->arms) {
        Ctx c = ctx;
        c[p->chan] = Slot{t->branches.at(l), false};
        auto r = finish(check(a.body, c), p->chan, p);
        join(agreed, r, p);
      }
      return *agreed;
    }
    case K::Case: fail("wrong-calculus", "case is not a session process");
    case K::Par: return check(p->right, check(p->left, std::move(ctx)));
    case K::SRes: {
      auto t = annotation(p);
      if (!t->is_session()) mismatch(p, "session restriction at non-session type " + to_string(t));
      auto sx = save(ctx, p->chan), sy = save(ctx, p->chan2);
      ctx[p->chan] = Slot{t, false};
      ctx[p->chan2] = Slot{complement(t), false};
      auto r = check(p->cont, ctx);
      r = finish(std::move(r), p->chan, p);
      r = finish(std::move(r), p->chan2, p);
      restore(r, p->chan2, sy);
      restore(r, p->chan, sx);
      return r;
    }
    case K::Res: {
      auto t = annotation(p);
      if (t->kind != SType::Kind::Shared) mismatch(p, "channel restriction at type " + to_string(t) + ", expected #T");
      auto sx = save(ctx, p->chan);
      ctx[p->chan] = Slot{t, false};
      auto r = check(p->cont, ctx);
      restore(r, p->chan, sx);
      return r;
    }
    case K::Rep: {
      auto r = check(p->cont, ctx);
      for (const auto& [x, s] : ctx) {
        if (open_obligation(s) && r.at(x).consumed) {
          fail("linearity", "replicated process uses linear name " + x + " in " + pretty_print(p));
        }
      }
      return ctx;
    }
    case K::If: {
      expect_value(p->expr, SType::base("Bool"), ctx, p);
      std::optional<Ctx> agreed;
      join(agreed, check(p->left, ctx), p);
      join(agreed, check(p->right, ctx), p);
      return *agreed;
    }
    }
    return ctx;
  }

private:
  std::map<const Proc*, STypePtr> annotations_;

  [[noreturn]] static void mismatch(const ProcPtr& p, const std::string& why) {
    fail("type-mismatch", why + " in " + pretty_print(p));
  }

  STypePtr annotation(const ProcPtr& p) {
    if (p->session_annot) return p->session_annot;
    auto it = annotations_.find(p.get());
    if (it == annotations_.end()) fail("type-mismatch", "no type for restriction in " + pretty_print(p));
    return it->second;
  }

  static Slot& lookup(Ctx& ctx, const std::string& x, const ProcPtr& p) {
    auto it = ctx.find(x);
    if (it == ctx.end()) fail("unknown-name", "unknown name " + x + " in " + pretty_print(p));
    if (it->second.consumed) fail("linearity", "linear name " + x + " used more than once in " + pretty_print(p));
    return it->second;
  }

  static STypePtr subject(Ctx& ctx, const std::string& x, const ProcPtr& p) {
    return unfold_all(lookup(ctx, x, p).type);
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

  // The name's remaining protocol must be complete; afterwards it is spent.
  static Ctx finish(Ctx r, const std::string& x, const ProcPtr& p) {
    auto it = r.find(x);
    if (it == r.end()) return r;
    if (open_obligation(it->second)) {
      fail("linearity", x + " is left at type " + to_string(it->second.type) + " in " + pretty_print(p));
    }
    if (it->second.type->is_session()) it->second.consumed = true;
    return r;
  }

  static void join(std::optional<Ctx>& agreed, const Ctx& r, const ProcPtr& p) {
    if (!agreed) {
      agreed = r;
      return;
    }
    for (const auto& [x, s] : r) {
      const auto& o = agreed->at(x);
      bool same = s.consumed == o.consumed && (s.consumed || same_type(s.type, o.type));
      if (!same && (open_obligation(s) || open_obligation(o))) {
        fail("linearity", "alternatives use " + x + " differently in " + pretty_print(p));
      }
    }
  }

  STypePtr value_type(const ExprPtr& e, Ctx& ctx, const ProcPtr& p) {
    switch (e->kind) {
    case Expr::Kind::Name: {
      auto& s = lookup(ctx, e->name, p);
      if (is_linear(s.type)) s.consumed = true;
      return s.type;
    }
    case Expr::Kind::Unit: return SType::unit();
    case Expr::Kind::Int: return SType::base("Int");
    case Expr::Kind::Bool: return SType::base("Bool");
    case Expr::Kind::Variant: fail("wrong-calculus", "variant value in a session process");
    case Expr::Kind::Binary: {
      auto l = value_type(e->lhs, ctx, p);
      auto r = value_type(e->rhs, ctx, p);
      auto is = [](const STypePtr& t, const char* n) { return t->kind == SType::Kind::Base && t->name == n; };
      if (e->name == "==") {
        if (l->is_session() || !same_type(l, r)) mismatch(p, "cannot compare " + to_string(l) + " with " + to_string(r));
        return SType::base("Bool");
      }
      if (!is(l, "Int") || !is(r, "Int")) mismatch(p, "arithmetic on " + to_string(l) + " and " + to_string(r));
      return SType::base(e->name == "<" || e->name == "<=" ? "Bool" : "Int");
    }
    }
    return SType::unit();
  }

  void expect_value(const ExprPtr& e, const STypePtr& want, Ctx& ctx, const ProcPtr& p) {
    auto got = value_type(e, ctx, p);
    if (!same_type(got, want)) {
      mismatch(p, pretty_print(e) + " has type " + to_string(got) + " where " + to_string(want) + " is expected");
    }
  }
};

bool needs_inference(const ProcPtr& p) {
  if (!p) return false;
  if ((p->kind == Proc::Kind::SRes || p->kind == Proc::Kind::Res) && !p->session_annot) return true;
  if (needs_inference(p->cont) || needs_inference(p->left) || needs_inference(p->right)) return true;
  for (const auto& [l, a] : p->arms) {
    if (needs_inference(a.body)) return true;
  }
  return false;
}

} // namespace

void check_session(const SessionEnv& env, const ProcPtr& p) {
  if (uses_pi_constructs(p)) fail("wrong-calculus", "not a session process");
  for (const auto& [x, t] : env) {
    try {
      check_guarded(t);
    } catch (const UnguardedRecursion& e) {
      fail("unguarded", e.what());
    }
  }
  std::map<const Proc*, STypePtr> annotations;
  if (needs_inference(p)) {
    try {
      annotations = infer_session_types(p, env).annotations;
    } catch (const DiagnosticError& e) {
      if (e.diag.code != "unify" && e.diag.code != "occurs-check") throw;
      bool at_restriction = e.diag.message.find(" at new ") != std::string::npos ||
                            e.diag.message.find(" at duality") != std::string::npos;
      bool label = e.diag.message.find("variant label") != std::string::npos;
      fail(label ? "variant-label" : at_restriction ? "duality-mismatch" : "type-mismatch",
           "no session types fit: " + e.diag.message);
    }
  }
  Ctx ctx;
  for (const auto& [x, t] : env) ctx[x] = Slot{t, false};
  auto r = Checker(std::move(annotations)).check(p, ctx);
  for (const auto& [x, s] : r) {
    if (open_obligation(s)) fail("linearity", x + " is never used to completion (left at " + to_string(s.type) + ")");
  }
}

std::optional<Diagnostic> session_diagnostic(const SessionEnv& env, const ProcPtr& p) {
  try {
    check_session(env, p);
    return std::nullopt;
  } catch (const DiagnosticError& e) {
    return e.diag;
  }
}

SplitResult split_env(const SessionEnv& env, const std::set<std::string>& demand_left,
                      const std::set<std::string>& demand_right) {
  SplitResult r;
  for (const auto& [x, t] : env) {
    if (!is_linear(t)) {
      r.left[x] = t;
      r.right[x] = t;
      continue;
    }
    bool l = demand_left.count(x), rr = demand_right.count(x);
    if (l && rr) fail("linear-overlap", "linear name " + x + " demanded by both sides");
    (l ? r.left : r.right)[x] = t;
  }
  return r;
}

} // namespace pik

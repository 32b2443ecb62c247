#include "pik/inference.hpp"

#include <functional>

#include "pik/diagnostic.hpp"
#include "pik/encoder.hpp"
#include "pik/printer.hpp"

namespace pik {

Constraint Constraint::type_eq(TermPtr a, TermPtr b, std::string origin) {
  Constraint c;
  c.kind = Kind::TypeEq;
  c.a = std::move(a);
  c.b = std::move(b);
  c.origin = std::move(origin);
  return c;
}

Constraint Constraint::cap_eq(CapTerm a, CapTerm b, std::string origin) {
  Constraint c;
  c.kind = Kind::CapEq;
  c.ca = a;
  c.cb = b;
  c.origin = std::move(origin);
  return c;
}

ConstraintSet dual_constraint(const TermPtr& a, const TermPtr& b) {
  if (a->kind != Term::Kind::Chan || b->kind != Term::Kind::Chan) {
    throw std::invalid_argument("dual_constraint expects two channel terms");
  }
  return {Constraint::cap_eq(a->in, b->out, "duality"), Constraint::cap_eq(a->out, b->in, "duality"),
          Constraint::type_eq(a->payload, b->payload, "duality")};
}

void unify(Unifier& u, const ConstraintSet& cs) {
  for (const auto& c : cs) {
    try {
      if (c.kind == Constraint::Kind::TypeEq) {
        u.unify(c.a, c.b);
      } else {
        u.unify_cap(c.ca, c.cb);
      }
    } catch (const UnifyError& e) {
      std::string where = c.origin.empty() ? "" : " at " + c.origin;
      fail(e.kind == UnifyError::Kind::OccursCheck ? "occurs-check" : "unify", e.what() + where);
    }
  }
}

bool satisfied(const Unifier& u, const ConstraintSet& cs) {
  for (const auto& c : cs) {
    bool ok = c.kind == Constraint::Kind::TypeEq ? u.same(c.a, c.b) : u.same_cap(c.ca, c.cb);
    if (!ok) return false;
  }
  return true;
}

// ============================================================================
// Constraint generation
// ============================================================================

namespace {

struct Entry {
  TermPtr t;
  bool shared = false;
};
using Env = std::map<std::string, Entry>;

class Generator {
public:
  Generator(Unifier& u, ConstraintProblem& out) : u_(u), out_(out) {}

  void walk(const ProcPtr& p, Env env) {
    using K = Proc::Kind;
    switch (p->kind) {
    case K::Nil: return;
    case K::Out: {
      auto origin = pretty_print(p);
      auto& x = lookup(env, p->chan);
      auto tv = expr(p->args.at(0), env, origin);
      if (x.shared) {
        eq(x.t, u_.shared(u_.tuple({tv})), origin);
        return walk(p->cont, env);
      }
      auto sigma = u_.fresh_chan();
      eq(x.t, u_.chan(absent(), present(), u_.tuple({tv, dual_of(sigma)})), origin);
      env[p->chan] = Entry{sigma, false};
      return walk(p->cont, env);
    }
    case K::In: {
      auto origin = pretty_print(p);
      auto& x = lookup(env, p->chan);
      auto ty = u_.meta();
      const auto& y = p->binders.at(0);
      if (x.shared) {
        eq(x.t, u_.shared(u_.tuple({ty})), origin);
      } else {
        auto sigma = u_.fresh_chan();
        eq(x.t, u_.chan(present(), absent(), u_.tuple({ty, sigma})), origin);
        env[p->chan] = Entry{sigma, false};
      }
      env[y] = Entry{ty, false};
      return walk(p->cont, env);
    }
    case K::Sel: {
      auto origin = p->chan + " <| " + p->label;
      auto& x = lookup(env, p->chan);
      if (x.shared) fail("type-mismatch", "selection on shared channel " + p->chan);
      auto sigma = u_.fresh_chan();
      eq(x.t, u_.chan(absent(), present(), u_.tuple({u_.variant({{p->label, dual_of(sigma)}}, true)})), origin);
      env[p->chan] = Entry{sigma, false};
      return walk(p->cont, env);
    }
    case K::Bra: {
      auto origin = p->chan + " |> {...}";
      auto& x = lookup(env, p->chan);
      if (x.shared) fail("type-mismatch", "branching on shared channel " + p->chan);
      std::map<std::string, TermPtr> fields;
      std::map<std::string, TermPtr> conts;
      for (const auto& [l, a] : p->arms) {
        conts[l] = u_.fresh_chan();
        fields[l] = conts[l];
      }
      eq(x.t, u_.chan(present(), absent(), u_.tuple({u_.variant(fields, false)})), origin);
      for (const auto& [l, a] : p->arms) {
        Env inner = env;
        inner[p->chan] = Entry{conts[l], false};
        walk(a.body, inner);
      }
      return;
    }
    case K::Case: fail("wrong-calculus", "case is not a session process");
    case K::Par:
      walk(p->left, env);
      walk(p->right, env);
      return;
    case K::SRes: {
      auto tx = u_.fresh_chan();
      auto ty = u_.fresh_chan();
      for (auto c : dual_constraint(tx, ty)) {
        c.origin = "new " + p->chan + " " + p->chan2;
        out_.constraints.push_back(c);
      }
      if (p->session_annot) {
        if (!p->session_annot->is_session()) {
          fail("type-mismatch", "session restriction annotated with non-session type " + to_string(p->session_annot));
        }
        eq(tx, u_.from_type(encode_type(p->session_annot)), "annotation of " + p->chan);
      }
      out_.ends[p.get()] = {tx, ty};
      env[p->chan] = Entry{tx, false};
      env[p->chan2] = Entry{ty, false};
      return walk(p->cont, env);
    }
    case K::Res: {
      auto t = u_.shared(u_.tuple({u_.meta()}));
      if (p->session_annot) {
        if (p->session_annot->kind != SType::Kind::Shared) {
          fail("type-mismatch", "channel restriction annotated with " + to_string(p->session_annot) + ", expected #T");
        }
        eq(t, u_.from_type(encode_type(p->session_annot)), "annotation of " + p->chan);
      }
      out_.shared[p.get()] = t;
      env[p->chan] = Entry{t, true};
      return walk(p->cont, env);
    }
    case K::Rep: return walk(p->cont, env);
    case K::If: {
      auto c = expr(p->expr, env, "if " + pretty_print(p->expr));
      eq(c, u_.base("Bool"), "if " + pretty_print(p->expr));
      walk(p->left, env);
      walk(p->right, env);
      return;
    }
    }
  }

private:
  Unifier& u_;
  ConstraintProblem& out_;

  static CapTerm present() { return CapTerm::constant(Cap::Present); }
  static CapTerm absent() { return CapTerm::constant(Cap::Absent); }

  TermPtr dual_of(const TermPtr& chan) { return u_.chan(chan->out, chan->in, chan->payload); }

  void eq(const TermPtr& a, const TermPtr& b, const std::string& origin) {
    out_.constraints.push_back(Constraint::type_eq(a, b, origin));
  }

  Entry& lookup(Env& env, const std::string& x) {
    auto it = env.find(x);
    if (it == env.end()) fail("unknown-name", "unknown name " + x);
    return it->second;
  }

  TermPtr expr(const ExprPtr& e, Env& env, const std::string& origin) {
    switch (e->kind) {
    case Expr::Kind::Name: return lookup(env, e->name).t;
    case Expr::Kind::Unit: return u_.unit();
    case Expr::Kind::Int: return u_.base("Int");
    case Expr::Kind::Bool: return u_.base("Bool");
    case Expr::Kind::Variant: fail("wrong-calculus", "variant value in a session process");
    case Expr::Kind::Binary: {
      auto l = expr(e->lhs, env, origin);
      auto r = expr(e->rhs, env, origin);
      if (e->name == "==") {
        eq(l, r, origin);
        return u_.base("Bool");
      }
      eq(l, u_.base("Int"), origin);
      eq(r, u_.base("Int"), origin);
      return u_.base(e->name == "<" || e->name == "<=" ? "Bool" : "Int");
    }
    }
    return u_.unit();
  }
};

} // namespace

ConstraintProblem gen_constraints(Unifier& u, const ProcPtr& p, const SessionEnv& env) {
  ConstraintProblem out;
  Env start;
  for (const auto& x : free_names(p)) {
    auto it = env.find(x);
    if (it == env.end()) {
      start[x] = Entry{u.meta(), false};
    } else {
      start[x] = Entry{u.from_type(encode_type(it->second)), it->second->kind == SType::Kind::Shared};
    }
    out.free[x] = start[x].t;
  }
  Generator(u, out).walk(p, start);
  return out;
}

// ============================================================================
// Decoding
// ============================================================================

namespace {

class Decoder {
public:
  STypePtr session(const PTypePtr& t, bool neg) {
    auto u = unfold_all(t);
    if (u->kind != PType::Kind::Chan) {
      fail("not-decodable", to_string(t) + " is not the encoding of a session type");
    }
    if (u->is_empty_chan()) return SType::end();
    bool recursive = t->kind == PType::Kind::Rec || has_rec(u);
    std::string key = (neg ? "-" : "+") + to_string(t);
    if (recursive) {
      if (auto it = open_.find(key); it != open_.end()) {
        it->second.second = true;
        return SType::var(it->second.first);
      }
      if (open_.size() > 4096) fail("not-decodable", "decoding does not converge");
      open_[key] = {"X" + std::to_string(counter_++), false};
    }
    auto body = structural(u, neg);
    if (!recursive) return body;
    auto [var, used] = open_[key];
    open_.erase(key);
    return used ? SType::rec(var, body) : body;
  }

  STypePtr payload(const PTypePtr& t) {
    auto u = unfold_all(t);
    switch (u->kind) {
    case PType::Kind::Unit: return SType::unit();
    case PType::Kind::Base: return SType::base(u->name);
    case PType::Kind::Shared:
      if (u->args.size() != 1) fail("not-decodable", to_string(t) + " has no session counterpart");
      return SType::shared(payload(u->args[0]));
    case PType::Kind::Chan: return session(t, false);
    default: fail("not-decodable", to_string(t) + " has no session counterpart");
    }
  }

private:
  std::map<std::string, std::pair<std::string, bool>> open_;
  int counter_ = 0;

  static bool has_rec(const PTypePtr& t) {
    if (!t) return false;
    if (t->kind == PType::Kind::Rec || t->kind == PType::Kind::Var) return true;
    for (const auto& a : t->args) {
      if (has_rec(a)) return true;
    }
    for (const auto& [l, b] : t->branches) {
      if (has_rec(b)) return true;
    }
    return false;
  }

  STypePtr structural(const PTypePtr& u, bool neg) {
    bool in = u->in == Cap::Present;
    if (u->in == Cap::Present && u->out == Cap::Present) {
      fail("not-decodable", to_string(u) + " carries both capabilities");
    }
    if (u->args.size() == 2) {
      auto p = payload(u->args[0]);
      if (in) return neg ? SType::send(p, session(u->args[1], true)) : SType::recv(p, session(u->args[1], false));
      return neg ? SType::recv(p, session(u->args[1], false)) : SType::send(p, session(u->args[1], true));
    }
    if (u->args.size() == 1) {
      auto v = unfold_all(u->args[0]);
      if (v->kind != PType::Kind::Variant) fail("not-decodable", to_string(u) + " has a single non-variant payload");
      // Branching when (input, not negated) or (output, negated).
      bool branching = in != neg;
      SBranches bs;
      for (const auto& [l, c] : v->branches) {
        auto cu = unfold_all(c);
        if (cu->kind == PType::Kind::Tuple) {
          if (cu->args.size() != 2) fail("not-decodable", to_string(c) + " is not a (payload, continuation) pair");
          auto p = payload(cu->args[0]);
          bs[l] = branching ? SType::recv(p, session(cu->args[1], false)) : SType::send(p, session(cu->args[1], true));
        } else {
          bs[l] = session(c, !branching);
        }
      }
      return branching ? SType::branch(std::move(bs)) : SType::select(std::move(bs));
    }
    fail("not-decodable", to_string(u) + " has payload arity " + std::to_string(u->args.size()));
  }
};

} // namespace

STypePtr decode_type(const PTypePtr& t) { return Decoder().payload(t); }

// ============================================================================
// Inference
// ============================================================================

InferenceResult infer_session_types(const ProcPtr& p, const SessionEnv& env, bool recursive_types) {
  Unifier u(recursive_types);
  auto problem = gen_constraints(u, p, env);
  unify(u, problem.constraints);

  InferenceResult r;
  auto add = [&](const std::string& x, const TermPtr& t) {
    auto name = x;
    for (int k = 2; r.env.count(name); ++k) name = x + "#" + std::to_string(k);
    auto enc = u.to_type(t);
    r.encoded[name] = enc;
    r.env[name] = decode_type(enc);
  };
  for (const auto& [x, t] : problem.free) add(x, t);
  std::function<void(const ProcPtr&)> visit = [&](const ProcPtr& q) {
    if (!q) return;
    if (q->kind == Proc::Kind::SRes) {
      const auto& [tx, ty] = problem.ends.at(q.get());
      add(q->chan, tx);
      add(q->chan2, ty);
      r.annotations[q.get()] = decode_type(u.to_type(tx));
    } else if (q->kind == Proc::Kind::Res) {
      const auto& t = problem.shared.at(q.get());
      add(q->chan, t);
      r.annotations[q.get()] = decode_type(u.to_type(t));
    }
    visit(q->cont);
    visit(q->left);
    visit(q->right);
    for (const auto& [l, a] : q->arms) visit(a.body);
  };
  visit(p);
  return r;
}

ProcPtr annotate_process(const ProcPtr& p, const std::map<const Proc*, STypePtr>& annotations) {
  if (!p) return p;
  auto q = std::make_shared<Proc>(*p);
  auto it = annotations.find(p.get());
  if (it != annotations.end() && !p->session_annot) q->session_annot = it->second;
  q->cont = annotate_process(p->cont, annotations);
  q->left = annotate_process(p->left, annotations);
  q->right = annotate_process(p->right, annotations);
  for (auto& [l, a] : q->arms) a.body = annotate_process(a.body, annotations);
  return q;
}

} // namespace pik

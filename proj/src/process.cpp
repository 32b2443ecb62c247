#include "pik/process.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <stdexcept>

namespace pik {

// ============================================================================
// Expressions
// ============================================================================

namespace {

std::shared_ptr<Expr> enode(Expr::Kind k) {
  auto n = std::make_shared<Expr>();
  n->kind = k;
  return n;
}

std::shared_ptr<Proc> pnode(Proc::Kind k) {
  auto n = std::make_shared<Proc>();
  n->kind = k;
  return n;
}

} // namespace

ExprPtr Expr::make_name(std::string n) {
  auto e = enode(Kind::Name);
  e->name = std::move(n);
  return e;
}

ExprPtr Expr::unit() { return enode(Kind::Unit); }

ExprPtr Expr::integer(long long v) {
  auto e = enode(Kind::Int);
  e->value = v;
  return e;
}

ExprPtr Expr::boolean(bool b) {
  auto e = enode(Kind::Bool);
  e->flag = b;
  return e;
}

ExprPtr Expr::variant(std::string label, ExprPtr payload) {
  auto e = enode(Kind::Variant);
  e->name = std::move(label);
  e->lhs = std::move(payload);
  return e;
}

ExprPtr Expr::binary(std::string op, ExprPtr lhs, ExprPtr rhs) {
  auto e = enode(Kind::Binary);
  e->name = std::move(op);
  e->lhs = std::move(lhs);
  e->rhs = std::move(rhs);
  return e;
}

std::set<std::string> free_names(const ExprPtr& e) {
  std::set<std::string> out;
  std::function<void(const ExprPtr&)> go = [&](const ExprPtr& x) {
    if (!x) return;
    if (x->kind == Expr::Kind::Name) out.insert(x->name);
    go(x->lhs);
    go(x->rhs);
  };
  go(e);
  return out;
}

ExprPtr substitute(const ExprPtr& e, const ExprPtr& v, const std::string& x) {
  switch (e->kind) {
  case Expr::Kind::Name: return e->name == x ? v : e;
  case Expr::Kind::Variant: return Expr::variant(e->name, substitute(e->lhs, v, x));
  case Expr::Kind::Binary: return Expr::binary(e->name, substitute(e->lhs, v, x), substitute(e->rhs, v, x));
  default: return e;
  }
}

ExprPtr evaluate(const ExprPtr& e) {
  using K = Expr::Kind;
  if (e->kind == K::Variant) return Expr::variant(e->name, evaluate(e->lhs));
  if (e->kind != K::Binary) return e;
  auto l = evaluate(e->lhs);
  auto r = evaluate(e->rhs);
  const auto& op = e->name;
  if (l->kind == K::Int && r->kind == K::Int) {
    if (op == "+") return Expr::integer(l->value + r->value);
    if (op == "-") return Expr::integer(l->value - r->value);
    if (op == "*") return Expr::integer(l->value * r->value);
    if (op == "==") return Expr::boolean(l->value == r->value);
    if (op == "<") return Expr::boolean(l->value < r->value);
    if (op == "<=") return Expr::boolean(l->value <= r->value);
  }
  if (op == "==" && l->is_ground() && r->is_ground() && l->kind == r->kind) {
    return Expr::boolean(equal(l, r));
  }
  return Expr::binary(op, l, r);
}

bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
  case Expr::Kind::Name: return a->name == b->name;
  case Expr::Kind::Unit: return true;
  case Expr::Kind::Int: return a->value == b->value;
  case Expr::Kind::Bool: return a->flag == b->flag;
  case Expr::Kind::Variant: return a->name == b->name && equal(a->lhs, b->lhs);
  case Expr::Kind::Binary: return a->name == b->name && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
  }
  return false;
}

// ============================================================================
// Process constructors
// ============================================================================

ProcPtr Proc::nil() {
  static const ProcPtr zero = pnode(Kind::Nil);
  return zero;
}

ProcPtr Proc::out(std::string chan, std::vector<ExprPtr> args, ProcPtr cont) {
  auto p = pnode(Kind::Out);
  p->chan = std::move(chan);
  p->args = std::move(args);
  p->cont = std::move(cont);
  return p;
}

ProcPtr Proc::in(std::string chan, std::vector<std::string> binders, ProcPtr cont) {
  for (std::size_t i = 0; i < binders.size(); ++i) {
    for (std::size_t j = i + 1; j < binders.size(); ++j) {
      if (binders[i] == binders[j]) throw std::invalid_argument("duplicate input binder " + binders[i]);
    }
  }
  auto p = pnode(Kind::In);
  p->chan = std::move(chan);
  p->binders = std::move(binders);
  p->cont = std::move(cont);
  return p;
}

ProcPtr Proc::sel(std::string chan, std::string label, ProcPtr cont) {
  auto p = pnode(Kind::Sel);
  p->chan = std::move(chan);
  p->label = std::move(label);
  p->cont = std::move(cont);
  return p;
}

ProcPtr Proc::bra(std::string chan, Arms arms) {
  if (arms.empty()) throw std::invalid_argument("branching needs at least one label");
  auto p = pnode(Kind::Bra);
  p->chan = std::move(chan);
  p->arms = std::move(arms);
  return p;
}

ProcPtr Proc::case_of(ExprPtr scrutinee, Arms arms) {
  if (arms.empty()) throw std::invalid_argument("case needs at least one label");
  auto p = pnode(Kind::Case);
  p->expr = std::move(scrutinee);
  p->arms = std::move(arms);
  return p;
}

ProcPtr Proc::par(ProcPtr l, ProcPtr r) {
  auto p = pnode(Kind::Par);
  p->left = std::move(l);
  p->right = std::move(r);
  return p;
}

ProcPtr Proc::sres(std::string x, std::string y, ProcPtr body, STypePtr annot) {
  if (x == y) throw std::invalid_argument("session restriction needs two distinct endpoints");
  auto p = pnode(Kind::SRes);
  p->chan = std::move(x);
  p->chan2 = std::move(y);
  p->cont = std::move(body);
  p->session_annot = std::move(annot);
  return p;
}

ProcPtr Proc::res(std::string x, ProcPtr body, STypePtr session_annot, PTypePtr pi_annot) {
  auto p = pnode(Kind::Res);
  p->chan = std::move(x);
  p->cont = std::move(body);
  p->session_annot = std::move(session_annot);
  p->pi_annot = std::move(pi_annot);
  return p;
}

ProcPtr Proc::rep(ProcPtr body) {
  auto p = pnode(Kind::Rep);
  p->cont = std::move(body);
  return p;
}

ProcPtr Proc::cond(ExprPtr c, ProcPtr then_branch, ProcPtr else_branch) {
  auto p = pnode(Kind::If);
  p->expr = std::move(c);
  p->left = std::move(then_branch);
  p->right = std::move(else_branch);
  return p;
}

ProcPtr par_all(const std::vector<ProcPtr>& ps) {
  if (ps.empty()) return Proc::nil();
  ProcPtr acc = ps.front();
  for (std::size_t i = 1; i < ps.size(); ++i) acc = Proc::par(acc, ps[i]);
  return acc;
}

namespace {

bool any_node(const ProcPtr& p, const std::function<bool(const Proc&)>& pred) {
  if (!p) return false;
  if (pred(*p)) return true;
  if (any_node(p->cont, pred) || any_node(p->left, pred) || any_node(p->right, pred)) return true;
  for (const auto& [l, a] : p->arms) {
    if (any_node(a.body, pred)) return true;
  }
  return false;
}

bool expr_has_variant(const ExprPtr& e) {
  if (!e) return false;
  return e->kind == Expr::Kind::Variant || expr_has_variant(e->lhs) || expr_has_variant(e->rhs);
}

} // namespace

bool uses_session_constructs(const ProcPtr& p) {
  return any_node(p, [](const Proc& n) {
    return n.kind == Proc::Kind::Sel || n.kind == Proc::Kind::Bra || n.kind == Proc::Kind::SRes;
  });
}

bool uses_pi_constructs(const ProcPtr& p) {
  return any_node(p, [](const Proc& n) {
    if (n.kind == Proc::Kind::Case || n.pi_annot) return true;
    if (n.kind == Proc::Kind::Out) {
      if (n.args.size() != 1) return true;
      for (const auto& a : n.args) {
        if (expr_has_variant(a)) return true;
      }
    }
    return n.kind == Proc::Kind::In && n.binders.size() != 1;
  });
}

// ============================================================================
// Names
// ============================================================================

namespace {

void collect_free(const ProcPtr& p, std::set<std::string>& out) {
  using K = Proc::Kind;
  auto minus = [](std::set<std::string> s, std::initializer_list<std::string> xs) {
    for (const auto& x : xs) s.erase(x);
    return s;
  };
  switch (p->kind) {
  case K::Nil: break;
  case K::Out:
    out.insert(p->chan);
    for (const auto& a : p->args) {
      auto f = free_names(a);
      out.insert(f.begin(), f.end());
    }
    collect_free(p->cont, out);
    break;
  case K::In: {
    out.insert(p->chan);
    std::set<std::string> inner;
    collect_free(p->cont, inner);
    for (const auto& b : p->binders) inner.erase(b);
    out.insert(inner.begin(), inner.end());
    break;
  }
  case K::Sel:
    out.insert(p->chan);
    collect_free(p->cont, out);
    break;
  case K::Bra:
    out.insert(p->chan);
    for (const auto& [l, a] : p->arms) collect_free(a.body, out);
    break;
  case K::Case: {
    auto f = free_names(p->expr);
    out.insert(f.begin(), f.end());
    for (const auto& [l, a] : p->arms) {
      std::set<std::string> inner;
      collect_free(a.body, inner);
      inner.erase(a.binder);
      out.insert(inner.begin(), inner.end());
    }
    break;
  }
  case K::Par:
    collect_free(p->left, out);
    collect_free(p->right, out);
    break;
  case K::SRes: {
    std::set<std::string> inner;
    collect_free(p->cont, inner);
    inner = minus(std::move(inner), {p->chan, p->chan2});
    out.insert(inner.begin(), inner.end());
    break;
  }
  case K::Res: {
    std::set<std::string> inner;
    collect_free(p->cont, inner);
    inner.erase(p->chan);
    out.insert(inner.begin(), inner.end());
    break;
  }
  case K::Rep: collect_free(p->cont, out); break;
  case K::If: {
    auto f = free_names(p->expr);
    out.insert(f.begin(), f.end());
    collect_free(p->left, out);
    collect_free(p->right, out);
    break;
  }
  }
}

void collect_bound(const ProcPtr& p, std::set<std::string>& out) {
  if (!p) return;
  using K = Proc::Kind;
  if (p->kind == K::In) out.insert(p->binders.begin(), p->binders.end());
  if (p->kind == K::Res) out.insert(p->chan);
  if (p->kind == K::SRes) {
    out.insert(p->chan);
    out.insert(p->chan2);
  }
  for (const auto& [l, a] : p->arms) {
    if (!a.binder.empty()) out.insert(a.binder);
    collect_bound(a.body, out);
  }
  collect_bound(p->cont, out);
  collect_bound(p->left, out);
  collect_bound(p->right, out);
}

} // namespace

std::set<std::string> free_names(const ProcPtr& p) {
  std::set<std::string> out;
  collect_free(p, out);
  return out;
}

std::set<std::string> bound_names(const ProcPtr& p) {
  std::set<std::string> out;
  collect_bound(p, out);
  return out;
}

std::set<std::string> all_names(const ProcPtr& p) {
  auto out = free_names(p);
  collect_bound(p, out);
  return out;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  std::string stem = base;
  while (!stem.empty() && (std::isdigit(static_cast<unsigned char>(stem.back())) || stem.back() == '\'')) {
    stem.pop_back();
  }
  if (stem.empty()) stem = "n";
  if (!avoid.count(stem)) return stem;
  for (int i = 1;; ++i) {
    std::string c = stem + std::to_string(i);
    if (!avoid.count(c)) return c;
  }
}

// ============================================================================
// Substitution
// ============================================================================

namespace {

// Renames binder `b` away from `danger` when needed; returns the new name and
// the (possibly renamed) scope body.
std::pair<std::string, ProcPtr> freshen(const std::string& b, const ProcPtr& body, const std::set<std::string>& danger,
                                        std::set<std::string> avoid) {
  if (!danger.count(b)) return {b, body};
  auto names = all_names(body);
  avoid.insert(names.begin(), names.end());
  avoid.insert(danger.begin(), danger.end());
  auto nb = fresh_name(b, avoid);
  return {nb, substitute(body, Expr::make_name(nb), b)};
}

std::string subst_subject(const std::string& chan, const ExprPtr& v, const std::string& x) {
  if (chan != x) return chan;
  if (!v->is_name()) throw std::invalid_argument("cannot substitute a non-name value for channel " + x);
  return v->name;
}

} // namespace

ProcPtr substitute(const ProcPtr& p, const ExprPtr& v, const std::string& x) {
  if (!free_names(p).count(x)) return p;
  using K = Proc::Kind;
  const auto danger = free_names(v);
  switch (p->kind) {
  case K::Nil: return p;
  case K::Out: {
    std::vector<ExprPtr> args;
    for (const auto& a : p->args) args.push_back(substitute(a, v, x));
    return Proc::out(subst_subject(p->chan, v, x), std::move(args), substitute(p->cont, v, x));
  }
  case K::In: {
    auto chan = subst_subject(p->chan, v, x);
    if (std::find(p->binders.begin(), p->binders.end(), x) != p->binders.end()) {
      return Proc::in(chan, p->binders, p->cont);
    }
    std::vector<std::string> bs;
    ProcPtr body = p->cont;
    std::set<std::string> avoid(p->binders.begin(), p->binders.end());
    avoid.insert(x);
    for (const auto& b : p->binders) {
      auto [nb, nbody] = freshen(b, body, danger, avoid);
      avoid.insert(nb);
      bs.push_back(nb);
      body = nbody;
    }
    return Proc::in(chan, std::move(bs), substitute(body, v, x));
  }
  case K::Sel: return Proc::sel(subst_subject(p->chan, v, x), p->label, substitute(p->cont, v, x));
  case K::Bra: {
    Arms arms;
    for (const auto& [l, a] : p->arms) arms[l] = Arm{"", substitute(a.body, v, x)};
    return Proc::bra(subst_subject(p->chan, v, x), std::move(arms));
  }
  case K::Case: {
    Arms arms;
    for (const auto& [l, a] : p->arms) {
      if (a.binder == x) {
        arms[l] = a;
        continue;
      }
      auto [nb, nbody] = freshen(a.binder, a.body, danger, {x});
      arms[l] = Arm{nb, substitute(nbody, v, x)};
    }
    return Proc::case_of(substitute(p->expr, v, x), std::move(arms));
  }
  case K::Par: return Proc::par(substitute(p->left, v, x), substitute(p->right, v, x));
  case K::SRes: {
    if (p->chan == x || p->chan2 == x) return p;
    auto [nx, b1] = freshen(p->chan, p->cont, danger, {x, p->chan2});
    auto [ny, b2] = freshen(p->chan2, b1, danger, {x, nx});
    return Proc::sres(nx, ny, substitute(b2, v, x), p->session_annot);
  }
  case K::Res: {
    if (p->chan == x) return p;
    auto [nx, body] = freshen(p->chan, p->cont, danger, {x});
    return Proc::res(nx, substitute(body, v, x), p->session_annot, p->pi_annot);
  }
  case K::Rep: return Proc::rep(substitute(p->cont, v, x));
  case K::If:
    return Proc::cond(substitute(p->expr, v, x), substitute(p->left, v, x), substitute(p->right, v, x));
  }
  return p;
}

ProcPtr substitute_all(const ProcPtr& p, const std::vector<ExprPtr>& vs, const std::vector<std::string>& xs) {
  if (vs.size() != xs.size()) throw std::invalid_argument("substitute_all: arity mismatch");
  // Route through placeholders so that substitutions cannot interfere.
  auto avoid = all_names(p);
  for (const auto& v : vs) {
    auto f = free_names(v);
    avoid.insert(f.begin(), f.end());
  }
  avoid.insert(xs.begin(), xs.end());
  ProcPtr cur = p;
  std::vector<std::string> tmp;
  for (const auto& x : xs) {
    auto t = fresh_name("tmp", avoid);
    avoid.insert(t);
    tmp.push_back(t);
    cur = substitute(cur, Expr::make_name(t), x);
  }
  for (std::size_t i = 0; i < vs.size(); ++i) cur = substitute(cur, vs[i], tmp[i]);
  return cur;
}

// ============================================================================
// Canonical keys: alpha-equivalence and structural congruence
// ============================================================================

namespace {

using Env = std::map<std::string, std::string>;

std::string lookup(const Env& env, const std::string& n) {
  auto it = env.find(n);
  return it == env.end() ? n : it->second;
}

std::string expr_key(const ExprPtr& e, const Env& env) {
  switch (e->kind) {
  case Expr::Kind::Name: return lookup(env, e->name);
  case Expr::Kind::Unit: return "*";
  case Expr::Kind::Int: return std::to_string(e->value);
  case Expr::Kind::Bool: return e->flag ? "true" : "false";
  case Expr::Kind::Variant: return e->name + "(" + expr_key(e->lhs, env) + ")";
  case Expr::Kind::Binary: return "(" + e->name + " " + expr_key(e->lhs, env) + " " + expr_key(e->rhs, env) + ")";
  }
  return "";
}

// Placeholders "?<n>" stand for restricted names whose canonical number is
// not decided yet.
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string mask_placeholders(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.push_back(s[i]);
    if (s[i] == '?' && i + 1 < s.size() && is_digit(s[i + 1])) {
      while (i + 1 < s.size() && is_digit(s[i + 1])) ++i;
    }
  }
  return out;
}

// Placeholder ids in order of first occurrence.
std::vector<int> placeholder_order(const std::string& s) {
  std::vector<int> out;
  std::set<int> seen;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '?' && i + 1 < s.size() && is_digit(s[i + 1])) {
      std::size_t j = i + 1;
      int v = 0;
      while (j < s.size() && is_digit(s[j])) v = v * 10 + (s[j++] - '0');
      if (seen.insert(v).second) out.push_back(v);
      i = j - 1;
    }
  }
  return out;
}

std::string replace_placeholders(const std::string& s, const std::map<int, std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '?' && i + 1 < s.size() && is_digit(s[i + 1])) {
      std::size_t j = i + 1;
      int v = 0;
      while (j < s.size() && is_digit(s[j])) v = v * 10 + (s[j++] - '0');
      auto it = names.find(v);
      out += it == names.end() ? s.substr(i, j - i) : it->second;
      i = j - 1;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

bool mentions(const std::string& s, int ph) {
  auto tok = "?" + std::to_string(ph);
  for (std::size_t pos = s.find(tok); pos != std::string::npos; pos = s.find(tok, pos + 1)) {
    std::size_t end = pos + tok.size();
    if (end >= s.size() || !is_digit(s[end])) return true;
  }
  return false;
}

class Canonicalizer {
public:
  Canonicalizer(bool congruence, bool rep_unfold) : congruence_(congruence), rep_unfold_(rep_unfold) {}

  std::string scope(const ProcPtr& p, const Env& env, int level) {
    return congruence_ ? scope_congruent(p, env, level) : scope_structural(p, env, level);
  }

private:
  bool congruence_;
  bool rep_unfold_;
  int next_placeholder_ = 0;

  std::string scope_structural(const ProcPtr& p, const Env& env, int level) {
    using K = Proc::Kind;
    switch (p->kind) {
    case K::Nil: return "0";
    case K::Par: return "(" + scope(p->left, env, level) + "|" + scope(p->right, env, level) + ")";
    case K::Res: {
      Env e = env;
      e[p->chan] = "$" + std::to_string(level);
      return "nu " + e[p->chan] + "." + scope(p->cont, e, level + 1);
    }
    case K::SRes: {
      Env e = env;
      e[p->chan] = "$" + std::to_string(level);
      e[p->chan2] = "$" + std::to_string(level + 1);
      return "nu " + e[p->chan] + " " + e[p->chan2] + "." + scope(p->cont, e, level + 2);
    }
    default: return thread(p, env, level);
    }
  }

  std::string thread(const ProcPtr& p, const Env& env, int level) {
    using K = Proc::Kind;
    switch (p->kind) {
    case K::Out: {
      std::string s = "O " + lookup(env, p->chan) + "<";
      for (std::size_t i = 0; i < p->args.size(); ++i) s += (i ? "," : "") + expr_key(p->args[i], env);
      return s + ">." + scope(p->cont, env, level);
    }
    case K::In: {
      Env e = env;
      std::string s = "I " + lookup(env, p->chan) + "(";
      int l = level;
      for (std::size_t i = 0; i < p->binders.size(); ++i) {
        e[p->binders[i]] = "$" + std::to_string(l++);
        s += (i ? "," : "") + e[p->binders[i]];
      }
      return s + ")." + scope(p->cont, e, l);
    }
    case K::Sel: return "S " + lookup(env, p->chan) + " " + p->label + "." + scope(p->cont, env, level);
    case K::Bra: {
      std::string s = "B " + lookup(env, p->chan) + "{";
      for (const auto& [l, a] : p->arms) s += l + ":" + scope(a.body, env, level) + ";";
      return s + "}";
    }
    case K::Case: {
      std::string s = "C " + expr_key(p->expr, env) + "{";
      for (const auto& [l, a] : p->arms) {
        Env e = env;
        e[a.binder] = "$" + std::to_string(level);
        s += l + "(" + e[a.binder] + "):" + scope(a.body, e, level + 1) + ";";
      }
      return s + "}";
    }
    case K::Rep: return "*[" + scope(p->cont, env, level) + "]";
    case K::If:
      return "F " + expr_key(p->expr, env) + "?" + scope(p->left, env, level) + ":" + scope(p->right, env, level);
    default: return scope(p, env, level);
    }
  }

  struct Placeholder {
    int id;
    int partner; // -1 unless one endpoint of a session restriction
  };

  void collect(const ProcPtr& p, const Env& env, std::vector<std::pair<ProcPtr, Env>>& threads,
               std::vector<Placeholder>& binders) {
    using K = Proc::Kind;
    switch (p->kind) {
    case K::Nil: return;
    case K::Par:
      collect(p->left, env, threads, binders);
      collect(p->right, env, threads, binders);
      return;
    case K::Res: {
      Env e = env;
      int id = next_placeholder_++;
      e[p->chan] = "?" + std::to_string(id);
      binders.push_back({id, -1});
      collect(p->cont, e, threads, binders);
      return;
    }
    case K::SRes: {
      Env e = env;
      int a = next_placeholder_++;
      int b = next_placeholder_++;
      e[p->chan] = "?" + std::to_string(a);
      e[p->chan2] = "?" + std::to_string(b);
      binders.push_back({a, b});
      binders.push_back({b, a});
      collect(p->cont, e, threads, binders);
      return;
    }
    default: threads.emplace_back(p, env); return;
    }
  }

  std::string scope_congruent(const ProcPtr& p, const Env& env, int level) {
    std::vector<std::pair<ProcPtr, Env>> raw;
    std::vector<Placeholder> binders;
    collect(p, env, raw, binders);

    std::vector<std::string> threads;
    for (const auto& [t, e] : raw) threads.push_back(thread(t, e, level));

    if (rep_unfold_) absorb_replicated_copies(threads);

    // Unused restrictions disappear; a session pair stays if either end is used.
    std::vector<Placeholder> live;
    for (const auto& b : binders) {
      auto used = [&](int id) {
        return std::any_of(threads.begin(), threads.end(), [&](const std::string& s) { return mentions(s, id); });
      };
      if (used(b.id) || (b.partner >= 0 && used(b.partner))) live.push_back(b);
    }

    std::sort(threads.begin(), threads.end(), [](const std::string& a, const std::string& b) {
      auto ma = mask_placeholders(a), mb = mask_placeholders(b);
      return ma != mb ? ma < mb : a < b;
    });

    if (live.empty()) {
      if (threads.empty()) return "0";
      if (threads.size() == 1) return threads.front();
      return "[" + join(threads) + "]";
    }

    // Threads with equal masked text may be permuted; pick the smallest result.
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    for (std::size_t i = 0; i < threads.size();) {
      std::size_t j = i;
      auto m = mask_placeholders(threads[i]);
      while (j < threads.size() && mask_placeholders(threads[j]) == m) ++j;
      if (j - i > 1) groups.emplace_back(i, j);
      i = j;
    }
    double combos = 1;
    for (const auto& [a, b] : groups) {
      for (std::size_t k = 2; k <= b - a; ++k) combos *= static_cast<double>(k);
    }

    std::string best;
    bool have = false;
    auto consider = [&](const std::vector<std::string>& order) {
      auto s = render(order, live, level);
      if (!have || s < best) {
        best = s;
        have = true;
      }
    };
    if (groups.empty() || combos > 720) {
      consider(threads);
    } else {
      std::vector<std::string> order = threads;
      permute_groups(order, groups, 0, consider);
    }
    return best;
  }

  void permute_groups(std::vector<std::string>& order, const std::vector<std::pair<std::size_t, std::size_t>>& groups,
                      std::size_t g, const std::function<void(const std::vector<std::string>&)>& consider) {
    if (g == groups.size()) {
      consider(order);
      return;
    }
    auto [a, b] = groups[g];
    std::sort(order.begin() + a, order.begin() + b);
    do {
      permute_groups(order, groups, g + 1, consider);
    } while (std::next_permutation(order.begin() + a, order.begin() + b));
  }

  std::string render(const std::vector<std::string>& order, const std::vector<Placeholder>& live, int level) {
    std::map<int, int> partner;
    std::set<int> mine;
    for (const auto& b : live) {
      partner[b.id] = b.partner;
      mine.insert(b.id);
    }
    std::map<int, std::string> names;
    std::string kinds;
    int next = 0;
    std::string joined = join(order);
    for (int id : placeholder_order(joined)) {
      if (!mine.count(id) || names.count(id)) continue;
      std::string base = "%" + std::to_string(level) + "." + std::to_string(next++);
      if (partner[id] >= 0) {
        names[id] = base + "a";
        names[partner[id]] = base + "b";
        kinds += 'p';
      } else {
        names[id] = base;
        kinds += 's';
      }
    }
    return "nu{" + kinds + "}[" + replace_placeholders(joined, names) + "]";
  }

  static std::string join(const std::vector<std::string>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "|" : "") + xs[i];
    return s;
  }

  static void absorb_replicated_copies(std::vector<std::string>& threads) {
    std::set<std::string> bodies;
    for (const auto& s : threads) {
      if (s.size() > 3 && s.rfind("*[", 0) == 0 && s.back() == ']') bodies.insert(s.substr(2, s.size() - 3));
    }
    if (bodies.empty()) return;
    threads.erase(std::remove_if(threads.begin(), threads.end(), [&](const std::string& s) { return bodies.count(s); }),
                  threads.end());
  }
};

} // namespace

std::string alpha_key(const ProcPtr& p) {
  Canonicalizer c(false, false);
  return c.scope(p, {}, 0);
}

bool alpha_equiv(const ProcPtr& p, const ProcPtr& q) { return alpha_key(p) == alpha_key(q); }

std::string congruence_key(const ProcPtr& p, bool replication_unfolding) {
  Canonicalizer c(true, replication_unfolding);
  return c.scope(p, {}, 0);
}

bool struct_congruent(const ProcPtr& p, const ProcPtr& q) {
  bool pi = !uses_session_constructs(p) && !uses_session_constructs(q);
  return congruence_key(p, pi) == congruence_key(q, pi);
}

// ============================================================================
// Configurations
// ============================================================================

Config flatten(const ProcPtr& p) {
  Config c;
  auto used = free_names(p);
  auto avoid = all_names(p);
  std::function<void(const ProcPtr&)> walk = [&](const ProcPtr& q) {
    using K = Proc::Kind;
    auto pick = [&](const std::string& x, ProcPtr body, std::string& out) {
      if (used.count(x)) {
        out = fresh_name(x, avoid);
        body = substitute(body, Expr::make_name(out), x);
      } else {
        out = x;
      }
      used.insert(out);
      avoid.insert(out);
      return body;
    };
    switch (q->kind) {
    case K::Nil: return;
    case K::Par:
      walk(q->left);
      walk(q->right);
      return;
    case K::Res: {
      Binder b;
      auto body = pick(q->chan, q->cont, b.x);
      b.session_annot = q->session_annot;
      b.pi_annot = q->pi_annot;
      c.binders.push_back(b);
      walk(body);
      return;
    }
    case K::SRes: {
      Binder b;
      auto body = pick(q->chan, q->cont, b.x);
      body = pick(q->chan2, body, b.y);
      b.session_annot = q->session_annot;
      c.binders.push_back(b);
      walk(body);
      return;
    }
    default: c.threads.push_back(q); return;
    }
  };
  walk(p);

  std::set<std::string> live;
  for (const auto& t : c.threads) {
    auto f = free_names(t);
    live.insert(f.begin(), f.end());
  }
  std::vector<Binder> kept;
  for (const auto& b : c.binders) {
    if (live.count(b.x) || (b.is_session() && live.count(b.y))) kept.push_back(b);
  }
  c.binders = std::move(kept);
  return c;
}

ProcPtr rebuild(const Config& c) {
  ProcPtr body = par_all(c.threads);
  for (auto it = c.binders.rbegin(); it != c.binders.rend(); ++it) {
    body = it->is_session() ? Proc::sres(it->x, it->y, body, it->session_annot)
                            : Proc::res(it->x, body, it->session_annot, it->pi_annot);
  }
  return body;
}

} // namespace pik

#include "pik/deadlock.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>

#include "pik/encoder.hpp"
#include "pik/linear_check.hpp"
#include "pik/reduction.hpp"

namespace pik {

// ============================================================================
// Constraints
// ============================================================================

int PriorityConstraintSet::fresh(const std::string& name) {
  var_names.push_back(name);
  return static_cast<int>(var_names.size()) - 1;
}

void PriorityConstraintSet::less(PriorityTerm a, PriorityTerm b, std::string origin) {
  constraints.push_back({a, b, true, std::move(origin)});
}

void PriorityConstraintSet::equal(PriorityTerm a, PriorityTerm b, std::string origin) {
  if (a == b) return;
  constraints.push_back({a, b, false, std::move(origin)});
}

std::string PriorityConstraintSet::name(const PriorityTerm& t) const {
  if (!t.is_var()) return std::to_string(t.offset);
  std::string s = var_names.at(t.var);
  if (t.offset > 0) s += "+" + std::to_string(t.offset);
  if (t.offset < 0) s += std::to_string(t.offset);
  return s;
}

std::string PriorityConstraintSet::describe(const PriorityConstraint& c) const {
  return name(c.lhs) + (c.strict ? " < " : " = ") + name(c.rhs);
}

long long PrioritySolution::value(const PriorityTerm& t) const {
  if (!t.is_var()) return t.offset;
  auto it = assignment.find(t.var);
  return (it == assignment.end() ? 0 : it->second) + t.offset;
}

bool PrioritySolution::satisfies(const PriorityConstraint& c) const {
  auto a = value(c.lhs), b = value(c.rhs);
  return c.strict ? a < b : a == b;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

} // namespace

PrioritySolution solve(const PriorityConstraintSet& cs) {
  const int nvars = static_cast<int>(cs.var_names.size());
  const int zero = nvars; // node standing for the constant 0
  UnionFind uf(nvars + 1);
  std::vector<int> merged; // plain equalities folded by union-find
  for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
    const auto& c = cs.constraints[i];
    if (!c.strict && c.lhs.is_var() && c.rhs.is_var() && c.lhs.offset == c.rhs.offset) {
      uf.unite(c.lhs.var, c.rhs.var);
      merged.push_back(static_cast<int>(i));
    }
  }

  // Edge u -> v with weight w means value(v) >= value(u) + w.
  struct Edge {
    int from, to;
    long long weight;
    int constraint;
    bool forward = true;
  };
  std::vector<Edge> edges;
  auto node = [&](const PriorityTerm& t) { return t.is_var() ? uf.find(t.var) : uf.find(zero); };
  for (std::size_t i = 0; i < cs.constraints.size(); ++i) {
    const auto& c = cs.constraints[i];
    int a = node(c.lhs), b = node(c.rhs);
    long long d = c.lhs.offset - c.rhs.offset;
    if (c.strict) {
      edges.push_back({a, b, d + 1, static_cast<int>(i), true});
    } else if (!(c.lhs.is_var() && c.rhs.is_var() && c.lhs.offset == c.rhs.offset)) {
      edges.push_back({a, b, d, static_cast<int>(i), true});
      edges.push_back({b, a, -d, static_cast<int>(i), false});
    }
  }

  const int n = nvars + 1;
  std::vector<long long> dist(n, 0);
  std::vector<int> pred(n, -1);
  int last = -1;
  for (int round = 0; round <= n; ++round) {
    last = -1;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto& ed = edges[e];
      if (dist[ed.from] + ed.weight > dist[ed.to]) {
        dist[ed.to] = dist[ed.from] + ed.weight;
        pred[ed.to] = static_cast<int>(e);
        last = ed.to;
      }
    }
    if (last < 0) break;
  }

  PrioritySolution sol;
  if (last >= 0) {
    sol.satisfiable = false;
    int v = last;
    for (int i = 0; i < n; ++i) v = edges[pred[v]].from;
    std::vector<int> cycle_edges;
    int u = v;
    do {
      cycle_edges.push_back(pred[u]);
      u = edges[pred[u]].from;
    } while (u != v);
    std::reverse(cycle_edges.begin(), cycle_edges.end());
    // Joins two variables of one merged class by a path of plain equalities.
    auto equality_path = [&](int from, int to) {
      std::vector<int> out;
      if (from < 0 || to < 0 || from == to) return out;
      std::map<int, int> via; // variable -> constraint that reached it
      std::vector<int> queue = {from};
      via[from] = -1;
      for (std::size_t q = 0; q < queue.size() && !via.count(to); ++q) {
        int x = queue[q];
        for (int i : merged) {
          const auto& c = cs.constraints[i];
          int y = c.lhs.var == x ? c.rhs.var : c.rhs.var == x ? c.lhs.var : -1;
          if (y >= 0 && !via.count(y)) {
            via[y] = i;
            queue.push_back(y);
          }
        }
      }
      for (int x = to; via.count(x) && via[x] >= 0;) {
        const auto& c = cs.constraints[via[x]];
        out.push_back(via[x]);
        x = c.lhs.var == x ? c.rhs.var : c.lhs.var;
      }
      std::reverse(out.begin(), out.end());
      return out;
    };
    auto entry = [&](int e) {
      const auto& c = cs.constraints[edges[e].constraint];
      return edges[e].forward ? c.lhs.var : c.rhs.var;
    };
    auto exit = [&](int e) {
      const auto& c = cs.constraints[edges[e].constraint];
      return edges[e].forward ? c.rhs.var : c.lhs.var;
    };
    for (std::size_t k = 0; k < cycle_edges.size(); ++k) {
      int e = cycle_edges[k];
      sol.cycle.push_back(cs.constraints[edges[e].constraint]);
      int next = cycle_edges[(k + 1) % cycle_edges.size()];
      for (int i : equality_path(exit(e), entry(next))) sol.cycle.push_back(cs.constraints[i]);
    }
    return sol;
  }

  bool pinned = std::any_of(edges.begin(), edges.end(),
                            [&](const Edge& e) { return e.from == uf.find(zero) || e.to == uf.find(zero); });
  long long base = 0;
  if (pinned) {
    base = dist[uf.find(zero)];
  } else if (nvars > 0) {
    base = dist[uf.find(0)];
    for (int v = 0; v < nvars; ++v) base = std::min(base, dist[uf.find(v)]);
  }
  for (int v = 0; v < nvars; ++v) sol.assignment[v] = dist[uf.find(v)] - base;
  return sol;
}

// ============================================================================
// Priority inference
// ============================================================================

namespace {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// A type whose linear channel positions carry priorities. Payloads are
/// built on first access, so recursive types unfold only as far as used.
struct Node {
  PTypePtr shape;
  bool linear = false;
  PriorityTerm prio;
  bool materialized = false;
  std::vector<NodePtr> args;
  std::map<std::string, NodePtr> branches;
  std::string hint;
};

struct Server {
  NodePtr channel;
  std::map<std::string, NodePtr> scope;
  int first_var = 0;
  int end_var = 0;
};

struct Site {
  NodePtr channel;
  std::vector<ExprPtr> args;
  std::map<std::string, NodePtr> scope;
};

class Analyzer {
public:
  Analyzer(const PiTyping& typing, DeadlockOptions opts) : typing_(typing), opts_(opts) {}

  PriorityConstraintSet cs;
  std::vector<std::pair<std::string, NodePtr>> named;
  std::map<int, std::set<std::string>> var_channels;

  void analyse(const ProcPtr& p, const PiEnv& env) {
    std::map<std::string, NodePtr> scope;
    for (const auto& [x, t] : env) scope[x] = bind(x, make(t, x));
    walk(p, scope);
    instantiate_sites();
  }

private:
  const PiTyping& typing_;
  DeadlockOptions opts_;
  std::map<const Node*, std::vector<Server>> servers_;
  std::vector<Site> sites_;

  NodePtr make(const PTypePtr& t, const std::string& hint) {
    auto n = std::make_shared<Node>();
    n->shape = unfold_all(t);
    n->hint = hint;
    if (n->shape->has_capability()) {
      n->linear = true;
      n->prio = n->shape->priority ? PriorityTerm::constant(*n->shape->priority) : PriorityTerm::variable(cs.fresh(hint));
    }
    return n;
  }

  NodePtr bind(const std::string& x, const NodePtr& n) {
    if (n->linear && n->prio.is_var()) {
      var_channels[n->prio.var].insert(x);
      auto& nm = cs.var_names[n->prio.var];
      if (nm.find('.') != std::string::npos) nm = x;
    }
    named.emplace_back(x, n);
    return n;
  }

  void materialize(Node& n) {
    if (n.materialized) return;
    n.materialized = true;
    const auto& s = n.shape;
    for (std::size_t i = 0; i < s->args.size(); ++i) n.args.push_back(make(s->args[i], n.hint + "." + std::to_string(i)));
    for (const auto& [l, b] : s->branches) n.branches[l] = make(b, n.hint + "." + l);
  }

  NodePtr arg(const NodePtr& n, std::size_t i) {
    materialize(*n);
    if (i >= n->args.size()) return make(PType::unit(), n->hint);
    return n->args[i];
  }

  NodePtr branch(const NodePtr& n, const std::string& l) {
    materialize(*n);
    auto it = n->branches.find(l);
    if (it == n->branches.end()) return make(PType::unit(), n->hint);
    return it->second;
  }

  static NodePtr lookup(const std::map<std::string, NodePtr>& scope, const std::string& x) {
    auto it = scope.find(x);
    if (it == scope.end()) fail("unknown-name", "unknown name " + x);
    return it->second;
  }

  void equate(const NodePtr& a, const NodePtr& b, const std::string& origin,
              std::set<std::pair<const Node*, const Node*>>& seen) {
    if (a == b || !seen.insert({a.get(), b.get()}).second) return;
    if (a->linear && b->linear) cs.equal(a->prio, b->prio, origin);
    if (a->shape->kind != b->shape->kind) return;
    if (a->materialized && b->materialized) {
      if (a->args.size() == b->args.size()) {
        for (std::size_t i = 0; i < a->args.size(); ++i) equate(a->args[i], b->args[i], origin, seen);
      }
      for (const auto& [l, x] : a->branches) {
        auto it = b->branches.find(l);
        if (it != b->branches.end()) equate(x, it->second, origin, seen);
      }
      return;
    }
    // An unbuilt payload carries no constraints yet, so it can share the other.
    Node& from = a->materialized ? *a : *b;
    Node& to = a->materialized ? *b : *a;
    materialize(from);
    if (from.args.size() != to.shape->args.size() || from.branches.size() != to.shape->branches.size()) return;
    to.args = from.args;
    to.branches = from.branches;
    to.materialized = true;
  }

  void equate(const NodePtr& a, const NodePtr& b, const std::string& origin) {
    std::set<std::pair<const Node*, const Node*>> seen;
    equate(a, b, origin, seen);
  }

  void link_value(const ExprPtr& e, const NodePtr& slot, const std::map<std::string, NodePtr>& scope,
                  const std::string& origin) {
    if (e->kind == Expr::Kind::Name) {
      equate(lookup(scope, e->name), slot, origin);
    } else if (e->kind == Expr::Kind::Variant) {
      link_value(e->lhs, branch(slot, e->name), scope, origin);
    }
  }

  void linear_values(const ExprPtr& e, const std::map<std::string, NodePtr>& scope, std::vector<NodePtr>& out) {
    if (!e) return;
    if (e->kind == Expr::Kind::Name) {
      auto n = lookup(scope, e->name);
      if (n->linear) out.push_back(n);
    }
    if (e->kind == Expr::Kind::Variant) linear_values(e->lhs, scope, out);
  }

  // Returns the priorities of the first actions of p.
  std::vector<PriorityTerm> walk(const ProcPtr& p, std::map<std::string, NodePtr> scope) {
    using K = Proc::Kind;
    std::vector<PriorityTerm> tops;
    auto blocks = [&](const NodePtr& x, const std::vector<PriorityTerm>& later, const std::string& what) {
      for (const auto& t : later) cs.less(x->prio, t, what);
    };
    switch (p->kind) {
    case K::Nil: return tops;
    case K::Out: {
      auto x = lookup(scope, p->chan);
      auto later = walk(p->cont, scope);
      if (x->shape->kind == PType::Kind::Shared) {
        sites_.push_back({x, p->args, scope});
        return later;
      }
      for (std::size_t i = 0; i < p->args.size(); ++i) link_value(p->args[i], arg(x, i), scope, "payload of " + p->chan);
      if (!x->linear) return later;
      blocks(x, later, "output on " + p->chan + " blocks");
      std::vector<NodePtr> sent;
      for (const auto& a : p->args) linear_values(a, scope, sent);
      for (const auto& v : sent) cs.less(x->prio, v->prio, "channel sent on " + p->chan);
      return {x->prio};
    }
    case K::In: {
      auto x = lookup(scope, p->chan);
      for (std::size_t j = 0; j < p->binders.size(); ++j) scope[p->binders[j]] = bind(p->binders[j], arg(x, j));
      auto later = walk(p->cont, scope);
      if (!x->linear) return later;
      blocks(x, later, "input on " + p->chan + " blocks");
      return {x->prio};
    }
    case K::Case: {
      std::vector<NodePtr> payload;
      int idx = 0;
      for (const auto& [l, a] : p->arms) {
        NodePtr n;
        if (p->expr->kind == Expr::Kind::Name) {
          n = branch(lookup(scope, p->expr->name), l);
        } else if (p->expr->kind == Expr::Kind::Variant && p->expr->name == l && p->expr->lhs->kind == Expr::Kind::Name) {
          n = lookup(scope, p->expr->lhs->name);
        } else {
          auto it = typing_.binders.find({p.get(), idx});
          n = make(it == typing_.binders.end() ? PType::unit() : it->second, a.binder);
        }
        payload.push_back(n);
        ++idx;
      }
      idx = 0;
      for (const auto& [l, a] : p->arms) {
        auto inner = scope;
        inner[a.binder] = bind(a.binder, payload[idx++]);
        auto t = walk(a.body, inner);
        tops.insert(tops.end(), t.begin(), t.end());
      }
      return tops;
    }
    case K::Par:
    case K::If: {
      tops = walk(p->left, scope);
      auto r = walk(p->right, scope);
      tops.insert(tops.end(), r.begin(), r.end());
      return tops;
    }
    case K::Res: {
      auto it = typing_.restrictions.find(p.get());
      PTypePtr t = p->pi_annot ? p->pi_annot : it != typing_.restrictions.end() ? it->second : PType::empty();
      scope[p->chan] = bind(p->chan, make(t, p->chan));
      return walk(p->cont, scope);
    }
    case K::Rep: {
      const auto& body = p->cont;
      if (body->kind == K::In) {
        auto a = lookup(scope, body->chan);
        if (a->shape->kind == PType::Kind::Shared) {
          Server s{a, scope, static_cast<int>(cs.var_names.size()), 0};
          walk(body, scope);
          s.end_var = static_cast<int>(cs.var_names.size());
          servers_[a.get()].push_back(std::move(s));
          return tops;
        }
      }
      walk(body, scope);
      return tops;
    }
    case K::Sel:
    case K::Bra:
    case K::SRes: fail("wrong-calculus", "session construct in a pi process");
    }
    return tops;
  }

  // ----- polymorphic instantiation of replicated inputs -----

  static void collect_vars(const NodePtr& n, std::set<int>& out, std::set<const Node*>& seen) {
    if (!n || !seen.insert(n.get()).second) return;
    if (n->linear && n->prio.is_var()) out.insert(n->prio.var);
    for (const auto& a : n->args) collect_vars(a, out, seen);
    for (const auto& [l, b] : n->branches) collect_vars(b, out, seen);
  }

  std::set<int> generalizable(const Server& s) {
    std::set<int> g, ambient;
    std::set<const Node*> seen;
    for (const auto& a : s.channel->args) collect_vars(a, g, seen);
    for (int v = s.first_var; v < s.end_var; ++v) g.insert(v);
    std::set<const Node*> seen2{s.channel.get()};
    for (const auto& [x, n] : s.scope) {
      if (n != s.channel) collect_vars(n, ambient, seen2);
    }
    for (int v : ambient) g.erase(v);
    return g;
  }

  void instantiate_equate(const NodePtr& caller, const NodePtr& slot, const std::function<PriorityTerm(PriorityTerm)>& rho,
                          const std::string& origin, std::set<std::pair<const Node*, const Node*>>& seen) {
    if (!seen.insert({caller.get(), slot.get()}).second) return;
    if (caller->linear && slot->linear) cs.equal(caller->prio, rho(slot->prio), origin);
    if (!slot->materialized || caller->shape->kind != slot->shape->kind) return;
    materialize(*caller);
    if (caller->args.size() == slot->args.size()) {
      for (std::size_t i = 0; i < slot->args.size(); ++i) instantiate_equate(caller->args[i], slot->args[i], rho, origin, seen);
    }
    for (const auto& [l, b] : slot->branches) {
      auto it = caller->branches.find(l);
      if (it != caller->branches.end()) instantiate_equate(it->second, b, rho, origin, seen);
    }
  }

  void instantiate_value(const ExprPtr& e, const NodePtr& slot, const std::map<std::string, NodePtr>& scope,
                         const std::function<PriorityTerm(PriorityTerm)>& rho, const std::string& origin) {
    if (e->kind == Expr::Kind::Name) {
      std::set<std::pair<const Node*, const Node*>> seen;
      instantiate_equate(lookup(scope, e->name), slot, rho, origin, seen);
    } else if (e->kind == Expr::Kind::Variant && slot->materialized) {
      auto it = slot->branches.find(e->name);
      if (it != slot->branches.end()) instantiate_value(e->lhs, it->second, scope, rho, origin);
    }
  }

  void instantiate_sites() {
    const auto body_constraints = cs.constraints;
    for (const auto& site : sites_) {
      auto it = servers_.find(site.channel.get());
      std::string origin = "request on " + site.channel->hint;
      if (!opts_.polymorphic || it == servers_.end()) {
        for (std::size_t i = 0; i < site.args.size(); ++i) link_value(site.args[i], arg(site.channel, i), site.scope, origin);
        continue;
      }
      auto g = generalizable(it->second.front());
      std::map<int, int> fresh;
      std::function<PriorityTerm(PriorityTerm)> rho = [&](PriorityTerm t) {
        if (!t.is_var() || !g.count(t.var)) return t;
        auto f = fresh.find(t.var);
        if (f == fresh.end()) f = fresh.emplace(t.var, cs.fresh(cs.var_names[t.var] + "'")).first;
        return PriorityTerm::variable(f->second, t.offset);
      };
      for (const auto& c : body_constraints) {
        bool mentions = (c.lhs.is_var() && g.count(c.lhs.var)) || (c.rhs.is_var() && g.count(c.rhs.var));
        if (mentions) cs.constraints.push_back({rho(c.lhs), rho(c.rhs), c.strict, c.origin + " (instance)"});
      }
      for (std::size_t i = 0; i < site.args.size(); ++i) {
        instantiate_value(site.args[i], arg(site.channel, i), site.scope, rho, origin);
      }
    }
  }
};

DeadlockReport analyse(const ProcPtr& p, const PiEnv& env, DeadlockOptions opts,
                       const std::map<std::string, std::string>& origins) {
  auto typing = check_pi(env, p);
  Analyzer a(typing, opts);
  a.analyse(p, env);
  DeadlockReport r;
  auto rename = [&](const std::string& x) {
    auto it = origins.find(x);
    return it == origins.end() ? x : it->second;
  };
  for (auto& nm : a.cs.var_names) nm = rename(nm);
  r.constraints = a.cs;
  r.solution = solve(r.constraints);
  r.ok = r.solution.satisfiable;
  if (r.ok) {
    for (const auto& [x, n] : a.named) {
      if (n->linear) r.priorities[rename(x)] = r.solution.value(n->prio);
    }
    return r;
  }
  for (const auto& c : r.solution.cycle) {
    r.cycle.push_back(r.constraints.describe(c));
    for (const auto& t : {c.lhs, c.rhs}) {
      if (!t.is_var()) continue;
      r.channels.insert(r.constraints.var_names[t.var]);
      for (const auto& x : a.var_channels[t.var]) r.channels.insert(rename(x));
    }
  }
  return r;
}

} // namespace

Diagnostic DeadlockReport::diagnostic() const {
  std::string msg = "priority constraints form a cycle:";
  for (const auto& c : cycle) msg += " " + c + ";";
  if (!msg.empty() && msg.back() == ';') msg.pop_back();
  return make_diagnostic("deadlock", msg);
}

DeadlockReport infer_priorities(const ProcPtr& p, const PiEnv& env, DeadlockOptions opts) {
  return analyse(p, env, opts, {});
}

DeadlockReport check_deadlock_session(const ProcPtr& p, const SessionEnv& env, DeadlockOptions opts) {
  std::set<std::string> fv = free_names(p);
  for (const auto& [x, t] : env) fv.insert(x);
  auto f = RenamingFunction::identity(fv);
  FreshNameSupply supply;
  auto q = encode_process(p, f, supply);
  return analyse(q, encode_env(env, f), opts, supply.origins());
}

std::optional<ProcPtr> find_stuck_state(const ProcPtr& p, Calculus c, int max_states) {
  std::set<std::string> seen;
  std::deque<ProcPtr> todo{p};
  while (!todo.empty() && static_cast<int>(seen.size()) < max_states) {
    auto s = todo.front();
    todo.pop_front();
    if (!seen.insert(congruence_key(s, false)).second) continue;
    auto rs = redexes(s, c);
    if (rs.empty()) {
      auto cfg = flatten(s);
      std::set<std::string> bound;
      for (const auto& b : cfg.binders) {
        bound.insert(b.x);
        if (b.is_session()) bound.insert(b.y);
      }
      for (const auto& t : cfg.threads) {
        if (t->is_prefix() && bound.count(t->chan)) return s;
      }
      continue;
    }
    for (const auto& r : rs) {
      try {
        todo.push_back(step(s, r));
      } catch (const DiagnosticError&) {
        return s;
      }
    }
  }
  return std::nullopt;
}

} // namespace pik

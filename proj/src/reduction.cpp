#include "pik/reduction.hpp"

#include <deque>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "pik/diagnostic.hpp"
#include "pik/printer.hpp"
#include "pik/session_check.hpp"

namespace pik {

std::string to_string(Redex::Kind k) {
  switch (k) {
  case Redex::Kind::SessionCom: return "session-com";
  case Redex::Kind::SessionCase: return "session-case";
  case Redex::Kind::PiCom: return "pi-com";
  case Redex::Kind::PiCase: return "pi-case";
  case Redex::Kind::Cond: return "cond";
  }
  return "?";
}

std::string to_string(const Redex& r) {
  std::string s = r.rule;
  if (!r.channel.empty()) s += " on " + r.channel;
  s += " at [";
  for (std::size_t i = 0; i < r.location.size(); ++i) s += (i ? "," : "") + std::to_string(r.location[i]);
  return s + "]";
}

namespace {

using K = Proc::Kind;

// The input prefix a thread offers, looking through one replication.
const Proc* input_of(const ProcPtr& t) {
  if (t->kind == K::In) return t.get();
  if (t->kind == K::Rep && t->cont->kind == K::In) return t->cont.get();
  return nullptr;
}

std::optional<bool> condition_value(const ExprPtr& e) {
  auto v = evaluate(e);
  if (v->kind == Expr::Kind::Bool) return v->flag;
  return std::nullopt;
}

void add_conditions(const Config& c, std::vector<Redex>& out) {
  for (std::size_t i = 0; i < c.threads.size(); ++i) {
    if (c.threads[i]->kind == K::If && condition_value(c.threads[i]->expr)) {
      out.push_back({Redex::Kind::Cond, {static_cast<int>(i)}, "R-Cond", ""});
    }
  }
}

std::vector<Redex> session_redexes(const Config& c) {
  std::map<std::string, std::string> partner;
  for (const auto& b : c.binders) {
    if (!b.is_session()) continue;
    partner[b.x] = b.y;
    partner[b.y] = b.x;
  }
  std::vector<Redex> out;
  const auto& ts = c.threads;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& s = ts[i];
    if (s->kind != K::Out && s->kind != K::Sel) continue;
    for (std::size_t j = 0; j < ts.size(); ++j) {
      if (i == j) continue;
      auto it = partner.find(s->chan);
      bool paired = it != partner.end();
      std::vector<int> loc{static_cast<int>(i), static_cast<int>(j)};
      if (s->kind == K::Out) {
        const Proc* r = input_of(ts[j]);
        if (!r) continue;
        if (paired && r->chan == it->second) {
          out.push_back({Redex::Kind::SessionCom, loc, "R-Com", s->chan});
        } else if (!paired && !partner.count(r->chan) && r->chan == s->chan) {
          out.push_back({Redex::Kind::SessionCom, loc, "R-StndCom", s->chan});
        }
      } else if (paired && ts[j]->kind == K::Bra && ts[j]->chan == it->second) {
        out.push_back({Redex::Kind::SessionCase, loc, "R-Case", s->chan});
      }
    }
  }
  add_conditions(c, out);
  return out;
}

std::vector<Redex> pi_redexes(const Config& c) {
  std::vector<Redex> out;
  const auto& ts = c.threads;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i]->kind == K::Out) {
      for (std::size_t j = 0; j < ts.size(); ++j) {
        const Proc* r = i == j ? nullptr : input_of(ts[j]);
        if (r && r->chan == ts[i]->chan) {
          out.push_back({Redex::Kind::PiCom, {static_cast<int>(i), static_cast<int>(j)}, "Rpi-Com", ts[i]->chan});
        }
      }
    } else if (ts[i]->kind == K::Case && evaluate(ts[i]->expr)->kind == Expr::Kind::Variant) {
      out.push_back({Redex::Kind::PiCase, {static_cast<int>(i)}, "Rpi-Case", ""});
    }
  }
  add_conditions(c, out);
  return out;
}

// The annotation of a restriction after one communication on it.
void advance(Binder& b, const std::string& label) {
  if (b.is_session()) {
    if (!b.session_annot) return;
    auto t = unfold_all(b.session_annot);
    if (t->kind == SType::Kind::Send || t->kind == SType::Kind::Recv) {
      b.session_annot = t->cont;
    } else if ((t->kind == SType::Kind::Select || t->kind == SType::Kind::Branch) && t->branches.count(label)) {
      b.session_annot = t->branches.at(label);
    }
    return;
  }
  if (b.pi_annot) {
    auto t = unfold_all(b.pi_annot);
    if (t->kind == PType::Kind::Chan && t->has_capability()) {
      b.pi_annot = PType::chan(Cap::Absent, Cap::Absent, t->args, t->priority);
    }
  }
}

void advance_binder(Config& c, const std::string& x, const std::string& label) {
  for (auto& b : c.binders) {
    if (b.x == x || (b.is_session() && b.y == x)) {
      advance(b, label);
      return;
    }
  }
}

bool is_pi(const ProcPtr& p) { return !uses_session_constructs(p); }

} // namespace

std::vector<Redex> redexes_session(const ProcPtr& p) { return session_redexes(flatten(p)); }
std::vector<Redex> redexes_pi(const ProcPtr& p) { return pi_redexes(flatten(p)); }

std::vector<Redex> redexes(const ProcPtr& p, Calculus c) {
  return c == Calculus::Session ? redexes_session(p) : redexes_pi(p);
}

ProcPtr step(const ProcPtr& p, const Redex& r) {
  Config c = flatten(p);
  for (int i : r.location) {
    if (i < 0 || static_cast<std::size_t>(i) >= c.threads.size()) {
      throw std::invalid_argument("redex location out of range: " + to_string(r));
    }
  }
  auto& ts = c.threads;
  switch (r.kind) {
  case Redex::Kind::SessionCom:
  case Redex::Kind::PiCom: {
    auto s = ts[r.location[0]];
    auto recv = ts[r.location[1]];
    const Proc* in = input_of(recv);
    if (s->kind != K::Out || !in) throw std::invalid_argument("not a communication: " + to_string(r));
    if (s->args.size() != in->binders.size()) {
      fail("arity", "sending " + std::to_string(s->args.size()) + " values to an input of " +
                        std::to_string(in->binders.size()) + " in " + pretty_print(s) + " | " + pretty_print(recv));
    }
    std::vector<ExprPtr> vs;
    for (const auto& a : s->args) vs.push_back(evaluate(a));
    auto body = substitute_all(in->cont, vs, in->binders);
    ts[r.location[0]] = s->cont;
    if (recv->kind == K::Rep) {
      ts.push_back(body);
    } else {
      ts[r.location[1]] = body;
    }
    advance_binder(c, s->chan, "");
    break;
  }
  case Redex::Kind::SessionCase: {
    auto s = ts[r.location[0]];
    auto b = ts[r.location[1]];
    if (s->kind != K::Sel || b->kind != K::Bra) throw std::invalid_argument("not a selection: " + to_string(r));
    auto it = b->arms.find(s->label);
    if (it == b->arms.end()) fail("label-not-offered", "label " + s->label + " is not offered by " + pretty_print(b));
    ts[r.location[0]] = s->cont;
    ts[r.location[1]] = it->second.body;
    advance_binder(c, s->chan, s->label);
    break;
  }
  case Redex::Kind::PiCase: {
    auto t = ts[r.location[0]];
    auto v = t->kind == K::Case ? evaluate(t->expr) : nullptr;
    if (!v || v->kind != Expr::Kind::Variant) throw std::invalid_argument("not a case on a variant: " + to_string(r));
    auto it = t->arms.find(v->name);
    if (it == t->arms.end()) fail("label-not-offered", "label " + v->name + " has no branch in " + pretty_print(t));
    ts[r.location[0]] = substitute(it->second.body, v->lhs, it->second.binder);
    break;
  }
  case Redex::Kind::Cond: {
    auto t = ts[r.location[0]];
    auto v = t->kind == K::If ? condition_value(t->expr) : std::nullopt;
    if (!v) throw std::invalid_argument("not a decided conditional: " + to_string(r));
    ts[r.location[0]] = *v ? t->left : t->right;
    break;
  }
  }
  return rebuild(c);
}

// ============================================================================
// Case normalisation
// ============================================================================

std::vector<ProcPtr> case_contractions(const ProcPtr& p) {
  std::vector<ProcPtr> out;
  if (!p) return out;
  if (p->kind == K::Case) {
    auto v = evaluate(p->expr);
    if (v->kind == Expr::Kind::Variant) {
      auto it = p->arms.find(v->name);
      if (it != p->arms.end()) out.push_back(substitute(it->second.body, v->lhs, it->second.binder));
    }
  }
  auto with = [&](auto edit) {
    auto q = std::make_shared<Proc>(*p);
    edit(*q);
    out.push_back(q);
  };
  for (const auto& c : case_contractions(p->cont)) with([&](Proc& q) { q.cont = c; });
  for (const auto& c : case_contractions(p->left)) with([&](Proc& q) { q.left = c; });
  for (const auto& c : case_contractions(p->right)) with([&](Proc& q) { q.right = c; });
  for (const auto& [l, a] : p->arms) {
    for (const auto& c : case_contractions(a.body)) with([&, l = l](Proc& q) { q.arms[l].body = c; });
  }
  return out;
}

bool hook_equiv(const ProcPtr& q, const ProcPtr& q2) {
  bool pi = is_pi(q) && is_pi(q2);
  auto goal = congruence_key(q2, pi);
  std::set<std::string> seen;
  std::deque<ProcPtr> todo{q};
  while (!todo.empty() && seen.size() < 20000) {
    auto p = todo.front();
    todo.pop_front();
    auto k = congruence_key(p, pi);
    if (k == goal) return true;
    if (!seen.insert(k).second) continue;
    for (auto& n : case_contractions(p)) todo.push_back(std::move(n));
  }
  return false;
}

// ============================================================================
// Traces
// ============================================================================

std::string process_hash(const ProcPtr& p) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : congruence_key(p, is_pi(p))) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::vector<TraceStep> run(const ProcPtr& p, Calculus c, std::uint64_t seed, int max_steps) {
  std::mt19937_64 rng(seed);
  std::vector<TraceStep> trace;
  ProcPtr cur = p;
  for (int n = 0; n < max_steps; ++n) {
    auto rs = redexes(cur, c);
    if (rs.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, rs.size() - 1);
    const auto& r = rs[pick(rng)];
    auto next = step(cur, r);
    trace.push_back({cur, r, next});
    cur = next;
  }
  return trace;
}

// ============================================================================
// Operational correspondence
// ============================================================================

int CorrespondenceReport::counterexamples() const {
  int n = 0;
  for (const auto& e : entries) n += e.witness.empty();
  return n;
}

namespace {

RenamingFunction covering(const RenamingFunction& f, const ProcPtr& p) {
  RenamingFunction g = f;
  for (const auto& x : free_names(p)) {
    if (!g.map.count(x)) g.map[x] = x;
  }
  return g;
}

std::optional<ProcPtr> try_step(const ProcPtr& p, const Redex& r) {
  try {
    return step(p, r);
  } catch (const DiagnosticError&) {
    return std::nullopt;
  }
}

} // namespace

CorrespondenceReport correspondence_check(const ProcPtr& p, const RenamingFunction& f0, int depth) {
  CorrespondenceReport report;
  auto f = covering(f0, p);
  std::set<std::string> seen;
  std::vector<ProcPtr> frontier{p};
  for (int level = 0; level <= depth && !frontier.empty(); ++level) {
    std::vector<ProcPtr> next;
    for (const auto& s : frontier) {
      if (!seen.insert(congruence_key(s, false)).second) continue;
      if (seen.size() > 500) break;
      ++report.states;
      auto target = encode_process(s, f);
      auto target_steps = redexes_pi(target);

      std::vector<std::pair<Redex, ProcPtr>> source_steps;
      for (const auto& r : redexes_session(s)) {
        if (auto s2 = try_step(s, r)) source_steps.emplace_back(r, *s2);
      }

      for (const auto& [r, s2] : source_steps) {
        CorrespondenceEntry e{1, s, target, to_string(r), "", false};
        auto enc2 = encode_process(s2, f);
        for (const auto& tr : target_steps) {
          auto q = try_step(target, tr);
          if (q && hook_equiv(*q, enc2)) {
            e.witness = to_string(tr);
            break;
          }
        }
        report.entries.push_back(e);
        if (level < depth) next.push_back(s2);
      }

      for (const auto& tr : target_steps) {
        CorrespondenceEntry e{2, s, target, to_string(tr), "", false};
        auto q = try_step(target, tr);
        if (!q) {
          report.entries.push_back(e);
          continue;
        }
        for (const auto& [r, s2] : source_steps) {
          if (hook_equiv(*q, encode_process(s2, f))) {
            e.witness = to_string(r);
            break;
          }
        }
        if (e.witness.empty()) {
          auto fv = free_names(s);
          for (auto x = fv.begin(); x != fv.end() && e.witness.empty(); ++x) {
            for (auto y = std::next(x); y != fv.end() && e.witness.empty(); ++y) {
              if (f(*x) != f(*y)) continue;
              auto closed = Proc::sres(*x, *y, s);
              auto q_closed = Proc::res(f(*x), *q);
              for (const auto& r : redexes_session(closed)) {
                auto s2 = try_step(closed, r);
                if (s2 && hook_equiv(q_closed, encode_process(*s2, f))) {
                  e.witness = to_string(r) + " under new " + *x + " " + *y;
                  e.restricted = true;
                  break;
                }
              }
            }
          }
        }
        report.entries.push_back(e);
      }
    }
    frontier = std::move(next);
  }
  return report;
}

std::optional<SubjectReductionFailure> session_subject_reduction_probe(const SessionEnv& env, const ProcPtr& p,
                                                                       int depth) {
  std::set<std::string> seen;
  std::vector<ProcPtr> frontier{p};
  for (int level = 0; level <= depth && !frontier.empty(); ++level) {
    std::vector<ProcPtr> next;
    for (const auto& s : frontier) {
      if (!seen.insert(congruence_key(s, false)).second) continue;
      if (auto d = session_diagnostic(env, s)) return SubjectReductionFailure{s, d->to_string()};
      for (const auto& r : redexes_session(s)) {
        if (auto s2 = try_step(s, r)) next.push_back(*s2);
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

} // namespace pik

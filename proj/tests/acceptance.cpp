// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "generators.hpp"
#include "pik/deadlock.hpp"
#include "pik/diagnostic.hpp"
#include "pik/duality.hpp"
#include "pik/encoder.hpp"
#include "pik/inference.hpp"
#include "pik/linear_check.hpp"
#include "pik/mpst.hpp"
#include "pik/parser.hpp"
#include "pik/printer.hpp"
#include "pik/reduction.hpp"
#include "pik/session_check.hpp"

using namespace pik;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  bool documented = false; // fails only in the known endpoint-collapse class
};

std::uint64_t base_seed() {
  if (const char* s = std::getenv("PIK_SEED")) return std::stoull(s);
  return 20240611;
}

std::string corpus_dir() {
  if (const char* d = std::getenv("PIK_CORPUS")) return d;
  return PIK_CORPUS_DIR;
}

const char* kServer = "x?(z1).x?(z2).x!<z1==z2>.0";
const char* kClient = "y!<3>.y!<5>.y?(eq).0";
const char* kSystem = "new x y in (x?(z1).x?(z2).x!<z1==z2>.0 | y!<3>.y!<5>.y?(eq).0)";

RenamingFunction identity_for(const ProcPtr& p, const SessionEnv& env) {
  auto names = free_names(p);
  for (const auto& [x, t] : env) names.insert(x);
  return RenamingFunction::identity(names);
}

// The outermost capabilities of an encoded type exchanged, written out
// independently of the library's swap.
PTypePtr swap_outer(const PTypePtr& t) {
  auto u = t;
  while (u->kind == PType::Kind::Rec) u = unfold_rec(u);
  if (u->kind != PType::Kind::Chan) return u;
  return PType::chan(u->out, u->in, u->args);
}

Verdict golden_example() {
  Verdict v;
  auto s = parse_session_type("?Int.?Int.!Bool.end");
  auto want_s = "lin_i[Int, lin_i[Int, lin_o[Bool, empty[]]]]";
  auto want_d = "lin_o[Int, lin_i[Int, lin_o[Bool, empty[]]]]";
  if (!equal(encode_type(s), parse_pi_type(want_s))) v = {false, "encoding of S is " + to_string(encode_type(s))};
  if (!equal(encode_type(dual(s)), parse_pi_type(want_d))) v = {false, "encoding of dual S is " + to_string(encode_type(dual(s)))};
  auto f_s = RenamingFunction::identity({"x"}).with("x", "s");
  auto f_c = RenamingFunction::identity({"y"}).with("y", "s");
  auto server = encode_process(parse_process(kServer, Calculus::Session), f_s);
  auto client = encode_process(parse_process(kClient, Calculus::Session), f_c);
  auto want_server = parse_process("s?(z1,c).c?(z2,c1).new c2 in c1!<z1==z2,c2>.0", Calculus::Pi);
  auto want_client = parse_process("new c in s!<3,c>.new c1 in c!<5,c1>.c1?(eq,c2).0", Calculus::Pi);
  if (!alpha_equiv(server, want_server)) v = {false, "server encodes to " + pretty_print(server)};
  if (!alpha_equiv(client, want_client)) v = {false, "client encodes to " + pretty_print(client)};
  auto system = encode_process(parse_process(kSystem, Calculus::Session), RenamingFunction{});
  auto want_system = parse_process("new s in (s?(z1,c).c?(z2,c1).(new c2 in c1!<z1==z2,c2>.0) | "
                                   "new c in s!<3,c>.new c1 in c!<5,c1>.c1?(eq,c2).0)",
                                   Calculus::Pi);
  if (!alpha_equiv(system, want_system)) v = {false, "system encodes to " + pretty_print(system)};
  if (v.pass) v.detail = "types exact, server/client/system alpha-equivalent";
  return v;
}

Verdict proposition_one(std::uint64_t seed) {
  gen::Rng rng(seed);
  gen::TypeOptions opts;
  int failures = 0, recursive = 0;
  std::string first;
  for (int i = 0; i < 1000; ++i) {
    auto s = gen::session_type(rng, opts);
    if (!is_recursion_free(s)) ++recursive;
    auto lhs = encode_type(complement(s));
    auto rhs = swap_outer(encode_type(s));
    if (!pi_tree_equal(lhs, rhs)) {
      if (!failures++) first = to_string(s);
    }
  }
  return {failures == 0, std::to_string(failures) + " failures in 1000 types (" + std::to_string(recursive) +
                             " recursive)" + (first.empty() ? "" : ", first: " + first)};
}

void session_endpoints(const ProcPtr& p, std::set<std::string>& out) {
  if (!p) return;
  if (p->kind == Proc::Kind::SRes) {
    out.insert(p->chan);
    out.insert(p->chan2);
  }
  session_endpoints(p->cont, out);
  session_endpoints(p->left, out);
  session_endpoints(p->right, out);
  for (const auto& [l, a] : p->arms) session_endpoints(a.body, out);
}

// Rejected by the session checker for misusing an endpoint of a restricted
// session, while the encoding, which maps both endpoints to one channel,
// is accepted.
bool endpoint_collapse(const ProcPtr& p, const Diagnostic& d) {
  std::set<std::string> ends;
  session_endpoints(p, ends);
  std::string word;
  for (char ch : d.message + " ") {
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\'') {
      word += ch;
    } else {
      if (ends.count(word)) return true;
      word.clear();
    }
  }
  return false;
}

struct Agreement {
  int total = 0, typed = 0, disagreements = 0, collapse = 0;
  std::vector<std::string> examples;

  void add(const SessionEnv& env, const ProcPtr& p) {
    ++total;
    auto f = identity_for(p, env);
    auto d = session_diagnostic(env, p);
    bool t = pi_typable(encode_env(env, f), encode_process(p, f));
    typed += !d;
    if (!d == t) return;
    ++disagreements;
    collapse += d && endpoint_collapse(p, *d);
    if (examples.size() < 3) examples.push_back(pretty_print(p) + (d ? " (accepted only after encoding; session checker: " + d->message + ")" : " (rejected only after encoding)"));
  }
};

Verdict typing_agreement(std::uint64_t seed) {
  Agreement corpus, random;
  for (const auto& entry : fs::directory_iterator(corpus_dir())) {
    if (entry.path().extension() != ".expect") continue;
    std::ifstream in(entry.path());
    auto spec = nlohmann::json::parse(in);
    auto file = spec.contains("file") ? spec["file"].get<std::string>() : entry.path().stem().string() + ".spi";
    auto path = fs::path(corpus_dir()) / file;
    if (path.extension() != ".spi" || !fs::exists(path) || spec.value("verb", "") != "check") continue;
    std::ifstream src(path);
    std::stringstream ss;
    ss << src.rdbuf();
    try {
      auto p = parse_process(ss.str(), Calculus::Session);
      corpus.add(parse_session_env(spec.value("env", "")), p);
    } catch (const DiagnosticError&) {
    }
  }
  gen::Rng rng(seed);
  for (int i = 0; i < 300; ++i) {
    auto s = gen::well_typed(rng, 3);
    random.add(s.env, i % 2 ? gen::mutate(rng, s).proc : s.proc);
  }
  int disagreements = corpus.disagreements + random.disagreements;
  int collapse = corpus.collapse + random.collapse;
  Verdict v{disagreements == 0 && corpus.total >= 20,
            "corpus " + std::to_string(corpus.total) + " processes (" + std::to_string(corpus.typed) +
                " typed), random 300 (" + std::to_string(random.typed) + " typed), " + std::to_string(disagreements) +
                " disagreements, " + std::to_string(collapse) + " of them endpoint collapse"};
  v.documented = !v.pass && corpus.total >= 20 && disagreements == collapse;
  for (const auto* a : {&corpus, &random}) {
    for (const auto& e : a->examples) v.detail += "; " + e;
  }
  return v;
}

Verdict operational_correspondence(std::uint64_t seed) {
  int counterexamples = 0, entries = 0, fallback = 0;
  std::string first;
  auto note = [&](const CorrespondenceReport& r, const ProcPtr& p) {
    entries += static_cast<int>(r.entries.size());
    if (!r.ok() && first.empty()) first = pretty_print(p);
    counterexamples += r.counterexamples();
  };
  auto ex1 = parse_process(kSystem, Calculus::Session);
  note(correspondence_check(ex1, RenamingFunction{}, 5), ex1);
  gen::Rng rng(seed);
  for (int i = 0; i < 500; ++i) {
    auto s = gen::well_typed(rng, 3);
    note(correspondence_check(s.proc, identity_for(s.proc, s.env), 5), s.proc);
  }
  int merged = 0;
  for (int i = 0; i < 8; ++i) {
    auto m = gen::merge_case(rng);
    auto r = correspondence_check(m.proc, m.f, 5);
    note(r, m.proc);
    ++merged;
    bool used = false;
    for (const auto& e : r.entries) used |= e.restricted;
    fallback += used;
  }
  bool pass = counterexamples == 0 && fallback >= 5;
  return {pass, std::to_string(entries) + " steps checked on the equality test, 500 random and " + std::to_string(merged) +
                    " merged processes, fallback used in " + std::to_string(fallback) + ", " +
                    std::to_string(counterexamples) + " counterexamples" + (first.empty() ? "" : ", first: " + first)};
}

ProcPtr shuffled(gen::Rng& rng, const ProcPtr& p) {
  auto c = flatten(p);
  std::shuffle(c.threads.begin(), c.threads.end(), rng);
  std::shuffle(c.binders.begin(), c.binders.end(), rng);
  return rebuild(c);
}

Verdict corollaries(std::uint64_t seed) {
  gen::Rng rng(seed);
  int reduction_failures = 0, congruence_failures = 0, states = 0;
  std::string first;
  for (int i = 0; i < 500; ++i) {
    auto s = gen::well_typed(rng, 3);
    if (auto f = session_subject_reduction_probe(s.env, s.proc, 5)) {
      if (!reduction_failures++) first = pretty_print(f->state) + ": " + f->diagnostic;
    }
    std::vector<ProcPtr> path = {s.proc};
    for (const auto& t : run(s.proc, Calculus::Session, rng(), 5)) path.push_back(t.after);
    for (const auto& q : path) {
      ++states;
      auto q2 = shuffled(rng, q);
      if (session_typable(s.env, q) != session_typable(s.env, q2)) {
        if (!congruence_failures++ && first.empty()) first = pretty_print(q) + " vs " + pretty_print(q2);
      }
    }
  }
  bool pass = reduction_failures == 0 && congruence_failures == 0;
  return {pass, "500 processes, " + std::to_string(states) + " congruence pairs, " +
                    std::to_string(reduction_failures) + " subject-reduction and " +
                    std::to_string(congruence_failures) + " congruence failures" + (first.empty() ? "" : ", first: " + first)};
}

Verdict subtyping(std::uint64_t seed) {
  gen::Rng rng(seed);
  gen::TypeOptions opts;
  opts.depth = 5;
  int holds = 0, disagreements = 0, recursive = 0;
  std::string first;
  for (int i = 0; i < 1000; ++i) {
    auto [a, b] = gen::subtype_pair(rng, opts);
    recursive += !is_recursion_free(a) || !is_recursion_free(b);
    bool s = session_subtype(a, b).holds;
    bool p = pi_subtype(encode_type(a), encode_type(b)).holds;
    holds += s;
    if (s != p && !disagreements++) first = to_string(a) + " <: " + to_string(b);
  }
  return {disagreements == 0, "1000 pairs (" + std::to_string(holds) + " hold, " + std::to_string(recursive) +
                                  " recursive), " + std::to_string(disagreements) + " disagreements" +
                                  (first.empty() ? "" : ", first: " + first)};
}

bool two_cycle(const DeadlockReport& r) {
  const auto& c = r.solution.cycle;
  return !r.ok && c.size() == 2 && c[0].strict && c[1].strict && c[0].lhs.var == c[1].rhs.var &&
         c[0].rhs.var == c[1].lhs.var && c[0].lhs.var != c[0].rhs.var;
}

Verdict deadlock(std::uint64_t seed) {
  std::vector<std::string> problems;
  auto crossed = parse_process("new x1 x2 in new y1 y2 in (x1?(z).y1!<z>.0 | y2?(w).x2!<w>.0)", Calculus::Session);
  auto r1 = check_deadlock_session(crossed);
  if (!two_cycle(r1)) problems.push_back("crossed sessions not rejected with a two-constraint cycle");
  auto crossed_pi = parse_process("new x in new y in (x?(z,c).new d in y!<z,d>.0 | y?(w,e).new f in x!<w,f>.0)", Calculus::Pi);
  auto r2 = infer_priorities(crossed_pi);
  if (!two_cycle(r2)) problems.push_back("crossed channels not rejected with a two-constraint cycle");
  auto factorial = parse_process("new fact in (*fact?(x,y).if x == 0 then y!<1>.0 else new z in (fact!<x-1,z>.0 | "
                           "z?(k).y!<x*k>.0) | new r in (fact!<5,r>.0 | r?(v).0))",
                           Calculus::Pi);
  DeadlockOptions mono;
  mono.polymorphic = false;
  if (!infer_priorities(factorial).ok) problems.push_back("factorial server rejected");
  if (infer_priorities(factorial, {}, mono).ok) problems.push_back("factorial server accepted without polymorphism");

  gen::Rng rng(seed);
  int accepted = 0, stuck_rejected = 0, unsound = 0;
  for (int i = 0; i < 200; ++i) {
    auto p = gen::interleaved(rng);
    auto r = check_deadlock_session(p);
    auto stuck = find_stuck_state(p, Calculus::Session, 20000);
    if (r.ok) {
      ++accepted;
      if (stuck && !unsound++) problems.push_back("accepted but stuck: " + pretty_print(p));
    } else if (stuck) {
      ++stuck_rejected;
    }
  }
  std::string detail = "crossed cycles " + (r1.cycle.empty() ? std::string("-") : r1.cycle[0] + "; " + r1.cycle[1]) +
                       " / " + (r2.cycle.empty() ? std::string("-") : r2.cycle[0] + "; " + r2.cycle[1]) +
                       ", factorial server needs polymorphism, sample: " + std::to_string(accepted) + " accepted, " +
                       std::to_string(stuck_rejected) + " rejected and stuck, " + std::to_string(unsound) +
                       " accepted but stuck";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

Verdict inference(std::uint64_t seed) {
  std::vector<std::string> problems;
  auto r = infer_session_types(parse_process(kSystem, Calculus::Session));
  auto s = parse_session_type("?Int.?Int.!Bool.end");
  if (!r.env.count("x") || !equal(r.env.at("x"), s)) problems.push_back("x is not S");
  if (!r.env.count("y") || !equal(r.env.at("y"), dual(s))) problems.push_back("y is not dual S");
  if (r.env.size() != 2) problems.push_back("extra entries in the inferred context");

  gen::Rng rng(seed);
  gen::TypeOptions opts;
  opts.recursion = false;
  int roundtrip = 0;
  for (int i = 0; i < 1000; ++i) {
    auto t = gen::session_type(rng, opts);
    try {
      if (!equal(decode_type(encode_type(t)), t) && !roundtrip++) problems.push_back("decode(encode) differs on " + to_string(t));
    } catch (const DiagnosticError& e) {
      if (!roundtrip++) problems.push_back(to_string(t) + ": " + e.diag.message);
    }
  }
  opts.depth = 4;
  int mismatches = 0, duals = 0;
  for (int i = 0; i < 500; ++i) {
    auto a = gen::session_type(rng, opts);
    STypePtr b;
    switch (i % 3) {
    case 0: b = dual(a); break;
    case 1: b = gen::subtype_pair(rng, opts).second; break;
    default: b = gen::session_type(rng, opts); break;
    }
    bool expected = session_tree_equal(b, dual(a));
    duals += expected;
    Unifier u;
    bool unified = true;
    try {
      unify(u, dual_constraint(u.from_type(encode_type(a)), u.from_type(encode_type(b))));
    } catch (const DiagnosticError&) {
      unified = false;
    }
    if (unified != expected && !mismatches++) problems.push_back("duality constraint on " + to_string(a) + " / " + to_string(b));
  }
  return {problems.empty(), "equality test inferred exactly, " + std::to_string(roundtrip) + " round-trip failures in 1000, " +
                                std::to_string(mismatches) + " constraint mismatches in 500 pairs (" +
                                std::to_string(duals) + " dual)" + (problems.empty() ? "" : "; " + problems.front())};
}

Verdict mpst() {
  std::vector<std::string> problems;
  int files = 0, not_projectable = 0, entries = 0, pairs = 0;
  for (const auto& entry : fs::directory_iterator(corpus_dir())) {
    if (entry.path().extension() != ".mpst") continue;
    ++files;
    std::ifstream in(entry.path());
    std::stringstream ss;
    ss << in.rdbuf();
    auto name = entry.path().filename().string();
    try {
      auto g = parse_multiparty_type(ss.str(), name);
      for (const auto& [role, t] : encode_mpst(g)) {
        ++entries;
        decode_type(t);
      }
    } catch (const DiagnosticError& e) {
      if (e.diag.code == "not-projectable") {
        ++not_projectable;
      } else {
        problems.push_back(name + ": " + e.diag.to_string());
      }
    }
    auto sidecar = entry.path();
    sidecar.replace_extension(".expect");
    if (!fs::exists(sidecar)) continue;
    std::ifstream sc(sidecar);
    auto spec = nlohmann::json::parse(sc);
    if (!spec.contains("peer")) continue;
    std::ifstream pin(fs::path(corpus_dir()) / spec["peer"].get<std::string>());
    std::stringstream ps;
    ps << pin.rdbuf();
    auto a = encode_mpst(parse_multiparty_type(ss.str()));
    auto b = encode_mpst(parse_multiparty_type(ps.str()));
    if (a.size() != 1 || b.size() != 1) {
      problems.push_back(name + ": a two-role example must name exactly one peer");
      continue;
    }
    ++pairs;
    auto ta = a.begin()->second, tb = b.begin()->second;
    Unifier u(true);
    bool dual_ok = true;
    try {
      unify(u, dual_constraint(u.from_type(ta), u.from_type(tb)));
    } catch (const DiagnosticError&) {
      dual_ok = false;
    }
    if (!dual_ok) problems.push_back(name + ": the two roles are not dual");
  }
  if (files < 6) problems.push_back("fewer than 6 multiparty types");
  if (not_projectable < 1) problems.push_back("no not-projectable case");
  if (pairs < 1) problems.push_back("no two-role example");
  std::string detail = std::to_string(files) + " types, " + std::to_string(entries) + " role entries decoded, " +
                       std::to_string(pairs) + " two-role pairs dual, " + std::to_string(not_projectable) +
                       " not projectable";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

} // namespace

int main(int argc, char** argv) {
  bool tolerate = argc > 1 && std::string(argv[1]) == "--tolerate-endpoint-collapse";
  auto seed = base_seed();
  std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"golden encoding of the equality test", golden_example},
      {"encoded duality is a capability swap", [&] { return proposition_one(seed + 2); }},
      {"session and pi type checking agree", [&] { return typing_agreement(seed + 3); }},
      {"operational correspondence", [&] { return operational_correspondence(seed + 4); }},
      {"subject reduction and congruence invariance", [&] { return corollaries(seed + 4); }},
      {"subtyping is preserved and reflected", [&] { return subtyping(seed + 6); }},
      {"deadlock analysis", [&] { return deadlock(seed + 7); }},
      {"session type inference", [&] { return inference(seed + 8); }},
      {"multiparty projection and encoding", mpst},
  };
  int failed = 0, tolerated = 0, n = 0;
  std::cout << "seed " << seed << "\n";
  for (const auto& [title, check] : criteria) {
    ++n;
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    failed += !v.pass;
    tolerated += !v.pass && v.documented;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << title << " (" << v.detail << ", "
              << ms << " ms)\n";
  }
  std::cout << (n - failed) << "/" << n << " criteria passed";
  if (tolerated) std::cout << "; " << tolerated << " failing only on endpoint collapse (see README)";
  std::cout << "\n";
  if (failed == 0) return 0;
  return tolerate && failed == tolerated ? 0 : 1;
}

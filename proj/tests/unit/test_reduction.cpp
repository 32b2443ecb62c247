#include <doctest.h>

#include "generators.hpp"
#include "helpers.hpp"
#include "pik/reduction.hpp"
#include "pik/session_check.hpp"

using namespace pik;
using namespace pik::test;

namespace {

const char* kEq = "new x y in (x?(z1).x?(z2).x!<z1==z2>.0 | y!<3>.y!<5>.y?(eq).0)";

ProcPtr run_to_end(const ProcPtr& p, Calculus c, std::uint64_t seed) {
  auto t = run(p, c, seed);
  return t.empty() ? p : t.back().after;
}

} // namespace

TEST_CASE("a session communication needs both endpoints of one restriction") {
  auto rs = redexes_session(session(kEq));
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].rule == "R-Com");
  CHECK(rs[0].channel == "y");
}

TEST_CASE("the equality test runs three steps to inaction") {
  auto p = session(kEq);
  auto t = run(p, Calculus::Session, 7);
  REQUIRE(t.size() == 3);
  for (const auto& s : t) CHECK(s.redex.rule == "R-Com");
  CHECK(redexes_session(t.back().after).empty());
}

TEST_CASE("a free name communicates by the standard rule") {
  auto rs = redexes_session(session("a!<1>.0 | a?(n).0"));
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].rule == "R-StndCom");
}

TEST_CASE("selection picks the matching branch") {
  auto p = session("new x y in (x <| b.x!<1>.0 | y |> {a: 0, b: y?(n).0})");
  auto rs = redexes_session(p);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].rule == "R-Case");
  auto q = step(p, rs[0]);
  auto rs2 = redexes_session(q);
  REQUIRE(rs2.size() == 1);
  CHECK(rs2[0].rule == "R-Com");
}

TEST_CASE("a label that is not offered is a runtime error") {
  auto p = session("new x y in (x <| c.0 | y |> {a: 0, b: 0})");
  auto rs = redexes_session(p);
  REQUIRE(rs.size() == 1);
  CHECK(code_of([&] { step(p, rs[0]); }) == "label-not-offered");
}

TEST_CASE("arity mismatches are runtime errors") {
  auto p = pi("a!<1,2>.0 | a?(n).0");
  auto rs = redexes_pi(p);
  REQUIRE(rs.size() == 1);
  CHECK(code_of([&] { step(p, rs[0]); }) == "arity");
}

TEST_CASE("conditionals reduce on literal booleans") {
  auto p = session("if true then a!<1>.0 else 0");
  auto rs = redexes_session(p);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].rule == "R-Cond");
  CHECK(alpha_equiv(step(p, rs[0]), session("a!<1>.0")));
}

TEST_CASE("pi communication and case") {
  auto p = pi("a!<l(3)>.0 | a?(v).case v of {l(n) > b!<n>.0, m(k) > 0}");
  auto t = run(p, Calculus::Pi, 1);
  REQUIRE(t.size() == 2);
  CHECK(t[0].redex.rule == "Rpi-Com");
  CHECK(t[1].redex.rule == "Rpi-Case");
  CHECK(alpha_equiv(t[1].after, pi("b!<3>.0")));
}

TEST_CASE("replicated input persists") {
  auto p = pi("*s?(n).0 | s!<1>.0 | s!<2>.0");
  auto t = run(p, Calculus::Pi, 3);
  CHECK(t.size() == 2);
  CHECK(redexes_pi(t.back().after).empty());
}

TEST_CASE("the same seed gives the same trace") {
  gen::Rng rng(61);
  for (int i = 0; i < 50; ++i) {
    auto p = gen::interleaved(rng);
    auto a = run(p, Calculus::Session, 99);
    auto b = run(p, Calculus::Session, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(process_hash(a[k].after) == process_hash(b[k].after));
  }
}

TEST_CASE("all schedules of independent sessions end in the same state") {
  gen::Rng rng(62);
  for (int i = 0; i < 50; ++i) {
    auto p = gen::interleaved(rng);
    auto h = process_hash(run_to_end(p, Calculus::Session, 1));
    for (std::uint64_t seed = 2; seed < 6; ++seed) CHECK(process_hash(run_to_end(p, Calculus::Session, seed)) == h);
  }
}

TEST_CASE("process hashes are invariant under congruence") {
  CHECK(process_hash(pi("a!<1>.0 | b!<2>.0")) == process_hash(pi("b!<2>.0 | a!<1>.0 | 0")));
  CHECK(process_hash(pi("a!<1>.0")) != process_hash(pi("a!<2>.0")));
}

TEST_CASE("case contraction up to congruence") {
  auto q = pi("new c in (case l(c) of {l(d) > d!<1>.0} | c?(n).0)");
  CHECK(hook_equiv(q, pi("new c in (c!<1>.0 | c?(n).0)")));
  CHECK_FALSE(hook_equiv(q, pi("new c in (c!<2>.0 | c?(n).0)")));
}

TEST_CASE("well-typed processes stay well typed") {
  gen::Rng rng(63);
  for (int i = 0; i < 100; ++i) {
    auto s = gen::well_typed(rng, 3);
    auto failure = session_subject_reduction_probe(s.env, s.proc, 6);
    CAPTURE(pretty_print(s.proc));
    CHECK_FALSE(failure.has_value());
  }
}

TEST_CASE("the encoding corresponds step for step") {
  auto p = session(kEq);
  auto r = correspondence_check(p, RenamingFunction::identity({}), 5);
  CHECK(r.ok());
  CHECK(r.states == 4);
  for (const auto& e : r.entries) CHECK_FALSE(e.witness.empty());
}

TEST_CASE("correspondence on generated processes") {
  gen::Rng rng(64);
  for (int i = 0; i < 60; ++i) {
    auto s = gen::well_typed(rng, 3);
    auto names = free_names(s.proc);
    for (const auto& [x, t] : s.env) names.insert(x);
    auto r = correspondence_check(s.proc, RenamingFunction::identity(names), 4);
    CAPTURE(pretty_print(s.proc));
    CHECK(r.ok());
  }
}

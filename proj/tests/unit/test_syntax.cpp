#include <doctest.h>

#include "generators.hpp"
#include "helpers.hpp"
#include "pik/env.hpp"
#include "pik/process.hpp"
#include "pik/types.hpp"

using namespace pik;
using namespace pik::test;

TEST_CASE("session types print back to their source") {
  for (const char* src : {"end", "!Int.?Bool.end", "+{a: end, b: !Int.end}", "&{l: ?Int.end}",
                          "rec X.!Int.X", "!#Int.end", "?(!Int.end).end", "!Unit.end"}) {
    CAPTURE(src);
    CHECK(to_string(stype(src)) == src);
  }
}

TEST_CASE("pi types print back to their source") {
  for (const char* src : {"empty[]", "lin_i[Int]", "lin_o[Int, lin_i[Bool]]", "lin_io[Int]", "#[Int]",
                          "<a: Int, b: Unit>", "rec X.lin_i[X]"}) {
    CAPTURE(src);
    CHECK(to_string(ptype(src)) == src);
  }
}

TEST_CASE("random session types survive printing and parsing") {
  gen::Rng rng(11);
  gen::TypeOptions opts;
  for (int i = 0; i < 300; ++i) {
    auto t = gen::session_type(rng, opts);
    CAPTURE(to_string(t));
    CHECK(equal(stype(to_string(t)), t));
  }
}

TEST_CASE("random processes survive printing and parsing") {
  gen::Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    auto p = gen::well_typed(rng, 3).proc;
    auto text = pretty_print(p);
    CAPTURE(text);
    CHECK(alpha_key(session(text)) == alpha_key(p));
  }
}

TEST_CASE("syntax errors carry a position") {
  try {
    session("new x y in (x!<1 .0 | 0)");
    FAIL("expected a syntax error");
  } catch (const DiagnosticError& e) {
    CHECK(e.diag.code == "syntax");
    CHECK(e.diag.span.start.line == 1);
    CHECK(e.diag.span.start.col == 18);
  }
}

TEST_CASE("unguarded recursion is rejected") {
  CHECK(code_of([] { stype("rec X.X"); }) == "unguarded");
  CHECK(code_of([] { stype("rec X.rec Y.X"); }) == "unguarded");
  CHECK(code_of([] { stype("rec X.!Int.X"); }).empty());
}

TEST_CASE("session constructs are rejected in pi processes and vice versa") {
  CHECK(code_of([] { pi("new x y in 0"); }) != "");
  CHECK(code_of([] { session("x!<1,2>.0"); }) == "wrong-calculus");
}

TEST_CASE("typing contexts parse") {
  auto env = parse_session_env("x: !Int.end; y: ?Int.end");
  REQUIRE(env.size() == 2);
  CHECK(to_string(env.at("x")) == "!Int.end");
  CHECK(parse_session_env("").empty());
  CHECK(code_of([] { parse_session_env("x: end; x: end"); }) != "");
  auto penv = parse_pi_env("c: lin_i[Int]");
  CHECK(to_string(penv.at("c")) == "lin_i[Int]");
}

TEST_CASE("alpha equivalence ignores bound names only") {
  CHECK(alpha_equiv(pi("new a in a!<1>.0 | a?(x).0"), pi("new b in b!<1>.0 | b?(y).0")));
  CHECK_FALSE(alpha_equiv(pi("a!<1>.0"), pi("b!<1>.0")));
  CHECK_FALSE(alpha_equiv(pi("a?(x).x!<1>.0"), pi("a?(x).y!<1>.0")));
}

TEST_CASE("substitution avoids capture") {
  auto p = pi("a?(y).x!<y>.0");
  auto q = substitute(p, Expr::make_name("y"), "x");
  CHECK(free_names(q).count("y") == 1);
  CHECK(alpha_equiv(q, pi("a?(z).y!<z>.0")));
}

TEST_CASE("free and bound names") {
  auto p = session("new x y in (x!<1>.0 | y?(z).w!<z>.0)");
  CHECK(free_names(p) == std::set<std::string>{"w"});
  auto b = bound_names(p);
  CHECK(b.count("x"));
  CHECK(b.count("z"));
}

TEST_CASE("structural congruence identifies reordered parallel threads") {
  CHECK(struct_congruent(pi("a!<1>.0 | b!<2>.0 | 0"), pi("b!<2>.0 | a!<1>.0")));
  CHECK(struct_congruent(pi("new x in (a!<x>.0 | 0)"), pi("new y in a!<y>.0")));
  CHECK(struct_congruent(pi("new x in a!<x>.0 | b!<1>.0"), pi("b!<1>.0 | new x in a!<x>.0")));
  CHECK_FALSE(struct_congruent(pi("a!<1>.0"), pi("a!<2>.0")));
}

TEST_CASE("flatten and rebuild preserve the process up to congruence") {
  gen::Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    auto p = gen::well_typed(rng, 3).proc;
    CHECK(struct_congruent(rebuild(flatten(p)), p));
  }
}

TEST_CASE("fresh names avoid the given set") {
  CHECK(fresh_name("c", {"c", "c0"}) != "c");
  CHECK(fresh_name("c", {"c", "c0"}) != "c0");
}

TEST_CASE("json form of a process names its constructors") {
  auto j = to_json(pi("a!<1>.0"));
  CHECK(j["kind"] == "Output");
  CHECK(j["name"] == "a");
}

TEST_CASE("diagnostic codes are registered") {
  for (const char* code : {"syntax", "unguarded", "linearity", "type-mismatch", "deadlock", "not-projectable"}) {
    CAPTURE(code);
    CHECK(diagnostic_codes().count(code) == 1);
  }
}

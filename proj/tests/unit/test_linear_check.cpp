#include <doctest.h>

#include "generators.hpp"
#include "helpers.hpp"
#include "pik/encoder.hpp"
#include "pik/linear_check.hpp"

using namespace pik;
using namespace pik::test;

namespace {

std::string verdict(const std::string& env, const std::string& src) {
  auto d = pi_diagnostic(parse_pi_env(env), pi(src));
  return d ? d->code : "ok";
}

} // namespace

TEST_CASE("linear channels are used once in each direction") {
  CHECK(verdict("", "new x in (x!<1>.0 | x?(n).0)") == "ok");
  CHECK(verdict("", "new x in (x!<1>.0 | x!<2>.0 | x?(n).0)") == "linearity");
  CHECK(verdict("", "new x in x!<1>.0") == "linearity");
  CHECK(verdict("x: lin_o[Int]", "x!<1>.0") == "ok");
  CHECK(verdict("x: lin_o[Int]", "0") == "linearity");
}

TEST_CASE("capabilities must be held") {
  CHECK(verdict("x: lin_i[Int]", "x!<1>.0") == "capability-missing");
  CHECK(verdict("x: empty[]", "0") == "ok");
}

TEST_CASE("payload shapes must agree") {
  CHECK(verdict("", "new x in (x!<1>.0 | x?(n,m).0)") == "type-mismatch");
  CHECK(verdict("x: lin_o[Int]", "x!<true>.0") == "type-mismatch");
}

TEST_CASE("sending a channel hands over the capability") {
  CHECK(verdict("", "new x in (new c in x!<c>.c?(v).0 | x?(d).d!<1>.0)") == "ok");
  CHECK(verdict("", "new x in (new c in x!<c>.(c?(v).0 | c!<2>.0) | x?(d).d!<1>.0)") != "ok");
}

TEST_CASE("a sent channel keeps the unused half") {
  CHECK(verdict("", "new a in (new c in a!<c>.new d in c!<1,d>.d?(b).0 | a?(e).e?(n,f).f!<true>.0)") == "ok");
  CHECK(verdict("", "new a in (new c in a!<c>.new d in c!<1,d>.0 | a?(e).e?(n,f).f!<true>.0)") == "linearity");
}

TEST_CASE("variants and case") {
  CHECK(verdict("", "new x in (x!<l1(3)>.0 | x?(v).case v of {l1(n) > 0, l2(m) > 0})") == "ok");
  CHECK(verdict("", "new x in (x!<l3(3)>.0 | x?(v).case v of {l1(n) > 0, l2(m) > 0})") == "variant-label");
  CHECK(verdict("", "case l2(*) of {l1(x) > 0}") == "variant-label");
}

TEST_CASE("replicated servers use shared channels") {
  CHECK(verdict("", "new s in (*s?(n,r).r!<n>.0 | new r in (s!<1,r>.0 | r?(v).0))") == "ok");
  CHECK(verdict("", "new s in (*s?(n,r).r!<n>.0 | new r in (s!<1,r>.0 | s!<2,r>.0 | r?(v).0))") != "ok");
}

TEST_CASE("session constructs are not pi processes") {
  CHECK(code_of([] { check_pi({}, session("new x y in 0")); }) == "wrong-calculus");
}

TEST_CASE("free names need a type") {
  CHECK(verdict("", "x!<1>.0") == "unknown-name");
}

TEST_CASE("inferred restriction types") {
  auto t = check_pi({}, pi("new x in (x!<1>.0 | x?(n).0)"));
  REQUIRE(t.restrictions.size() == 1);
  CHECK(to_string(t.restrictions.begin()->second) == "lin_io[Int]");
}

TEST_CASE("capability split of a full channel") {
  auto [a, b] = capability_split(ptype("lin_io[Int]"));
  CHECK(to_string(a) == "lin_i[Int]");
  CHECK(to_string(b) == "lin_o[Int]");
  CHECK(code_of([] { capability_split(ptype("lin_i[Int]")); }) == "not-splittable");
}

TEST_CASE("encodings of generated well-typed processes check") {
  gen::Rng rng(41);
  for (int i = 0; i < 300; ++i) {
    auto s = gen::well_typed(rng, 4);
    auto names = free_names(s.proc);
    for (const auto& [x, t] : s.env) names.insert(x);
    auto f = RenamingFunction::identity(names);
    auto q = encode_process(s.proc, f);
    CAPTURE(pretty_print(q));
    CHECK(pi_typable(encode_env(s.env, f), q));
  }
}

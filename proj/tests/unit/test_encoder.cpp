#include <doctest.h>

#include "generators.hpp"
#include "helpers.hpp"
#include "pik/duality.hpp"
#include "pik/encoder.hpp"

using namespace pik;
using namespace pik::test;

namespace {

ProcPtr encode_closed(const std::string& src) {
  auto p = session(src);
  return encode_process(p, RenamingFunction::identity(free_names(p)));
}

} // namespace

TEST_CASE("type encoding of the equality test") {
  CHECK(to_string(encode_type(stype("?Int.?Int.!Bool.end"))) == "lin_i[Int, lin_i[Int, lin_o[Bool, empty[]]]]");
  CHECK(to_string(encode_type(stype("!Int.!Int.?Bool.end"))) == "lin_o[Int, lin_i[Int, lin_o[Bool, empty[]]]]");
}

TEST_CASE("type encoding of each constructor") {
  CHECK(to_string(encode_type(stype("end"))) == "empty[]");
  CHECK(to_string(encode_type(stype("!Int.end"))) == "lin_o[Int, empty[]]");
  CHECK(to_string(encode_type(stype("?Int.end"))) == "lin_i[Int, empty[]]");
  CHECK(to_string(encode_type(stype("+{a: ?Int.end, b: end}"))) == "lin_o[<a: lin_o[Int, empty[]], b: empty[]>]");
  CHECK(to_string(encode_type(stype("&{a: ?Int.end, b: end}"))) == "lin_i[<a: lin_i[Int, empty[]], b: empty[]>]");
  CHECK(to_string(encode_type(stype("#Int"))) == "#[Int]");
  CHECK(to_string(encode_type(stype("!(?Int.end).end"))) == "lin_o[lin_i[Int, empty[]], empty[]]");
}

TEST_CASE("recursive types encode to recursive channel types") {
  auto t = encode_type(stype("rec X.!Int.X"));
  // Unfolding: lin_o[Int, enc(dual(rec X.!Int.X))] = lin_o[Int, lin_i[Int, ...]]
  CHECK(pi_tree_equal(t, ptype("lin_o[Int, rec Y.lin_i[Int, Y]]")));
}

TEST_CASE("output and input prefixes") {
  CHECK(alpha_equiv(encode_closed("x!<1>.x?(z).0"), pi("new c in x!<1,c>.c?(z,d).0")));
  CHECK(alpha_equiv(encode_closed("x?(z).0"), pi("x?(z,c).0")));
}

TEST_CASE("selection and branching") {
  CHECK(alpha_equiv(encode_closed("x <| a.x!<1>.0"), pi("new c in x!<a(c)>.new d in c!<1,d>.0")));
  CHECK(alpha_equiv(encode_closed("x |> {a: x?(n).0, b: 0}"), pi("x?(v).case v of {a(c) > c?(n,d).0, b(e) > 0}")));
}

TEST_CASE("session restriction becomes one channel") {
  auto q = encode_closed("new x y in (x!<1>.0 | y?(z).0)");
  CHECK(alpha_equiv(q, pi("new s in ((new c in s!<1,c>.0) | s?(z,d).0)")));
}

TEST_CASE("annotated restriction carries the encoded type with both capabilities") {
  auto q = encode_closed("new x y : !Int.end in (x!<1>.0 | y?(z).0)");
  REQUIRE(q->kind == Proc::Kind::Res);
  REQUIRE(q->pi_annot);
  CHECK(to_string(q->pi_annot) == "lin_io[Int, empty[]]");
}

TEST_CASE("delegation sends the renamed endpoint") {
  auto q = encode_closed("new x y in new u v in (x!<u>.0 | y?(w).w!<3>.0 | v?(q).0)");
  CHECK(alpha_equiv(q, pi("new s in new t in ((new c in s!<t,c>.0) | s?(w,d).(new e in w!<3,e>.0) | t?(q,f).0)")));
}

TEST_CASE("renaming functions") {
  auto p = session("x!<1>.0 | y?(z).0");
  auto f = RenamingFunction::identity({"x", "y"});
  CHECK(f("x") == "x");
  CHECK(f.injective());
  auto g = f.with("y", "x");
  CHECK_FALSE(g.injective());
  CHECK(code_of([&] { f("w"); }) == "unmapped-name");
  CHECK(code_of([&] { validate_renaming(RenamingFunction::identity({"x"}), p); }) != "");
  CHECK(code_of([&] { validate_renaming(f, p); }).empty());
}

TEST_CASE("fresh names record the endpoint they continue") {
  FreshNameSupply supply({"x"});
  auto p = session("x!<1>.x!<2>.0");
  encode_process(p, RenamingFunction::identity({"x"}), supply);
  REQUIRE(supply.origins().size() == 2);
  for (const auto& [c, origin] : supply.origins()) CHECK(origin == "x");
}

TEST_CASE("environments encode pointwise through the renaming") {
  SessionEnv env = {{"x", stype("!Int.end")}, {"y", stype("?Int.end")}};
  auto penv = encode_env(env, RenamingFunction::identity({"x", "y"}));
  CHECK(to_string(penv.at("x")) == "lin_o[Int, empty[]]");
  CHECK(to_string(penv.at("y")) == "lin_i[Int, empty[]]");
}

TEST_CASE("encoded duality is a swap of the outer capabilities") {
  gen::Rng rng(51);
  gen::TypeOptions opts;
  for (int i = 0; i < 300; ++i) {
    auto s = gen::session_type(rng, opts);
    CAPTURE(to_string(s));
    CHECK(pi_tree_equal(encode_type(complement(s)), swap_caps(encode_type(s))));
  }
}

TEST_CASE("encoding does not leave session constructs behind") {
  gen::Rng rng(52);
  for (int i = 0; i < 200; ++i) {
    auto s = gen::well_typed(rng, 4);
    auto names = free_names(s.proc);
    for (const auto& [x, t] : s.env) names.insert(x);
    auto q = encode_process(s.proc, RenamingFunction::identity(names));
    CHECK_FALSE(uses_session_constructs(q));
  }
}

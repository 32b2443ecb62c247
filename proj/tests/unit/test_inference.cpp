#include <doctest.h>

#include "generators.hpp"
#include "helpers.hpp"
#include "pik/duality.hpp"
#include "pik/encoder.hpp"
#include "pik/inference.hpp"
#include "pik/session_check.hpp"

using namespace pik;
using namespace pik::test;

namespace {

std::string inferred(const std::string& src, const std::string& name, bool rec = false) {
  auto r = infer_session_types(session(src), {}, rec);
  return to_string(r.env.at(name));
}

} // namespace

TEST_CASE("the equality test infers both endpoint types") {
  auto r = infer_session_types(session("new x y in (x?(z1).x?(z2).x!<z1==z2>.0 | y!<3>.y!<5>.y?(eq).0)"));
  CHECK(r.env.size() == 2);
  CHECK(to_string(r.env.at("x")) == "?Int.?Int.!Bool.end");
  CHECK(to_string(r.env.at("y")) == "!Int.!Int.?Bool.end");
  CHECK(to_string(r.encoded.at("x")) == "lin_i[Int, lin_i[Int, lin_o[Bool, empty[]]]]");
  REQUIRE(r.annotations.size() == 1);
  CHECK(to_string(r.annotations.begin()->second) == "?Int.?Int.!Bool.end");
}

TEST_CASE("free names, choices and delegation") {
  CHECK(inferred("a!<1>.a?(b).if b then 0 else 0", "a") == "!Int.?Bool.end");
  CHECK(inferred("new x y in (x <| l.x!<1>.0 | y |> {l: y?(n).0, m: 0})", "y") == "&{l: ?Int.end, m: end}");
  CHECK(inferred("new x y in new u v in (x!<u>.0 | y?(w).w!<3>.0 | v?(q).0)", "x") == "!(!Int.end).end");
  CHECK(inferred("new s in (*s?(x).x!<1>.0 | new a b in (s!<a>.0 | b?(n).0))", "s") == "#(!Int.end)");
}

TEST_CASE("inferred types check") {
  gen::Rng rng(81);
  for (int i = 0; i < 200; ++i) {
    auto s = gen::well_typed(rng, 3);
    CAPTURE(pretty_print(s.proc));
    auto r = infer_session_types(s.proc, s.env);
    CHECK(session_typable(s.env, annotate_process(s.proc, r.annotations)));
  }
}

TEST_CASE("inference rejects what the checker rejects") {
  CHECK(code_of([] { infer_session_types(session("new x y in (x!<1>.0 | y!<2>.0)")); }) != "");
  CHECK(code_of([] { infer_session_types(session("new x y in (x!<1>.0 | y?(n).if n then 0 else 0)")); }) != "");
}

TEST_CASE("self-sending needs recursive types") {
  CHECK(code_of([] { infer_session_types(session("a!<a>.0")); }) == "occurs-check");
  CHECK(inferred("a!<a>.0", "a", true) == "rec X0.!X0.end");
}

TEST_CASE("decoding inverts the type encoding") {
  gen::Rng rng(82);
  gen::TypeOptions opts;
  opts.recursion = false;
  for (int i = 0; i < 500; ++i) {
    auto t = gen::session_type(rng, opts);
    CAPTURE(to_string(t));
    CHECK(equal(decode_type(encode_type(t)), t));
  }
}

TEST_CASE("types outside the image do not decode") {
  CHECK(code_of([] { decode_type(ptype("lin_io[Int, empty[]]")); }) == "not-decodable");
  CHECK(code_of([] { decode_type(ptype("lin_o[Int]")); }) == "not-decodable");
  CHECK(code_of([] { decode_type(ptype("<a: Int>")); }) == "not-decodable");
  CHECK(to_string(decode_type(ptype("empty[]"))) == "end");
}

TEST_CASE("the duality constraint holds exactly for dual types") {
  gen::Rng rng(83);
  gen::TypeOptions opts;
  opts.depth = 4;
  int holds = 0;
  for (int i = 0; i < 300; ++i) {
    auto a = gen::session_type(rng, opts);
    auto b = i % 2 ? complement(a) : gen::session_type(rng, opts);
    bool expected = session_tree_equal(b, complement(a));
    holds += expected;
    Unifier u(true);
    bool unified = true;
    try {
      unify(u, dual_constraint(u.from_type(encode_type(a)), u.from_type(encode_type(b))));
    } catch (const DiagnosticError&) {
      unified = false;
    }
    CAPTURE(to_string(a));
    CAPTURE(to_string(b));
    CHECK(unified == expected);
  }
  CHECK(holds >= 150);
}

TEST_CASE("constraint errors name their origin") {
  Unifier u;
  auto a = u.from_type(ptype("lin_o[Int, empty[]]"));
  auto b = u.from_type(ptype("lin_o[Int, empty[]]"));
  try {
    unify(u, dual_constraint(a, b));
    FAIL("expected a unification error");
  } catch (const DiagnosticError& e) {
    CHECK(e.diag.code == "unify");
  }
}

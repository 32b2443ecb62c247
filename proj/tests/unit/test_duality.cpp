#include <doctest.h>

#include "generators.hpp"
#include "helpers.hpp"
#include "pik/duality.hpp"
#include "pik/encoder.hpp"

using namespace pik;
using namespace pik::test;

namespace {

// Reference dual for recursion-free types.
STypePtr naive_dual(const STypePtr& s) {
  using K = SType::Kind;
  switch (s->kind) {
  case K::Send: return SType::recv(s->payload, naive_dual(s->cont));
  case K::Recv: return SType::send(s->payload, naive_dual(s->cont));
  case K::Select:
  case K::Branch: {
    SBranches bs;
    for (const auto& [l, t] : s->branches) bs[l] = naive_dual(t);
    return s->kind == K::Select ? SType::branch(bs) : SType::select(bs);
  }
  default: return s;
  }
}

// Reference subtyping for recursion-free types, by structural induction.
bool naive_sub(const STypePtr& a, const STypePtr& b) {
  using K = SType::Kind;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
  case K::End:
  case K::Unit: return true;
  case K::Base: return a->name == b->name;
  case K::Shared: return naive_sub(a->payload, b->payload) && naive_sub(b->payload, a->payload);
  case K::Recv: return naive_sub(a->payload, b->payload) && naive_sub(a->cont, b->cont);
  case K::Send: return naive_sub(b->payload, a->payload) && naive_sub(a->cont, b->cont);
  case K::Branch:
    for (const auto& [l, t] : a->branches) {
      if (!b->branches.count(l) || !naive_sub(t, b->branches.at(l))) return false;
    }
    return true;
  case K::Select:
    for (const auto& [l, t] : b->branches) {
      if (!a->branches.count(l) || !naive_sub(a->branches.at(l), t)) return false;
    }
    return true;
  default: return false;
  }
}

} // namespace

TEST_CASE("dual swaps directions and choices") {
  CHECK(to_string(dual(stype("?Int.?Int.!Bool.end"))) == "!Int.!Int.?Bool.end");
  CHECK(to_string(dual(stype("+{a: !Int.end, b: end}"))) == "&{a: ?Int.end, b: end}");
  CHECK(to_string(dual(stype("end"))) == "end");
}

TEST_CASE("dual agrees with the reference on recursion-free types") {
  gen::Rng rng(21);
  gen::TypeOptions opts;
  opts.recursion = false;
  for (int i = 0; i < 500; ++i) {
    auto s = gen::session_type(rng, opts);
    CAPTURE(to_string(s));
    CHECK(equal(dual(s), naive_dual(s)));
    CHECK(equal(dual(dual(s)), s));
  }
}

TEST_CASE("complement keeps payload occurrences of recursion variables") {
  // The payload X names the whole type, not its dual.
  auto s = stype("rec X.!X.end");
  auto c = complement(s);
  CHECK(session_tree_equal(c, stype("?(rec X.!X.end).end")));
  CHECK(session_tree_equal(complement(complement(s)), s));
}

TEST_CASE("complement is an involution up to unfolding") {
  gen::Rng rng(22);
  gen::TypeOptions opts;
  for (int i = 0; i < 500; ++i) {
    auto s = gen::session_type(rng, opts);
    CAPTURE(to_string(s));
    CHECK(session_tree_equal(complement(complement(s)), s));
  }
}

TEST_CASE("subtyping on choices") {
  CHECK(session_subtype(stype("+{a: end, b: end}"), stype("+{a: end}")).holds);
  CHECK_FALSE(session_subtype(stype("+{a: end}"), stype("+{a: end, b: end}")).holds);
  CHECK(session_subtype(stype("&{a: end}"), stype("&{a: end, b: end}")).holds);
  CHECK_FALSE(session_subtype(stype("&{a: end, b: end}"), stype("&{a: end}")).holds);
}

TEST_CASE("subtyping on payloads") {
  CHECK(session_subtype(stype("?(&{a: end}).end"), stype("?(&{a: end, b: end}).end")).holds);
  CHECK(session_subtype(stype("!(&{a: end, b: end}).end"), stype("!(&{a: end}).end")).holds);
  CHECK_FALSE(session_subtype(stype("!(&{a: end}).end"), stype("!(&{a: end, b: end}).end")).holds);
  CHECK_FALSE(session_subtype(stype("!Int.end"), stype("!Bool.end")).holds);
}

TEST_CASE("subtyping unfolds recursion") {
  CHECK(session_subtype(stype("rec X.!Int.X"), stype("!Int.rec Y.!Int.Y")).holds);
  CHECK(session_subtype(stype("rec X.+{a: X, b: end}"), stype("rec Y.+{a: Y}")).holds);
  CHECK_FALSE(session_subtype(stype("rec Y.+{a: Y}"), stype("rec X.+{a: X, b: end}")).holds);
}

TEST_CASE("a failed judgement names the failing pair") {
  auto j = session_subtype(stype("!Int.end"), stype("?Int.end"));
  CHECK_FALSE(j.holds);
  CHECK_FALSE(j.derivation.empty());
}

TEST_CASE("subtyping agrees with the reference on recursion-free pairs") {
  gen::Rng rng(23);
  gen::TypeOptions opts;
  opts.recursion = false;
  opts.depth = 4;
  int holds = 0;
  for (int i = 0; i < 1000; ++i) {
    auto [a, b] = gen::subtype_pair(rng, opts);
    CAPTURE(to_string(a));
    CAPTURE(to_string(b));
    bool expected = naive_sub(a, b);
    holds += expected;
    CHECK(session_subtype(a, b).holds == expected);
  }
  CHECK(holds > 100);
  CHECK(holds < 900);
}

TEST_CASE("subtyping is reflexive and transitive on samples") {
  gen::Rng rng(24);
  gen::TypeOptions opts;
  for (int i = 0; i < 300; ++i) {
    auto [a, b] = gen::subtype_pair(rng, opts);
    CHECK(session_subtype(a, a).holds);
    auto [b2, c] = gen::subtype_pair(rng, opts);
    (void)b2;
    if (session_subtype(a, b).holds && session_subtype(b, c).holds) CHECK(session_subtype(a, c).holds);
  }
}

TEST_CASE("pi subtyping on capabilities") {
  CHECK(pi_subtype(ptype("lin_i[<a: Unit>]"), ptype("lin_i[<a: Unit, b: Unit>]")).holds);
  CHECK_FALSE(pi_subtype(ptype("lin_i[Int]"), ptype("lin_o[Int]")).holds);
  CHECK(pi_subtype(ptype("lin_o[<a: Unit, b: Unit>]"), ptype("lin_o[<a: Unit>]")).holds);
  CHECK(pi_subtype(ptype("empty[]"), ptype("empty[]")).holds);
}

TEST_CASE("tree equality sees through unfolding") {
  CHECK(pi_tree_equal(ptype("rec X.lin_i[X]"), ptype("lin_i[rec Y.lin_i[Y]]")));
  CHECK_FALSE(pi_tree_equal(ptype("rec X.lin_i[X]"), ptype("lin_o[rec Y.lin_i[Y]]")));
  CHECK(session_tree_equal(stype("rec X.!Int.X"), stype("!Int.!Int.rec X.!Int.X")));
}

TEST_CASE("the subtyping theorem check holds on samples") {
  gen::Rng rng(25);
  gen::TypeOptions opts;
  for (int i = 0; i < 200; ++i) {
    auto [a, b] = gen::subtype_pair(rng, opts);
    CHECK(check_subtyping_theorem(a, b));
  }
}

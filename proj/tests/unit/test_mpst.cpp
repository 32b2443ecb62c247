#include <doctest.h>

#include "generators.hpp"
#include "helpers.hpp"
#include "pik/duality.hpp"
#include "pik/inference.hpp"
#include "pik/mpst.hpp"

using namespace pik;
using namespace pik::test;

namespace {

const std::vector<std::string> kRoles = {"a", "b", "c"};

MultipartyTypePtr random_global(gen::Rng& rng, int depth) {
  if (depth == 0 || rng() % 4 == 0) return MultipartyType::end();
  std::map<std::string, MultipartyBranch> bs;
  int n = 1 + static_cast<int>(rng() % 2);
  // Branches often share a continuation so that some choices project.
  auto shared = random_global(rng, depth - 1);
  for (int i = 0; i < n; ++i) {
    Payload u;
    u.base = rng() % 2 ? "Int" : "Bool";
    bs["l" + std::to_string(i)] = {u, rng() % 3 ? shared : random_global(rng, depth - 1)};
  }
  const auto& role = kRoles[rng() % kRoles.size()];
  return rng() % 2 ? MultipartyType::select(role, bs) : MultipartyType::branch(role, bs);
}

// Reference projection for recursion-free types; empty on failure.
std::string naive_project(const MultipartyTypePtr& s, const std::string& q) {
  using K = MultipartyType::Kind;
  if (s->kind == K::End) return "end";
  if (s->role == q) {
    std::string out = s->kind == K::Select ? "+{" : "&{";
    bool first = true;
    for (const auto& [l, b] : s->branches) {
      auto c = naive_project(b.cont, q);
      if (c.empty()) return "";
      out += (first ? "" : ", ") + l + "(" + b.payload.base + ")." + c;
      first = false;
    }
    return out + "}";
  }
  std::string common;
  for (const auto& [l, b] : s->branches) {
    auto c = naive_project(b.cont, q);
    if (c.empty() || (!common.empty() && c != common)) return "";
    common = c;
  }
  return common;
}

} // namespace

TEST_CASE("local types print back to their source") {
  for (const char* src : {"end", "+{l(Int).end}", "&{a(Int).end, b(Bool).end}", "rec X.+{ping(Int).&{pong(Int).X}}"}) {
    CAPTURE(src);
    CHECK(to_string(parse_local_type(src)) == src);
  }
}

TEST_CASE("projection keeps actions of the role and merges the rest") {
  auto s = parse_multiparty_type("b&{job(Int).c+{job(Int).c&{done(Bool).b+{result(Bool).end}}}}");
  CHECK(roles(s) == std::vector<std::string>{"b", "c"});
  CHECK(to_string(project(s, "b")) == "&{job(Int).+{result(Bool).end}}");
  CHECK(to_string(project(s, "c")) == "+{job(Int).&{done(Bool).end}}");
}

TEST_CASE("a choice invisible to a role must not change its behaviour") {
  auto s = parse_multiparty_type("b+{l.c+{m.end}, r.c&{m.end}}");
  CHECK(code_of([&] { project(s, "c"); }) == "not-projectable");
  CHECK(code_of([&] { project(s, "b"); }).empty());
  CHECK(code_of([] { parse_multiparty_type("rec X.X"); }) == "unguarded");
}

TEST_CASE("projection agrees with the reference on recursion-free types") {
  gen::Rng rng(91);
  int projectable = 0, rejected = 0;
  for (int i = 0; i < 500; ++i) {
    auto s = random_global(rng, 4);
    for (const auto& q : kRoles) {
      auto expected = naive_project(s, q);
      CAPTURE(to_string(s));
      CAPTURE(q);
      std::string got;
      try {
        got = to_string(project(s, q));
      } catch (const DiagnosticError& e) {
        CHECK(e.diag.code == "not-projectable");
      }
      CHECK(got == expected);
      (expected.empty() ? rejected : projectable)++;
    }
  }
  CHECK(projectable > 100);
  CHECK(rejected > 10);
}

TEST_CASE("encoding of local types") {
  CHECK(to_string(encode_local(parse_local_type("end"))) == "empty[]");
  CHECK(to_string(encode_local(parse_local_type("+{l(Int).end}"))) == "lin_o[<l: (Int, empty[])>]");
  CHECK(to_string(encode_local(parse_local_type("&{l(Int).&{m(Bool).end}}"))) ==
        "lin_i[<l: (Int, lin_i[<m: (Bool, empty[])>])>]");
  // The select continuation is carried from the receiver's point of view.
  CHECK(to_string(encode_local(parse_local_type("+{l(Int).+{m(Bool).end}}"))) ==
        "lin_o[<l: (Int, lin_i[<m: (Bool, empty[])>])>]");
  CHECK(to_string(encode_local(parse_local_type("+{c(&{v(Int).end}).end}"))) ==
        "lin_o[<c: (lin_i[<v: (Int, empty[])>], empty[])>]");
}

TEST_CASE("dual local types encode to swapped capabilities") {
  gen::Rng rng(92);
  for (int i = 0; i < 300; ++i) {
    auto s = random_global(rng, 4);
    for (const auto& q : kRoles) {
      if (naive_project(s, q).empty()) continue;
      auto h = project(s, q);
      CAPTURE(to_string(h));
      CHECK(pi_tree_equal(encode_local(dual(h)), swap_caps(encode_local(h))));
      CHECK(to_string(dual(dual(h))) == to_string(h));
    }
  }
}

TEST_CASE("encoded projections decode to binary session types") {
  auto enc = encode_mpst(parse_multiparty_type("a&{go.c+{note(Int).end}, halt.c+{note(Int).end}}"));
  REQUIRE(enc.size() == 2);
  CHECK(to_string(decode_type(enc.at("a"))) == "&{go: ?Unit.end, halt: ?Unit.end}");
  CHECK(to_string(decode_type(enc.at("c"))) == "+{note: !Int.end}");
}

TEST_CASE("recursive two-role types are dual") {
  auto a = encode_mpst(parse_multiparty_type("rec X.b+{ping(Int).b&{pong(Int).X, stop.end}}")).at("b");
  auto b = encode_mpst(parse_multiparty_type("rec X.a&{ping(Int).a+{pong(Int).X, stop.end}}")).at("a");
  CHECK(pi_tree_equal(swap_caps(a), b));
  CHECK_FALSE(pi_tree_equal(a, b));
}

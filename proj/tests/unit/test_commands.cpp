#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "pik/commands.hpp"

using namespace pik;
namespace fs = std::filesystem;

namespace {

Outcome inline_verb(const std::string& verb, std::vector<std::string> inputs, const std::string& env = "") {
  RunConfig cfg;
  cfg.verb = verb;
  cfg.inputs = std::move(inputs);
  cfg.inline_text = true;
  cfg.env = env;
  return execute(cfg);
}

const char* kEq = "new x y in (x?(z1).x?(z2).x!<z1==z2>.0 | y!<3>.y!<5>.y?(eq).0)";

} // namespace

TEST_CASE("check reports ok or a diagnostic with exit 1") {
  CHECK(inline_verb("check", {kEq}).exit == 0);
  auto bad = inline_verb("check", {"x!<1>.0 | x!<2>.0"}, "x: !Int.end");
  CHECK(bad.exit == 1);
  CHECK(bad.data["ok"] == false);
  CHECK(bad.data["code"] == "linearity");
  CHECK_FALSE(bad.errors.empty());
}

TEST_CASE("parse errors exit with 2") {
  auto r = inline_verb("check", {"new x y in (x!<1 .0 | 0)"});
  CHECK(r.exit == 2);
  CHECK(r.data["code"] == "syntax");
  CHECK(inline_verb("parse", {"rec X.X"}).exit == 2);
}

TEST_CASE("dual and subtype") {
  auto d = inline_verb("dual", {"?Int.!Bool.end"});
  CHECK(d.exit == 0);
  CHECK(d.data["dual"] == "!Int.?Bool.end");
  CHECK(inline_verb("subtype", {"+{a: end, b: end}", "+{a: end}"}).exit == 0);
  auto no = inline_verb("subtype", {"+{a: end}", "+{a: end, b: end}"});
  CHECK(no.exit == 1);
  CHECK(no.data["holds"] == false);
  CHECK(no.data["encoded_holds"] == false);
}

TEST_CASE("encode a process and a type") {
  auto e = inline_verb("encode", {kEq});
  CHECK(e.exit == 0);
  CHECK(e.data.contains("process"));
  RunConfig cfg;
  cfg.verb = "encode";
  cfg.inputs = {"!Int.end"};
  cfg.inline_text = true;
  cfg.type_only = true;
  auto t = execute(cfg);
  CHECK(t.data["type"] == "lin_o[Int, empty[]]");
}

TEST_CASE("encode with a merge renaming writes a sidecar") {
  auto dir = fs::temp_directory_path() / "pik_commands_test";
  fs::create_directories(dir);
  RunConfig cfg;
  cfg.verb = "encode";
  cfg.inputs = {"x!<1>.0 | y?(n).0"};
  cfg.inline_text = true;
  cfg.env = "x: !Int.end; y: ?Int.end";
  cfg.merges = {{"x", "y"}};
  cfg.sidecar = (dir / "map.json").string();
  auto r = execute(cfg);
  CHECK(r.exit == 0);
  std::ifstream in(cfg.sidecar);
  REQUIRE(in.good());
  auto j = nlohmann::json::parse(in);
  CHECK(j["x"] == j["y"]);
  fs::remove_all(dir);
}

TEST_CASE("run is deterministic for a seed") {
  RunConfig cfg;
  cfg.verb = "run";
  cfg.inputs = {kEq};
  cfg.inline_text = true;
  cfg.seed = 5;
  auto a = execute(cfg), b = execute(cfg);
  CHECK(a.exit == 0);
  CHECK(a.data == b.data);
  CHECK(a.data["steps"] == 3);
  CHECK(a.data["normal"] == true);
}

TEST_CASE("correspond, deadlock and infer") {
  CHECK(inline_verb("correspond", {kEq}).data["ok"] == true);
  auto d = inline_verb("deadlock", {"new x1 x2 in new y1 y2 in (x1?(z).y1!<z>.0 | y2?(w).x2!<w>.0)"});
  CHECK(d.exit == 1);
  CHECK(d.data["ok"] == false);
  CHECK(d.data["cycle"].size() == 2);
  auto i = inline_verb("infer", {kEq});
  CHECK(i.exit == 0);
  CHECK(i.data["types"]["x"] == "?Int.?Int.!Bool.end");
}

TEST_CASE("mpst projects every role") {
  auto m = inline_verb("mpst", {"b&{job(Int).c+{job(Int).end}}"});
  CHECK(m.exit == 0);
  CHECK(m.data["roles"].contains("b"));
  CHECK(m.data["roles"]["c"]["local"] == "+{job(Int).end}");
  CHECK(inline_verb("mpst", {"b+{l.c+{m.end}, r.c&{m.end}}"}).exit == 1);
}

TEST_CASE("unknown verbs are usage errors") {
  CHECK(inline_verb("frobnicate", {"0"}).exit == 2);
}

TEST_CASE("the corpus passes") {
  auto report = run_corpus(PIK_CORPUS_DIR);
  for (const auto& r : report.results) {
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.passed);
  }
  CHECK(report.results.size() >= 40);
}

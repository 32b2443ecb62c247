#include "pik/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

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

namespace pik {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Source {
  std::string text;
  std::string file;
};

Source source(const RunConfig& cfg, std::size_t i) {
  if (i >= cfg.inputs.size()) fail("syntax", "verb " + cfg.verb + " needs " + std::to_string(i + 1) + " input(s)");
  if (cfg.inline_text) return {cfg.inputs[i], "<inline>"};
  std::ifstream in(cfg.inputs[i]);
  if (!in) throw std::runtime_error("cannot read " + cfg.inputs[i]);
  std::stringstream ss;
  ss << in.rdbuf();
  return {ss.str(), cfg.inputs[i]};
}

Calculus calculus_of(const RunConfig& cfg, const Source& s) {
  if (cfg.calculus) return *cfg.calculus;
  return fs::path(s.file).extension() == ".lpi" ? Calculus::Pi : Calculus::Session;
}

const char* calculus_name(Calculus c) { return c == Calculus::Session ? "session" : "pi"; }

RenamingFunction renaming_for(const RunConfig& cfg, const ProcPtr& p, const SessionEnv& env) {
  auto names = free_names(p);
  for (const auto& [x, t] : env) names.insert(x);
  auto f = RenamingFunction::identity(names);
  auto avoid = all_names(p);
  for (const auto& [x, t] : env) avoid.insert(x);
  for (const auto& [x, y] : cfg.merges) {
    if (!names.count(x) || !names.count(y) || x == y) {
      fail("invalid-renaming", "--merge needs two distinct free names, got " + x + " and " + y);
    }
    auto c = fresh_name("m", avoid);
    avoid.insert(c);
    f.map[x] = c;
    f.map[y] = c;
  }
  validate_renaming(f, p, env);
  return f;
}

// Source prefixes whose subject is one of the given channels.
void prefixes_on(const ProcPtr& p, const std::set<std::string>& chans, std::vector<std::string>& out) {
  if (!p) return;
  if (p->is_prefix() && chans.count(p->chan)) {
    auto text = pretty_print(p);
    auto dot = text.find(").");
    auto cut = text.find('.', dot == std::string::npos ? 0 : dot + 1);
    out.push_back(cut == std::string::npos ? text : text.substr(0, cut));
  }
  prefixes_on(p->cont, chans, out);
  prefixes_on(p->left, chans, out);
  prefixes_on(p->right, chans, out);
  for (const auto& [l, a] : p->arms) prefixes_on(a.body, chans, out);
}

Outcome verb_parse(const RunConfig& cfg) {
  auto s = source(cfg, 0);
  Outcome o;
  if (fs::path(s.file).extension() == ".mpst") {
    auto t = parse_multiparty_type(s.text, s.file);
    o.data = {{"ok", true}, {"type", to_string(t)}};
    o.text = to_string(t) + "\n";
    return o;
  }
  auto c = calculus_of(cfg, s);
  auto p = parse_process(s.text, c, s.file);
  o.data = {{"ok", true}, {"calculus", calculus_name(c)}, {"ast", to_json(p)}, {"text", pretty_print(p)}};
  o.text = pretty_print(p) + "\n";
  return o;
}

Outcome verb_check(const RunConfig& cfg) {
  auto s = source(cfg, 0);
  auto c = calculus_of(cfg, s);
  auto p = parse_process(s.text, c, s.file);
  if (c == Calculus::Session) {
    check_session(parse_session_env(cfg.env, "--env"), p);
  } else {
    check_pi(parse_pi_env(cfg.env, "--env"), p);
  }
  Outcome o;
  o.data = {{"ok", true}, {"calculus", calculus_name(c)}};
  o.text = "ok\n";
  return o;
}

Outcome verb_dual(const RunConfig& cfg) {
  Outcome o;
  o.data = {{"ok", true}, {"types", json::array()}};
  for (std::size_t i = 0; i < cfg.inputs.size(); ++i) {
    auto s = source(cfg, i);
    auto t = parse_session_type(s.text, s.file);
    auto d = dual(t);
    o.data["types"].push_back({{"type", to_string(t)}, {"dual", to_string(d)}});
    o.text += to_string(d) + "\n";
  }
  if (cfg.inputs.size() == 1) o.data["dual"] = o.data["types"][0]["dual"];
  return o;
}

Outcome verb_subtype(const RunConfig& cfg) {
  auto a = source(cfg, 0), b = source(cfg, 1);
  Outcome o;
  SubtypeJudgement j;
  if (cfg.calculus == Calculus::Pi) {
    j = pi_subtype(parse_pi_type(a.text, a.file), parse_pi_type(b.text, b.file));
  } else {
    auto sa = parse_session_type(a.text, a.file), sb = parse_session_type(b.text, b.file);
    j = session_subtype(sa, sb);
    o.data["encoded_holds"] = pi_subtype(encode_type(sa), encode_type(sb)).holds;
  }
  o.data["ok"] = true;
  o.data["holds"] = j.holds;
  o.data["left"] = j.left;
  o.data["right"] = j.right;
  o.data["derivation"] = j.derivation;
  o.text = j.left + (j.holds ? " <: " : " </: ") + j.right + "\n";
  o.exit = j.holds ? 0 : 1;
  return o;
}

Outcome verb_encode(const RunConfig& cfg) {
  Outcome o;
  if (cfg.type_only) {
    o.data = {{"ok", true}, {"types", json::array()}};
    for (std::size_t i = 0; i < cfg.inputs.size(); ++i) {
      auto s = source(cfg, i);
      auto t = encode_type(parse_session_type(s.text, s.file));
      o.data["types"].push_back(to_string(t));
      o.text += to_string(t) + "\n";
    }
    if (cfg.inputs.size() == 1) o.data["type"] = o.data["types"][0];
    return o;
  }
  auto s = source(cfg, 0);
  auto p = parse_process(s.text, Calculus::Session, s.file);
  auto env = parse_session_env(cfg.env, "--env");
  auto f = renaming_for(cfg, p, env);
  FreshNameSupply supply;
  auto q = encode_process(p, f, supply);
  json renaming = f.map;
  json fresh = supply.origins();
  o.data = {{"ok", true}, {"process", pretty_print(q)}, {"renaming", renaming}, {"fresh", fresh},
            {"env", to_string(encode_env(env, f))}};
  o.text = pretty_print(q) + "\n";
  if (!cfg.sidecar.empty()) {
    std::ofstream out(cfg.sidecar);
    if (!out) throw std::runtime_error("cannot write " + cfg.sidecar);
    out << json{{"renaming", renaming}, {"fresh", fresh}}.dump(2) << "\n";
  }
  return o;
}

Outcome verb_run(const RunConfig& cfg) {
  auto s = source(cfg, 0);
  auto c = calculus_of(cfg, s);
  auto p = parse_process(s.text, c, s.file);
  auto trace = run(p, c, cfg.seed, cfg.steps);
  Outcome o;
  o.data = {{"ok", true}, {"trace", json::array()}};
  int n = 0;
  for (const auto& t : trace) {
    json line = {{"step", ++n}, {"rule", t.redex.rule}, {"before-hash", process_hash(t.before)}, {"after", pretty_print(t.after)}};
    o.text += line.dump() + "\n";
    o.data["trace"].push_back(line);
  }
  auto final_state = trace.empty() ? p : trace.back().after;
  o.data["steps"] = n;
  o.data["final"] = pretty_print(final_state);
  o.data["normal"] = redexes(final_state, c).empty();
  return o;
}

Outcome verb_correspond(const RunConfig& cfg) {
  auto s = source(cfg, 0);
  auto p = parse_process(s.text, Calculus::Session, s.file);
  auto f = renaming_for(cfg, p, parse_session_env(cfg.env, "--env"));
  auto rep = correspondence_check(p, f, cfg.depth);
  Outcome o;
  int restricted = 0;
  json failures = json::array();
  for (const auto& e : rep.entries) {
    restricted += e.restricted;
    if (e.witness.empty()) {
      failures.push_back({{"clause", e.clause}, {"source", pretty_print(e.source)}, {"step", e.step}});
    }
  }
  o.data = {{"ok", rep.ok()},
            {"states", rep.states},
            {"checked", rep.entries.size()},
            {"counterexamples", rep.counterexamples()},
            {"restricted", restricted},
            {"failures", failures}};
  o.text = std::to_string(rep.states) + " states, " + std::to_string(rep.entries.size()) + " steps checked, " +
           std::to_string(rep.counterexamples()) + " counterexamples\n";
  if (!rep.ok()) {
    o.exit = 1;
    for (const auto& f2 : failures) o.errors += "counterexample: " + f2.dump() + "\n";
  }
  return o;
}

Outcome verb_deadlock(const RunConfig& cfg) {
  auto s = source(cfg, 0);
  auto c = calculus_of(cfg, s);
  auto p = parse_process(s.text, c, s.file);
  DeadlockOptions opts;
  opts.polymorphic = !cfg.monomorphic;
  DeadlockReport r;
  std::set<std::string> subjects;
  if (c == Calculus::Session) {
    auto env = parse_session_env(cfg.env, "--env");
    check_session(env, p);
    r = check_deadlock_session(p, env, opts);
    for (const auto& ch : r.channels) {
      auto slash = ch.find('/');
      subjects.insert(ch.substr(0, slash));
      if (slash != std::string::npos) subjects.insert(ch.substr(slash + 1));
    }
  } else {
    r = infer_priorities(p, parse_pi_env(cfg.env, "--env"), opts);
    subjects = r.channels;
  }
  Outcome o;
  if (r.ok) {
    o.data = {{"ok", true}, {"priorities", r.priorities}};
    for (const auto& [x, v] : r.priorities) o.text += x + ": " + std::to_string(v) + "\n";
    return o;
  }
  std::vector<std::string> locations;
  prefixes_on(p, subjects, locations);
  o.data = {{"ok", false}, {"cycle", r.cycle}, {"channels", r.channels}, {"locations", locations}};
  o.text = json{{"cycle", r.cycle}, {"locations", locations}}.dump() + "\n";
  o.errors = r.diagnostic().to_string() + "\n";
  o.exit = 1;
  return o;
}

Outcome verb_infer(const RunConfig& cfg) {
  auto s = source(cfg, 0);
  auto p = parse_process(s.text, Calculus::Session, s.file);
  auto r = infer_session_types(p, parse_session_env(cfg.env, "--env"), cfg.rec_types);
  Outcome o;
  json types = json::object();
  if (cfg.encoded) {
    for (const auto& [x, t] : r.encoded) types[x] = to_string(t);
  } else {
    for (const auto& [x, t] : r.env) types[x] = to_string(t);
  }
  o.data = {{"ok", true}, {"types", types}, {"process", pretty_print(annotate_process(p, r.annotations))}};
  for (const auto& [x, t] : types.items()) o.text += x + ": " + t.get<std::string>() + "\n";
  return o;
}

Outcome verb_mpst(const RunConfig& cfg) {
  auto s = source(cfg, 0);
  auto t = parse_multiparty_type(s.text, s.file);
  Outcome o;
  json roles = json::object();
  for (const auto& [r, h] : project_all(t)) {
    auto e = encode_local(h);
    roles[r] = {{"local", to_string(h)}, {"encoded", to_string(e)}, {"decoded", to_string(decode_type(e))}};
    o.text += r + ": " + to_string(e) + "\n";
  }
  o.data = {{"ok", true}, {"type", to_string(t)}, {"roles", roles}};
  return o;
}

Outcome verb_corpus(const RunConfig& cfg) {
  if (cfg.inputs.empty()) fail("syntax", "corpus needs a directory");
  auto rep = run_corpus(cfg.inputs[0]);
  Outcome o;
  json cases = json::array();
  for (const auto& r : rep.results) {
    cases.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    o.text += std::string(r.passed ? "PASS " : "FAIL ") + r.name + (r.detail.empty() ? "" : ": " + r.detail) + "\n";
  }
  o.text += std::to_string(rep.passed()) + " passed, " + std::to_string(rep.failed()) + " failed\n";
  o.data = {{"ok", rep.failed() == 0}, {"passed", rep.passed()}, {"failed", rep.failed()}, {"cases", cases}};
  o.exit = rep.failed() == 0 ? 0 : 1;
  return o;
}

bool usage_code(const std::string& code) {
  return code == "syntax" || code == "unguarded" || code == "wrong-calculus" || code == "invalid-renaming" ||
         code == "unmapped-name";
}

} // namespace

Outcome execute(const RunConfig& cfg) {
  try {
    if (cfg.verb == "parse") return verb_parse(cfg);
    if (cfg.verb == "check") return verb_check(cfg);
    if (cfg.verb == "dual") return verb_dual(cfg);
    if (cfg.verb == "subtype") return verb_subtype(cfg);
    if (cfg.verb == "encode") return verb_encode(cfg);
    if (cfg.verb == "run") return verb_run(cfg);
    if (cfg.verb == "correspond") return verb_correspond(cfg);
    if (cfg.verb == "deadlock") return verb_deadlock(cfg);
    if (cfg.verb == "infer") return verb_infer(cfg);
    if (cfg.verb == "mpst") return verb_mpst(cfg);
    if (cfg.verb == "corpus") return verb_corpus(cfg);
    Outcome o;
    o.exit = 2;
    o.data = {{"ok", false}, {"code", "usage"}, {"message", "unknown verb " + cfg.verb}};
    o.errors = "unknown verb " + cfg.verb + "\n";
    return o;
  } catch (const DiagnosticError& e) {
    Outcome o;
    o.exit = usage_code(e.diag.code) ? 2 : 1;
    o.data = {{"ok", false}, {"code", e.diag.code}, {"message", e.diag.message}};
    o.errors = e.diag.to_string() + "\n";
    return o;
  } catch (const std::exception& e) {
    Outcome o;
    o.exit = 2;
    o.data = {{"ok", false}, {"code", "usage"}, {"message", e.what()}};
    o.errors = std::string("error: ") + e.what() + "\n";
    return o;
  }
}

// ============================================================================
// Corpus
// ============================================================================

int CorpusReport::passed() const {
  return static_cast<int>(std::count_if(results.begin(), results.end(), [](const CorpusResult& r) { return r.passed; }));
}

int CorpusReport::failed() const { return static_cast<int>(results.size()) - passed(); }

std::vector<CorpusCase> load_corpus(const std::string& dir) {
  std::vector<CorpusCase> cases;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".expect") continue;
    CorpusCase c;
    c.name = entry.path().stem().string();
    std::ifstream in(entry.path());
    try {
      c.spec = json::parse(in);
    } catch (const json::exception& e) {
      throw std::runtime_error(entry.path().string() + ": " + e.what());
    }
    if (c.spec.contains("file")) {
      c.input = (fs::path(dir) / c.spec["file"].get<std::string>()).string();
    } else {
      for (const char* ext : {".spi", ".lpi", ".mpst"}) {
        auto candidate = fs::path(dir) / (c.name + ext);
        if (fs::exists(candidate)) {
          c.input = candidate.string();
          break;
        }
      }
    }
    cases.push_back(std::move(c));
  }
  std::sort(cases.begin(), cases.end(), [](const CorpusCase& a, const CorpusCase& b) { return a.name < b.name; });
  return cases;
}

RunConfig corpus_config(const CorpusCase& c) {
  const auto& s = c.spec;
  RunConfig cfg;
  cfg.verb = s.value("verb", "check");
  if (s.contains("input")) {
    cfg.inline_text = true;
    if (s["input"].is_array()) {
      for (const auto& x : s["input"]) cfg.inputs.push_back(x.get<std::string>());
    } else {
      cfg.inputs.push_back(s["input"].get<std::string>());
    }
  } else if (!c.input.empty()) {
    cfg.inputs.push_back(c.input);
  }
  if (s.contains("calculus")) cfg.calculus = s["calculus"] == "pi" ? Calculus::Pi : Calculus::Session;
  cfg.env = s.value("env", "");
  cfg.seed = s.value("seed", 0ULL);
  cfg.depth = s.value("depth", 3);
  cfg.steps = s.value("steps", 1000);
  cfg.rec_types = s.value("rec_types", false);
  cfg.encoded = s.value("encoded", false);
  cfg.monomorphic = s.value("monomorphic", false);
  cfg.type_only = s.value("type", false);
  if (s.contains("merge")) {
    for (const auto& m : s["merge"]) cfg.merges.emplace_back(m.at(0).get<std::string>(), m.at(1).get<std::string>());
  }
  return cfg;
}

CorpusResult run_case(const CorpusCase& c) {
  CorpusResult r{c.name, true, ""};
  auto o = execute(corpus_config(c));
  auto miss = [&](const std::string& why) {
    if (!r.passed) return;
    r.passed = false;
    r.detail = why;
  };
  if (c.spec.contains("exit") && c.spec["exit"].get<int>() != o.exit) {
    miss("exit " + std::to_string(o.exit) + ", expected " + std::to_string(c.spec["exit"].get<int>()) +
         (o.errors.empty() ? "" : " (" + o.errors.substr(0, o.errors.size() - 1) + ")"));
  }
  if (c.spec.contains("expect")) {
    for (const auto& [key, want] : c.spec["expect"].items()) {
      if (key == "alpha") {
        bool same = false;
        try {
          same = o.data.contains("process") &&
                 alpha_equiv(parse_process(o.data["process"].get<std::string>(), Calculus::Pi),
                             parse_process(want.get<std::string>(), Calculus::Pi));
        } catch (const DiagnosticError&) {
          same = false;
        }
        if (!same) miss("encoding is not alpha-equivalent to the golden term");
      } else if (!o.data.contains(key)) {
        miss("no field " + key + " in the result");
      } else if (o.data[key] != want) {
        miss(key + " is " + o.data[key].dump() + ", expected " + want.dump());
      }
    }
  }
  return r;
}

CorpusReport run_corpus(const std::string& dir) {
  CorpusReport rep;
  for (const auto& c : load_corpus(dir)) rep.results.push_back(run_case(c));
  return rep;
}

} // namespace pik

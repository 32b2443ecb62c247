// pik: command-line front end for session and linear pi processes.
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "pik/commands.hpp"

namespace {

struct Shared {
  std::string calculus;
  std::string env;
  std::uint64_t seed = 0;
  int depth = 3;
  int steps = 1000;
  bool json = false;
  bool inline_text = false;
};

void common(CLI::App* sub, Shared& s, std::vector<std::string>& inputs, const char* what) {
  sub->add_option("inputs", inputs, what)->required();
  sub->add_option("--calculus", s.calculus, "session or pi")->check(CLI::IsMember({"session", "pi"}));
  sub->add_option("--env", s.env, "typing context, e.g. \"x: !Int.end; y: end\"");
  sub->add_flag("--json", s.json, "print the result as JSON");
  sub->add_flag("-e,--inline", s.inline_text, "inputs are source text rather than file names");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"pik: session types and linear pi types"};
  app.require_subcommand(1);

  Shared s;
  std::vector<std::string> inputs;
  bool rec_types = false, encoded = false, monomorphic = false, type_only = false;
  std::vector<std::string> merge;
  std::string sidecar;

  auto* parse = app.add_subcommand("parse", "parse and pretty-print a process");
  common(parse, s, inputs, "process file");
  auto* check = app.add_subcommand("check", "type-check a process");
  common(check, s, inputs, "process file");
  auto* dual = app.add_subcommand("dual", "dual of session types");
  common(dual, s, inputs, "session type files");
  auto* subtype = app.add_subcommand("subtype", "decide A <: B");
  common(subtype, s, inputs, "two type files");
  auto* encode = app.add_subcommand("encode", "encode a session process or type");
  common(encode, s, inputs, "process or type files");
  encode->add_flag("--type", type_only, "the inputs are session types");
  encode->add_option("--merge", merge, "map two free names to one fresh channel")->expected(2)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  encode->add_option("--sidecar", sidecar, "write the renaming and fresh names to this file");
  auto* run = app.add_subcommand("run", "reduce a process with a seeded scheduler");
  common(run, s, inputs, "process file");
  run->add_option("--seed", s.seed, "scheduler seed (PIK_SEED overrides the default)");
  run->add_option("--steps", s.steps, "maximum number of steps");
  auto* correspond = app.add_subcommand("correspond", "check operational correspondence of the encoding");
  common(correspond, s, inputs, "session process file");
  correspond->add_option("--depth", s.depth, "exploration depth");
  correspond->add_option("--merge", merge, "map two free names to one fresh channel")->expected(2)->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  auto* deadlock = app.add_subcommand("deadlock", "priority-based deadlock check");
  common(deadlock, s, inputs, "process file");
  deadlock->add_flag("--monomorphic", monomorphic, "no priority polymorphism on shared channels");
  auto* infer = app.add_subcommand("infer", "infer session types of an unannotated process");
  common(infer, s, inputs, "session process file");
  infer->add_flag("--rec-types", rec_types, "fold regular trees into recursive types");
  infer->add_flag("--encoded", encoded, "print the inferred linear pi types");
  auto* mpst = app.add_subcommand("mpst", "multiparty session types");
  mpst->require_subcommand(1);
  auto* mpst_encode = mpst->add_subcommand("encode", "project onto each role and encode");
  common(mpst_encode, s, inputs, "multiparty type file");
  auto* corpus = app.add_subcommand("corpus", "replay a directory of .expect cases");
  common(corpus, s, inputs, "corpus directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  pik::RunConfig cfg;
  auto* sub = app.get_subcommands().front();
  cfg.verb = sub->get_name();
  cfg.inputs = inputs;
  cfg.inline_text = s.inline_text;
  if (s.calculus == "session") cfg.calculus = pik::Calculus::Session;
  if (s.calculus == "pi") cfg.calculus = pik::Calculus::Pi;
  cfg.env = s.env;
  cfg.seed = s.seed;
  if (cfg.verb == "run" && run->count("--seed") == 0) {
    if (const char* env_seed = std::getenv("PIK_SEED")) {
      try {
        cfg.seed = std::stoull(env_seed);
      } catch (const std::exception&) {
        std::cerr << "error: PIK_SEED is not a number\n";
        return 2;
      }
    }
  }
  cfg.depth = s.depth;
  cfg.steps = s.steps;
  cfg.json = s.json;
  cfg.rec_types = rec_types;
  cfg.encoded = encoded;
  cfg.monomorphic = monomorphic;
  cfg.type_only = type_only;
  for (std::size_t i = 0; i + 1 < merge.size(); i += 2) cfg.merges.emplace_back(merge[i], merge[i + 1]);
  cfg.sidecar = sidecar;

  auto out = pik::execute(cfg);
  if (cfg.json) {
    std::cout << out.data.dump(2) << "\n";
  } else {
    std::cout << out.text;
  }
  std::cerr << out.errors;
  return out.exit;
}

// The verbs of the pik command line, usable without the command line: each
// verb returns its result as JSON plus the text and exit code the tool
// prints. The corpus runner replays verbs from .expect sidecars.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pik/process.hpp"

namespace pik {

struct RunConfig {
  std::string verb;                 // parse check dual subtype encode run correspond deadlock infer mpst corpus
  std::vector<std::string> inputs;  // file paths, or source text when inline_text is set
  bool inline_text = false;
  std::optional<Calculus> calculus; // default: from the file extension, else session
  std::string env;                  // typing context `x: T; y: U`
  std::uint64_t seed = 0;
  int depth = 3;
  int steps = 1000;
  bool json = false;
  bool rec_types = false;
  bool encoded = false;
  bool monomorphic = false;
  bool type_only = false;           // encode: the inputs are session types
  std::vector<std::pair<std::string, std::string>> merges;
  std::string sidecar;              // encode: where to write the renaming map
};

struct Outcome {
  int exit = 0;            // 0 ok, 1 negative verdict, 2 usage or parse error
  nlohmann::json data;     // machine-readable result
  std::string text;        // what the tool prints on stdout in text mode
  std::string errors;      // what the tool prints on stderr
};

Outcome execute(const RunConfig& cfg);

struct CorpusCase {
  std::string name;        // sidecar file name without extension
  std::string input;       // path of the process/type file; empty for inline cases
  nlohmann::json spec;     // parsed sidecar
};

struct CorpusResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CorpusReport {
  std::vector<CorpusResult> results;
  int passed() const;
  int failed() const;
};

/// All *.expect sidecars of dir, sorted by name. Throws on unreadable JSON.
std::vector<CorpusCase> load_corpus(const std::string& dir);
/// The run configuration a sidecar describes.
RunConfig corpus_config(const CorpusCase& c);
CorpusResult run_case(const CorpusCase& c);
CorpusReport run_corpus(const std::string& dir);

} // namespace pik

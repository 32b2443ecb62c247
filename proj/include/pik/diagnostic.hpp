// Source locations, diagnostics and the registry of diagnostic codes.
#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace pik {

/// 1-based; line 0 means "no position".
struct SourcePos {
  int line = 0;
  int col = 0;
};

struct SourceSpan {
  std::string file;
  SourcePos start;
  SourcePos end;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourceSpan span;
  std::string code;
  std::string message;

  /// "file:line:col: error[code]: message"
  std::string to_string() const;
};

/// Every code a Diagnostic may carry, with a one-line description.
const std::map<std::string, std::string>& diagnostic_codes();

/// Builds a diagnostic; throws std::logic_error for a code missing from the registry.
Diagnostic make_diagnostic(const std::string& code, std::string message, SourceSpan span = {});

/// Exception wrapper used by every checker and the parser.
struct DiagnosticError : std::runtime_error {
  Diagnostic diag;
  explicit DiagnosticError(Diagnostic d) : std::runtime_error(d.to_string()), diag(std::move(d)) {}
};

[[noreturn]] void fail(const std::string& code, std::string message, SourceSpan span = {});

} // namespace pik

#include "pik/diagnostic.hpp"

namespace pik {

const std::map<std::string, std::string>& diagnostic_codes() {
  static const std::map<std::string, std::string> codes = {
      {"syntax", "malformed input text"},
      {"unguarded", "recursive type with an unguarded variable"},
      {"wrong-calculus", "construct not available in the selected calculus"},
      {"unknown-name", "name used without a binding or type"},
      {"linearity", "linear endpoint or capability unused or used more than once"},
      {"type-mismatch", "value or channel used at an incompatible type"},
      {"duality-mismatch", "endpoints of a session restriction do not have dual types"},
      {"capability-missing", "channel used with a capability its type does not grant"},
      {"variant-label", "case labels differ from the variant type labels"},
      {"arity", "payload arity differs between sender, receiver or type"},
      {"label-not-offered", "selected label not offered by the branching side"},
      {"linear-overlap", "linear name demanded by both sides of a split"},
      {"not-splittable", "type does not carry both capabilities"},
      {"replicated-linear", "replicated process with free linear channels"},
      {"deadlock", "priority constraints are unsatisfiable"},
      {"unify", "type constraints have no solution"},
      {"occurs-check", "inferred type would be infinite"},
      {"not-decodable", "pi type outside the image of the encoding"},
      {"unmapped-name", "renaming function undefined on a free name"},
      {"invalid-renaming", "renaming function violates freshness or identity on bound names"},
      {"collision-on-linear", "renaming merges two unrelated linear names"},
      {"not-projectable", "global type has no plain projection onto a role"},
      {"stuck", "reduction rule applied to a term of the wrong shape"},
  };
  return codes;
}

std::string Diagnostic::to_string() const {
  std::string s;
  if (!span.file.empty()) s += span.file + ":";
  if (span.start.line > 0) s += std::to_string(span.start.line) + ":" + std::to_string(span.start.col) + ": ";
  s += severity == Severity::Error ? "error" : "warning";
  s += "[" + code + "]: " + message;
  return s;
}

Diagnostic make_diagnostic(const std::string& code, std::string message, SourceSpan span) {
  if (!diagnostic_codes().count(code)) throw std::logic_error("unregistered diagnostic code " + code);
  return Diagnostic{Severity::Error, std::move(span), code, std::move(message)};
}

void fail(const std::string& code, std::string message, SourceSpan span) {
  throw DiagnosticError(make_diagnostic(code, std::move(message), std::move(span)));
}

} // namespace pik

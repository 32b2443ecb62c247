// Small helpers shared by the unit tests.
#pragma once

#include <functional>
#include <string>

#include "pik/diagnostic.hpp"
#include "pik/parser.hpp"
#include "pik/printer.hpp"

namespace pik::test {

/// The diagnostic code thrown by f, or "" when f returns normally.
inline std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DiagnosticError& e) {
    return e.diag.code;
  }
  return "";
}

inline ProcPtr session(const std::string& text) { return parse_process(text, Calculus::Session); }
inline ProcPtr pi(const std::string& text) { return parse_process(text, Calculus::Pi); }
inline STypePtr stype(const std::string& text) { return parse_session_type(text); }
inline PTypePtr ptype(const std::string& text) { return parse_pi_type(text); }

} // namespace pik::test

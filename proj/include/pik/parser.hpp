// Concrete ASCII syntax for both type languages and both process calculi.
// The grammar is documented in docs/grammar.md.
#pragma once

#include <string>
#include <string_view>

#include "pik/env.hpp"
#include "pik/lexer.hpp"
#include "pik/process.hpp"
#include "pik/types.hpp"

namespace pik {

/// Parses a session type or payload type T. Unguarded recursion is rejected
/// with code "unguarded".
STypePtr parse_session_type(std::string_view text, const std::string& file = "");
PTypePtr parse_pi_type(std::string_view text, const std::string& file = "");
ProcPtr parse_process(std::string_view text, Calculus calculus, const std::string& file = "");

/// Typing contexts written `x: T; y: U`. The empty string is the empty context.
SessionEnv parse_session_env(std::string_view text, const std::string& file = "");
PiEnv parse_pi_env(std::string_view text, const std::string& file = "");

// Building blocks for parsers embedding these grammars.
STypePtr parse_session_type(TokenStream& ts);
STypePtr parse_payload_type(TokenStream& ts);
PTypePtr parse_pi_type(TokenStream& ts);

} // namespace pik

// Tokenizer shared by the type, process and multiparty parsers.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pik/diagnostic.hpp"

namespace pik {

struct Token {
  enum class Kind { Ident, Int, Sym, Eof };
  Kind kind = Kind::Eof;
  std::string text;
  SourceSpan span;
};

std::vector<Token> tokenize(std::string_view text, const std::string& file);

/// Cursor over a token vector with the usual peek/expect helpers. Errors are
/// reported as DiagnosticError with code "syntax".
class TokenStream {
public:
  TokenStream(std::string_view text, std::string file);

  const Token& peek(std::size_t ahead = 0) const;
  Token next();
  bool at_end() const { return peek().kind == Token::Kind::Eof; }

  bool is_sym(std::string_view s, std::size_t ahead = 0) const;
  bool is_ident(std::string_view s, std::size_t ahead = 0) const;
  bool accept_sym(std::string_view s);
  bool accept_ident(std::string_view s);
  void expect_sym(std::string_view s);
  void expect_ident(std::string_view s);
  std::string expect_name(const char* what);
  long long expect_int();
  void expect_end();

  [[noreturn]] void error(const std::string& message) const;
  [[noreturn]] void error_at(const Token& t, const std::string& message) const;

private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

bool is_keyword(std::string_view s);

} // namespace pik

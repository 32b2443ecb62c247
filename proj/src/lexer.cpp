#include "pik/lexer.hpp"

#include <array>
#include <cctype>

namespace pik {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

constexpr std::array<std::string_view, 8> kTwoCharSyms = {"<|", "|>", "==", "<=", "->", "&{", "+{", "#["};

} // namespace

bool is_keyword(std::string_view s) {
  static constexpr std::array<std::string_view, 11> kws = {"new", "in",   "case", "of",  "if", "then",
                                                           "else", "true", "false", "end", "rec"};
  for (auto k : kws) {
    if (k == s) return true;
  }
  return false;
}

std::vector<Token> tokenize(std::string_view text, const std::string& file) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.span.file = file;
    t.span.start = {line, col};
    std::size_t len = 1;
    if (ident_start(c)) {
      t.kind = Token::Kind::Ident;
      while (i + len < text.size() && ident_char(text[i + len])) ++len;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Token::Kind::Int;
      while (i + len < text.size() && std::isdigit(static_cast<unsigned char>(text[i + len]))) ++len;
    } else {
      t.kind = Token::Kind::Sym;
      for (auto s : kTwoCharSyms) {
        if (text.substr(i, 2) == s) len = 2;
      }
      if (std::string("!?.,:;()[]{}<>|&+#*-=^").find(c) == std::string::npos) {
        t.span.end = {line, col + 1};
        throw DiagnosticError(make_diagnostic("syntax", std::string("unexpected character '") + c + "'", t.span));
      }
    }
    t.text = std::string(text.substr(i, len));
    advance(len);
    t.span.end = {line, col};
    out.push_back(std::move(t));
  }
  Token eof;
  eof.kind = Token::Kind::Eof;
  eof.span.file = file;
  eof.span.start = eof.span.end = {line, col};
  out.push_back(eof);
  return out;
}

TokenStream::TokenStream(std::string_view text, std::string file) : tokens_(tokenize(text, file)) {}

const Token& TokenStream::peek(std::size_t ahead) const {
  std::size_t k = std::min(pos_ + ahead, tokens_.size() - 1);
  return tokens_[k];
}

Token TokenStream::next() {
  Token t = peek();
  if (pos_ < tokens_.size() - 1) ++pos_;
  return t;
}

bool TokenStream::is_sym(std::string_view s, std::size_t ahead) const {
  const auto& t = peek(ahead);
  return t.kind == Token::Kind::Sym && t.text == s;
}

bool TokenStream::is_ident(std::string_view s, std::size_t ahead) const {
  const auto& t = peek(ahead);
  return t.kind == Token::Kind::Ident && t.text == s;
}

bool TokenStream::accept_sym(std::string_view s) {
  if (!is_sym(s)) return false;
  next();
  return true;
}

bool TokenStream::accept_ident(std::string_view s) {
  if (!is_ident(s)) return false;
  next();
  return true;
}

void TokenStream::expect_sym(std::string_view s) {
  if (!accept_sym(s)) error("expected '" + std::string(s) + "'");
}

void TokenStream::expect_ident(std::string_view s) {
  if (!accept_ident(s)) error("expected '" + std::string(s) + "'");
}

std::string TokenStream::expect_name(const char* what) {
  const auto& t = peek();
  if (t.kind != Token::Kind::Ident || is_keyword(t.text)) error(std::string("expected ") + what);
  return next().text;
}

long long TokenStream::expect_int() {
  const auto& t = peek();
  if (t.kind != Token::Kind::Int) error("expected an integer");
  return std::stoll(next().text);
}

void TokenStream::expect_end() {
  if (!at_end()) error("unexpected trailing input");
}

void TokenStream::error(const std::string& message) const { error_at(peek(), message); }

void TokenStream::error_at(const Token& t, const std::string& message) const {
  std::string found = t.kind == Token::Kind::Eof ? "end of input" : "'" + t.text + "'";
  throw DiagnosticError(make_diagnostic("syntax", message + ", found " + found, t.span));
}

} // namespace pik

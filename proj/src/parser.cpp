#include "pik/parser.hpp"

namespace pik {

// ============================================================================
// Session types
// ============================================================================

namespace {

bool is_base_name(const std::string& s) { return s == "Int" || s == "Bool"; }

SBranches parse_sbranches(TokenStream& ts) {
  SBranches out;
  do {
    auto tok = ts.peek();
    auto label = ts.expect_name("a label");
    ts.expect_sym(":");
    auto s = parse_session_type(ts);
    if (!out.emplace(label, s).second) ts.error_at(tok, "duplicate label " + label);
  } while (ts.accept_sym(","));
  ts.expect_sym("}");
  return out;
}

} // namespace

STypePtr parse_session_type(TokenStream& ts) {
  if (ts.accept_ident("end")) return SType::end();
  if (ts.is_sym("!") || ts.is_sym("?")) {
    bool send = ts.next().text == "!";
    auto payload = parse_payload_type(ts);
    ts.expect_sym(".");
    auto cont = parse_session_type(ts);
    return send ? SType::send(payload, cont) : SType::recv(payload, cont);
  }
  if (ts.accept_sym("+{")) return SType::select(parse_sbranches(ts));
  if (ts.accept_sym("&{")) return SType::branch(parse_sbranches(ts));
  if (ts.accept_ident("rec")) {
    auto x = ts.expect_name("a type variable");
    ts.expect_sym(".");
    return SType::rec(x, parse_session_type(ts));
  }
  if (ts.accept_sym("(")) {
    auto s = parse_session_type(ts);
    ts.expect_sym(")");
    return s;
  }
  const auto& t = ts.peek();
  if (t.kind == Token::Kind::Ident && !is_keyword(t.text) && !is_base_name(t.text) && t.text != "Unit") {
    return SType::var(ts.next().text);
  }
  ts.error("expected a session type");
}

STypePtr parse_payload_type(TokenStream& ts) {
  if (ts.accept_sym("#")) return SType::shared(parse_payload_type(ts));
  if (ts.accept_ident("Unit")) return SType::unit();
  const auto& t = ts.peek();
  if (t.kind == Token::Kind::Ident && is_base_name(t.text)) return SType::base(ts.next().text);
  if (ts.accept_sym("(")) {
    auto s = parse_payload_type(ts);
    ts.expect_sym(")");
    return s;
  }
  return parse_session_type(ts);
}

STypePtr parse_session_type(std::string_view text, const std::string& file) {
  TokenStream ts(text, file);
  auto start = ts.peek().span;
  auto t = parse_payload_type(ts);
  ts.expect_end();
  try {
    check_guarded(t);
  } catch (const UnguardedRecursion& e) {
    fail("unguarded", e.what(), start);
  }
  return t;
}

// ============================================================================
// Pi types
// ============================================================================

namespace {

std::vector<PTypePtr> parse_pi_seq(TokenStream& ts, const char* close) {
  std::vector<PTypePtr> out;
  if (ts.accept_sym(close)) return out;
  do {
    out.push_back(parse_pi_type(ts));
  } while (ts.accept_sym(","));
  ts.expect_sym(close);
  return out;
}

std::optional<int> parse_priority(TokenStream& ts) {
  if (!ts.accept_sym("^")) return std::nullopt;
  return static_cast<int>(ts.expect_int());
}

} // namespace

PTypePtr parse_pi_type(TokenStream& ts) {
  for (auto [kw, in, out] : {std::tuple{"lin_i", Cap::Present, Cap::Absent}, std::tuple{"lin_o", Cap::Absent, Cap::Present},
                             std::tuple{"lin_io", Cap::Present, Cap::Present}}) {
    if (ts.accept_ident(kw)) {
      ts.expect_sym("[");
      auto args = parse_pi_seq(ts, "]");
      return PType::chan(in, out, std::move(args), parse_priority(ts));
    }
  }
  if (ts.accept_ident("empty")) {
    ts.expect_sym("[");
    ts.expect_sym("]");
    return PType::chan(Cap::Absent, Cap::Absent, {}, parse_priority(ts));
  }
  if (ts.accept_sym("#[")) return PType::shared(parse_pi_seq(ts, "]"));
  if (ts.accept_sym("<")) {
    PBranches bs;
    do {
      auto tok = ts.peek();
      auto label = ts.expect_name("a label");
      ts.expect_sym(":");
      if (!bs.emplace(label, parse_pi_type(ts)).second) ts.error_at(tok, "duplicate label " + label);
    } while (ts.accept_sym(","));
    ts.expect_sym(">");
    return PType::variant(std::move(bs));
  }
  if (ts.accept_sym("(")) {
    auto xs = parse_pi_seq(ts, ")");
    if (xs.size() == 1) return xs.front();
    return PType::tuple(std::move(xs));
  }
  if (ts.accept_ident("Unit")) return PType::unit();
  if (ts.accept_ident("rec")) {
    auto x = ts.expect_name("a type variable");
    ts.expect_sym(".");
    return PType::rec(x, parse_pi_type(ts));
  }
  const auto& t = ts.peek();
  if (t.kind == Token::Kind::Ident && is_base_name(t.text)) return PType::base(ts.next().text);
  if (t.kind == Token::Kind::Ident && !is_keyword(t.text)) return PType::var(ts.next().text);
  ts.error("expected a pi type");
}

PTypePtr parse_pi_type(std::string_view text, const std::string& file) {
  TokenStream ts(text, file);
  auto start = ts.peek().span;
  auto t = parse_pi_type(ts);
  ts.expect_end();
  try {
    check_guarded(t);
  } catch (const UnguardedRecursion& e) {
    fail("unguarded", e.what(), start);
  }
  return t;
}

// ============================================================================
// Processes
// ============================================================================

namespace {

class ProcParser {
public:
  ProcParser(TokenStream& ts, Calculus c) : ts_(ts), calc_(c) {}

  ProcPtr proc() {
    ProcPtr acc = prefixed();
    while (ts_.accept_sym("|")) acc = Proc::par(acc, prefixed());
    return acc;
  }

private:
  TokenStream& ts_;
  Calculus calc_;

  bool session() const { return calc_ == Calculus::Session; }

  [[noreturn]] void wrong(const Token& t, const std::string& what) {
    fail("wrong-calculus", what + " is not available in the " + std::string(session() ? "session" : "pi") + " calculus",
         t.span);
  }

  ProcPtr continuation() {
    if (ts_.accept_sym(".")) return prefixed();
    return Proc::nil();
  }

  ProcPtr prefixed() {
    auto tok = ts_.peek();
    if (ts_.accept_sym("(")) {
      auto p = proc();
      ts_.expect_sym(")");
      return p;
    }
    if (tok.kind == Token::Kind::Int) {
      if (tok.text != "0") ts_.error("expected a process");
      ts_.next();
      return Proc::nil();
    }
    if (ts_.accept_sym("*")) return Proc::rep(prefixed());
    if (ts_.accept_ident("new")) return restriction(tok);
    if (ts_.accept_ident("if")) {
      auto c = expr();
      ts_.expect_ident("then");
      auto a = prefixed();
      ts_.expect_ident("else");
      auto b = prefixed();
      return Proc::cond(c, a, b);
    }
    if (ts_.accept_ident("case")) {
      if (session()) wrong(tok, "case");
      auto scrut = expr();
      ts_.expect_ident("of");
      ts_.expect_sym("{");
      Arms arms;
      do {
        auto lt = ts_.peek();
        auto label = ts_.expect_name("a label");
        ts_.expect_sym("(");
        auto x = ts_.expect_name("a binder");
        ts_.expect_sym(")");
        ts_.expect_sym(">");
        auto body = proc();
        if (!arms.emplace(label, Arm{x, body}).second) ts_.error_at(lt, "duplicate label " + label);
      } while (ts_.accept_sym(","));
      ts_.expect_sym("}");
      return Proc::case_of(scrut, std::move(arms));
    }
    auto chan = ts_.expect_name("a process");
    auto op = ts_.peek();
    if (ts_.accept_sym("!")) {
      ts_.expect_sym("<");
      std::vector<ExprPtr> args;
      if (!ts_.is_sym(">")) {
        do {
          args.push_back(expr());
        } while (ts_.accept_sym(","));
      }
      ts_.expect_sym(">");
      if (session() && args.size() != 1) wrong(op, "polyadic output");
      return Proc::out(chan, std::move(args), continuation());
    }
    if (ts_.accept_sym("?")) {
      ts_.expect_sym("(");
      std::vector<std::string> bs;
      if (!ts_.is_sym(")")) {
        do {
          auto bt = ts_.peek();
          auto b = ts_.expect_name("a binder");
          for (const auto& prev : bs) {
            if (prev == b) ts_.error_at(bt, "duplicate binder " + b);
          }
          bs.push_back(b);
        } while (ts_.accept_sym(","));
      }
      ts_.expect_sym(")");
      if (session() && bs.size() != 1) wrong(op, "polyadic input");
      return Proc::in(chan, std::move(bs), continuation());
    }
    if (ts_.accept_sym("<|")) {
      if (!session()) wrong(op, "selection");
      auto label = ts_.expect_name("a label");
      return Proc::sel(chan, label, continuation());
    }
    if (ts_.accept_sym("|>")) {
      if (!session()) wrong(op, "branching");
      ts_.expect_sym("{");
      Arms arms;
      do {
        auto lt = ts_.peek();
        auto label = ts_.expect_name("a label");
        ts_.expect_sym(":");
        if (!arms.emplace(label, Arm{"", proc()}).second) ts_.error_at(lt, "duplicate label " + label);
      } while (ts_.accept_sym(","));
      ts_.expect_sym("}");
      return Proc::bra(chan, std::move(arms));
    }
    ts_.error("expected '!', '?', '<|' or '|>' after a channel name");
  }

  ProcPtr restriction(const Token& kw) {
    auto x = ts_.expect_name("a restricted name");
    std::string y;
    if (ts_.peek().kind == Token::Kind::Ident && !is_keyword(ts_.peek().text)) {
      if (!session()) wrong(kw, "session restriction");
      y = ts_.expect_name("an endpoint name");
      if (y == x) ts_.error("session restriction needs two distinct endpoints");
    }
    STypePtr sannot;
    PTypePtr pannot;
    if (ts_.accept_sym(":")) {
      auto at = ts_.peek();
      if (session()) {
        sannot = y.empty() ? parse_payload_type(ts_) : parse_session_type(ts_);
        try {
          check_guarded(sannot);
        } catch (const UnguardedRecursion& e) {
          fail("unguarded", e.what(), at.span);
        }
      } else {
        pannot = parse_pi_type(ts_);
        try {
          check_guarded(pannot);
        } catch (const UnguardedRecursion& e) {
          fail("unguarded", e.what(), at.span);
        }
      }
    }
    ts_.expect_ident("in");
    auto body = proc();
    if (!y.empty()) return Proc::sres(x, y, body, sannot);
    return Proc::res(x, body, sannot, pannot);
  }

  ExprPtr expr() {
    auto lhs = additive();
    for (const char* op : {"==", "=", "<=", "<"}) {
      if (ts_.accept_sym(op)) {
        std::string o = op;
        return Expr::binary(o == "=" ? "==" : o, lhs, additive());
      }
    }
    return lhs;
  }

  ExprPtr additive() {
    auto acc = multiplicative();
    while (ts_.is_sym("+") || ts_.is_sym("-")) {
      auto op = ts_.next().text;
      acc = Expr::binary(op, acc, multiplicative());
    }
    return acc;
  }

  ExprPtr multiplicative() {
    auto acc = atom();
    while (ts_.accept_sym("*")) acc = Expr::binary("*", acc, atom());
    return acc;
  }

  ExprPtr atom() {
    auto tok = ts_.peek();
    if (tok.kind == Token::Kind::Int) return Expr::integer(ts_.expect_int());
    if (ts_.accept_ident("true")) return Expr::boolean(true);
    if (ts_.accept_ident("false")) return Expr::boolean(false);
    if (ts_.accept_sym("*")) return Expr::unit();
    if (ts_.accept_sym("(")) {
      auto e = expr();
      ts_.expect_sym(")");
      return e;
    }
    auto n = ts_.expect_name("a value");
    if (ts_.accept_sym("(")) {
      if (session()) wrong(tok, "variant value");
      auto payload = expr();
      ts_.expect_sym(")");
      return Expr::variant(n, payload);
    }
    return Expr::make_name(n);
  }
};

} // namespace

ProcPtr parse_process(std::string_view text, Calculus calculus, const std::string& file) {
  TokenStream ts(text, file);
  ProcParser p(ts, calculus);
  auto out = p.proc();
  ts.expect_end();
  return out;
}

// ============================================================================
// Typing contexts
// ============================================================================

namespace {

template <class Env, class Parse>
Env parse_env(std::string_view text, const std::string& file, Parse parse) {
  TokenStream ts(text, file);
  Env env;
  while (!ts.at_end()) {
    auto tok = ts.peek();
    auto x = ts.expect_name("a name");
    ts.expect_sym(":");
    auto t = parse(ts);
    try {
      check_guarded(t);
    } catch (const UnguardedRecursion& e) {
      fail("unguarded", e.what(), tok.span);
    }
    if (!env.emplace(x, t).second) ts.error_at(tok, "duplicate entry for " + x);
    if (!ts.accept_sym(";")) break;
  }
  ts.expect_end();
  return env;
}

} // namespace

SessionEnv parse_session_env(std::string_view text, const std::string& file) {
  return parse_env<SessionEnv>(text, file, [](TokenStream& ts) { return parse_session_type(ts); });
}

PiEnv parse_pi_env(std::string_view text, const std::string& file) {
  return parse_env<PiEnv>(text, file, [](TokenStream& ts) { return parse_pi_type(ts); });
}

} // namespace pik

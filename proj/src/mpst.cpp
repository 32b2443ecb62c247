#include "pik/mpst.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "pik/diagnostic.hpp"
#include "pik/lexer.hpp"

namespace pik {

LocalTypePtr LocalType::end() {
  static const auto e = std::make_shared<const LocalType>();
  return e;
}

LocalTypePtr LocalType::var(std::string x) {
  auto h = std::make_shared<LocalType>();
  h->kind = Kind::Var;
  h->name = std::move(x);
  return h;
}

LocalTypePtr LocalType::rec(std::string x, LocalTypePtr body) {
  auto h = std::make_shared<LocalType>();
  h->kind = Kind::Rec;
  h->name = std::move(x);
  h->body = std::move(body);
  return h;
}

LocalTypePtr LocalType::select(std::map<std::string, LocalBranch> bs) {
  auto h = std::make_shared<LocalType>();
  h->kind = Kind::Select;
  h->branches = std::move(bs);
  return h;
}

LocalTypePtr LocalType::branch(std::map<std::string, LocalBranch> bs) {
  auto h = std::make_shared<LocalType>();
  h->kind = Kind::Branch;
  h->branches = std::move(bs);
  return h;
}

MultipartyTypePtr MultipartyType::end() {
  static const auto e = std::make_shared<const MultipartyType>();
  return e;
}

MultipartyTypePtr MultipartyType::var(std::string x) {
  auto s = std::make_shared<MultipartyType>();
  s->kind = Kind::Var;
  s->name = std::move(x);
  return s;
}

MultipartyTypePtr MultipartyType::rec(std::string x, MultipartyTypePtr body) {
  auto s = std::make_shared<MultipartyType>();
  s->kind = Kind::Rec;
  s->name = std::move(x);
  s->body = std::move(body);
  return s;
}

MultipartyTypePtr MultipartyType::select(std::string role, std::map<std::string, MultipartyBranch> bs) {
  auto s = std::make_shared<MultipartyType>();
  s->kind = Kind::Select;
  s->role = std::move(role);
  s->branches = std::move(bs);
  return s;
}

MultipartyTypePtr MultipartyType::branch(std::string role, std::map<std::string, MultipartyBranch> bs) {
  auto s = std::make_shared<MultipartyType>();
  s->kind = Kind::Branch;
  s->role = std::move(role);
  s->branches = std::move(bs);
  return s;
}

// ============================================================================
// Printing
// ============================================================================

std::string to_string(const Payload& u) { return u.local ? to_string(u.local) : u.base; }

namespace {

template <class Branches>
std::string branches_text(const Branches& bs) {
  std::string s;
  for (const auto& [l, b] : bs) {
    if (!s.empty()) s += ", ";
    s += l + "(" + to_string(b.payload) + ")." + to_string(b.cont);
  }
  return "{" + s + "}";
}

} // namespace

std::string to_string(const LocalTypePtr& h) {
  switch (h->kind) {
  case LocalType::Kind::End: return "end";
  case LocalType::Kind::Var: return h->name;
  case LocalType::Kind::Rec: return "rec " + h->name + "." + to_string(h->body);
  case LocalType::Kind::Select: return "+" + branches_text(h->branches);
  case LocalType::Kind::Branch: return "&" + branches_text(h->branches);
  }
  return "?";
}

std::string to_string(const MultipartyTypePtr& s) {
  switch (s->kind) {
  case MultipartyType::Kind::End: return "end";
  case MultipartyType::Kind::Var: return s->name;
  case MultipartyType::Kind::Rec: return "rec " + s->name + "." + to_string(s->body);
  case MultipartyType::Kind::Select: return s->role + "+" + branches_text(s->branches);
  case MultipartyType::Kind::Branch: return s->role + "&" + branches_text(s->branches);
  }
  return "?";
}

// ============================================================================
// Parsing
// ============================================================================

namespace {

bool is_base(const std::string& s) { return s == "Unit" || s == "Int" || s == "Bool"; }

class Parser {
public:
  Parser(const std::string& text, const std::string& file) : ts_(text, file) {}

  LocalTypePtr whole_local() {
    auto h = local({});
    ts_.expect_end();
    return h;
  }

  MultipartyTypePtr whole_multiparty() {
    auto s = multiparty({});
    ts_.expect_end();
    return s;
  }

private:
  TokenStream ts_;

  Payload payload() {
    const auto& t = ts_.peek();
    if (t.kind == Token::Kind::Ident && is_base(t.text)) return Payload{ts_.next().text, nullptr};
    return Payload{"", local({})};
  }

  std::string variable(const std::set<std::string>& bound) {
    auto t = ts_.peek();
    auto x = ts_.expect_name("type variable");
    if (!bound.count(x)) ts_.error_at(t, "unbound type variable " + x);
    return x;
  }

  template <class Branch, class Cont>
  std::map<std::string, Branch> branches(Cont cont) {
    std::map<std::string, Branch> bs;
    do {
      auto t = ts_.peek();
      auto l = ts_.expect_name("label");
      Payload u{"Unit", nullptr};
      if (ts_.accept_sym("(")) {
        u = payload();
        ts_.expect_sym(")");
      }
      ts_.expect_sym(".");
      if (bs.count(l)) ts_.error_at(t, "duplicate label " + l);
      bs[l] = Branch{u, cont()};
    } while (ts_.accept_sym(","));
    ts_.expect_sym("}");
    return bs;
  }

  LocalTypePtr local(std::set<std::string> bound) {
    if (ts_.accept_ident("end")) return LocalType::end();
    if (ts_.accept_ident("rec")) {
      auto x = ts_.expect_name("type variable");
      ts_.expect_sym(".");
      bound.insert(x);
      return LocalType::rec(x, local(bound));
    }
    if (ts_.accept_sym("(")) {
      auto h = local(bound);
      ts_.expect_sym(")");
      return h;
    }
    if (ts_.accept_sym("+{")) return LocalType::select(branches<LocalBranch>([&] { return local(bound); }));
    if (ts_.accept_sym("&{")) return LocalType::branch(branches<LocalBranch>([&] { return local(bound); }));
    return LocalType::var(variable(bound));
  }

  MultipartyTypePtr multiparty(std::set<std::string> bound) {
    if (ts_.accept_ident("end")) return MultipartyType::end();
    if (ts_.accept_ident("rec")) {
      auto x = ts_.expect_name("type variable");
      ts_.expect_sym(".");
      bound.insert(x);
      return MultipartyType::rec(x, multiparty(bound));
    }
    if (ts_.accept_sym("(")) {
      auto s = multiparty(bound);
      ts_.expect_sym(")");
      return s;
    }
    if (ts_.peek().kind == Token::Kind::Ident && (ts_.is_sym("+{", 1) || ts_.is_sym("&{", 1))) {
      auto role = ts_.expect_name("role");
      bool select = ts_.next().text == "+{";
      auto bs = branches<MultipartyBranch>([&] { return multiparty(bound); });
      return select ? MultipartyType::select(role, std::move(bs)) : MultipartyType::branch(role, std::move(bs));
    }
    return MultipartyType::var(variable(bound));
  }
};

// Fails when some rec X reaches X without passing a communication.
void check_guarded_local(const LocalTypePtr& h, std::set<std::string> unguarded) {
  switch (h->kind) {
  case LocalType::Kind::End: return;
  case LocalType::Kind::Var:
    if (unguarded.count(h->name)) fail("unguarded", "unguarded recursion on " + h->name);
    return;
  case LocalType::Kind::Rec:
    unguarded.insert(h->name);
    return check_guarded_local(h->body, unguarded);
  case LocalType::Kind::Select:
  case LocalType::Kind::Branch:
    for (const auto& [l, b] : h->branches) {
      if (b.payload.local) check_guarded_local(b.payload.local, {});
      check_guarded_local(b.cont, {});
    }
    return;
  }
}

void check_guarded_multiparty(const MultipartyTypePtr& s, std::set<std::string> unguarded) {
  switch (s->kind) {
  case MultipartyType::Kind::End: return;
  case MultipartyType::Kind::Var:
    if (unguarded.count(s->name)) fail("unguarded", "unguarded recursion on " + s->name);
    return;
  case MultipartyType::Kind::Rec:
    unguarded.insert(s->name);
    return check_guarded_multiparty(s->body, unguarded);
  case MultipartyType::Kind::Select:
  case MultipartyType::Kind::Branch:
    for (const auto& [l, b] : s->branches) {
      if (b.payload.local) check_guarded_local(b.payload.local, {});
      check_guarded_multiparty(b.cont, {});
    }
    return;
  }
}

} // namespace

LocalTypePtr parse_local_type(const std::string& text, const std::string& file) {
  auto h = Parser(text, file).whole_local();
  check_guarded_local(h, {});
  return h;
}

MultipartyTypePtr parse_multiparty_type(const std::string& text, const std::string& file) {
  auto s = Parser(text, file).whole_multiparty();
  check_guarded_multiparty(s, {});
  return s;
}

// ============================================================================
// Duality and projection
// ============================================================================

LocalTypePtr dual(const LocalTypePtr& h) {
  switch (h->kind) {
  case LocalType::Kind::End:
  case LocalType::Kind::Var: return h;
  case LocalType::Kind::Rec: return LocalType::rec(h->name, dual(h->body));
  case LocalType::Kind::Select:
  case LocalType::Kind::Branch: {
    std::map<std::string, LocalBranch> bs;
    for (const auto& [l, b] : h->branches) bs[l] = LocalBranch{b.payload, dual(b.cont)};
    return h->kind == LocalType::Kind::Select ? LocalType::branch(std::move(bs)) : LocalType::select(std::move(bs));
  }
  }
  return h;
}

std::vector<std::string> roles(const MultipartyTypePtr& s) {
  std::vector<std::string> out;
  std::function<void(const MultipartyTypePtr&)> walk = [&](const MultipartyTypePtr& t) {
    if (t->kind == MultipartyType::Kind::Rec) return walk(t->body);
    if (t->kind != MultipartyType::Kind::Select && t->kind != MultipartyType::Kind::Branch) return;
    if (std::find(out.begin(), out.end(), t->role) == out.end()) out.push_back(t->role);
    for (const auto& [l, b] : t->branches) walk(b.cont);
  };
  walk(s);
  return out;
}

namespace {

bool mentions(const LocalTypePtr& h, const std::string& x) {
  switch (h->kind) {
  case LocalType::Kind::End: return false;
  case LocalType::Kind::Var: return h->name == x;
  case LocalType::Kind::Rec: return h->name != x && mentions(h->body, x);
  default:
    for (const auto& [l, b] : h->branches) {
      if (mentions(b.cont, x)) return true;
    }
    return false;
  }
}

} // namespace

LocalTypePtr project(const MultipartyTypePtr& s, const std::string& q) {
  switch (s->kind) {
  case MultipartyType::Kind::End: return LocalType::end();
  case MultipartyType::Kind::Var: return LocalType::var(s->name);
  case MultipartyType::Kind::Rec: {
    auto body = project(s->body, q);
    if (body->kind == LocalType::Kind::Var && body->name == s->name) return LocalType::end();
    if (!mentions(body, s->name)) return body;
    return LocalType::rec(s->name, body);
  }
  case MultipartyType::Kind::Select:
  case MultipartyType::Kind::Branch: {
    if (s->role == q) {
      std::map<std::string, LocalBranch> bs;
      for (const auto& [l, b] : s->branches) bs[l] = LocalBranch{b.payload, project(b.cont, q)};
      return s->kind == MultipartyType::Kind::Select ? LocalType::select(std::move(bs)) : LocalType::branch(std::move(bs));
    }
    LocalTypePtr common;
    std::string first;
    for (const auto& [l, b] : s->branches) {
      auto h = project(b.cont, q);
      if (!common) {
        common = h;
        first = l;
      } else if (to_string(h) != to_string(common)) {
        fail("not-projectable", "branches " + first + " and " + l + " of " + to_string(s) + " differ towards " + q +
                                    ": " + to_string(common) + " vs " + to_string(h));
      }
    }
    return common ? common : LocalType::end();
  }
  }
  return LocalType::end();
}

// ============================================================================
// Encoding
// ============================================================================

namespace {

LocalTypePtr subst(const LocalTypePtr& h, const std::string& x, const LocalTypePtr& by) {
  switch (h->kind) {
  case LocalType::Kind::End: return h;
  case LocalType::Kind::Var: return h->name == x ? by : h;
  case LocalType::Kind::Rec: return h->name == x ? h : LocalType::rec(h->name, subst(h->body, x, by));
  case LocalType::Kind::Select:
  case LocalType::Kind::Branch: {
    std::map<std::string, LocalBranch> bs;
    for (const auto& [l, b] : h->branches) bs[l] = LocalBranch{b.payload, subst(b.cont, x, by)};
    return h->kind == LocalType::Kind::Select ? LocalType::select(std::move(bs)) : LocalType::branch(std::move(bs));
  }
  }
  return h;
}

// Encodes a closed local type as a regular tree: a type met again while it is
// being encoded becomes a recursion variable.
class LocalEncoder {
public:
  PTypePtr encode(LocalTypePtr h) {
    while (h->kind == LocalType::Kind::Rec) h = subst(h->body, h->name, h);
    if (h->kind == LocalType::Kind::End) return PType::empty();
    if (h->kind == LocalType::Kind::Var) fail("unguarded", "unbound type variable " + h->name);
    auto key = to_string(h);
    auto it = active_.find(key);
    if (it != active_.end()) {
      it->second.used = true;
      return PType::var(it->second.name);
    }
    std::string name = "X" + std::to_string(counter_++);
    active_[key] = Active{name, false};
    PBranches variant;
    bool select = h->kind == LocalType::Kind::Select;
    for (const auto& [l, b] : h->branches) {
      auto u = b.payload.local ? LocalEncoder().encode(b.payload.local) : payload_base(b.payload.base);
      variant[l] = PType::tuple({u, encode(select ? dual(b.cont) : b.cont)});
    }
    auto t = select ? PType::lin_o({PType::variant(std::move(variant))}) : PType::lin_i({PType::variant(std::move(variant))});
    bool used = active_[key].used;
    active_.erase(key);
    return used ? PType::rec(name, t) : t;
  }

private:
  struct Active {
    std::string name;
    bool used;
  };
  std::map<std::string, Active> active_;
  int counter_ = 0;

  static PTypePtr payload_base(const std::string& b) { return b == "Unit" ? PType::unit() : PType::base(b); }
};

} // namespace

PTypePtr encode_local(const LocalTypePtr& h) {
  check_guarded_local(h, {});
  return LocalEncoder().encode(h);
}

std::map<std::string, LocalTypePtr> project_all(const MultipartyTypePtr& s) {
  std::map<std::string, LocalTypePtr> out;
  for (const auto& r : roles(s)) out[r] = project(s, r);
  return out;
}

std::map<std::string, PTypePtr> encode_mpst(const MultipartyTypePtr& s) {
  std::map<std::string, PTypePtr> out;
  for (const auto& [r, h] : project_all(s)) out[r] = encode_local(h);
  return out;
}

} // namespace pik

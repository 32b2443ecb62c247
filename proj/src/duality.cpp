#include "pik/duality.hpp"

#include <functional>
#include <map>
#include <set>
#include <stdexcept>

#include "pik/encoder.hpp"

namespace pik {

// ============================================================================
// Duality
// ============================================================================

namespace {

using Closure = std::map<std::string, STypePtr>;

STypePtr close_over(const STypePtr& t, const Closure& env) {
  STypePtr r = t;
  for (const auto& [x, by] : env) r = subst_type_var(r, x, by);
  return r;
}

STypePtr complement_in(const STypePtr& t, const Closure& env) {
  using K = SType::Kind;
  switch (t->kind) {
  case K::End:
  case K::Var: return t;
  case K::Send: return SType::recv(close_over(t->payload, env), complement_in(t->cont, env));
  case K::Recv: return SType::send(close_over(t->payload, env), complement_in(t->cont, env));
  case K::Select:
  case K::Branch: {
    SBranches bs;
    for (const auto& [l, s] : t->branches) bs[l] = complement_in(s, env);
    return t->kind == K::Select ? SType::branch(std::move(bs)) : SType::select(std::move(bs));
  }
  case K::Rec: {
    Closure inner = env;
    inner.erase(t->name);
    inner[t->name] = close_over(t, env);
    return SType::rec(t->name, complement_in(t->cont, inner));
  }
  default: throw std::invalid_argument("dual of a non-session type " + to_string(t));
  }
}

} // namespace

STypePtr complement(const STypePtr& s) {
  check_guarded(s);
  return complement_in(s, {});
}

STypePtr dual(const STypePtr& s) {
  using K = SType::Kind;
  switch (s->kind) {
  case K::End: return s;
  case K::Send:
  case K::Recv:
    if (!is_recursion_free(s->cont)) return complement(s);
    return s->kind == K::Send ? SType::recv(s->payload, dual(s->cont)) : SType::send(s->payload, dual(s->cont));
  case K::Select:
  case K::Branch: {
    SBranches bs;
    for (const auto& [l, t] : s->branches) bs[l] = dual(t);
    return s->kind == K::Select ? SType::branch(std::move(bs)) : SType::select(std::move(bs));
  }
  case K::Rec:
  case K::Var: return complement(s);
  default: throw std::invalid_argument("dual of a non-session type " + to_string(s));
  }
}

// ============================================================================
// Subtyping
// ============================================================================

namespace {

template <typename TypePtr> class Coinductive {
public:
  Coinductive(std::size_t fuse) : fuse_(fuse) {}

protected:
  std::set<std::pair<std::string, std::string>> assumed_;
  std::vector<std::string> trace_;
  std::size_t depth_ = 0;
  std::size_t fuse_;

  // Returns true when the pair was already assumed (or the fuse blew).
  bool assume(const TypePtr& a, const TypePtr& b) {
    if (depth_ > fuse_) {
      trace_.push_back("fuse " + to_string(a) + " <= " + to_string(b));
      return true;
    }
    return !assumed_.emplace(to_string(a), to_string(b)).second;
  }

  bool reject(const TypePtr& a, const TypePtr& b, const std::string& why) {
    trace_.push_back("fail " + to_string(a) + " <= " + to_string(b) + ": " + why);
    return false;
  }

  struct Depth {
    std::size_t& d;
    explicit Depth(std::size_t& x) : d(x) { ++d; }
    ~Depth() { --d; }
  };
};

class SessionSub : public Coinductive<STypePtr> {
public:
  using Coinductive::Coinductive;

  SubtypeJudgement run(const STypePtr& a, const STypePtr& b) {
    SubtypeJudgement j{to_string(a), to_string(b), sub(a, b), {}};
    j.derivation = std::move(trace_);
    return j;
  }

private:
  bool sub(const STypePtr& a0, const STypePtr& b0) {
    using K = SType::Kind;
    Depth guard(depth_);
    if (assume(a0, b0)) return true;
    auto a = unfold_all(a0);
    auto b = unfold_all(b0);
    if (a->kind != b->kind) return reject(a, b, "constructors differ");
    switch (a->kind) {
    case K::End: trace_.push_back("end"); return true;
    case K::Unit: trace_.push_back("unit"); return true;
    case K::Base: return a->name == b->name ? (trace_.push_back("base"), true) : reject(a, b, "base types differ");
    case K::Var: return a->name == b->name ? true : reject(a, b, "free type variables differ");
    case K::Shared:
      trace_.push_back("shared");
      return sub(a->payload, b->payload) && sub(b->payload, a->payload);
    case K::Send:
      trace_.push_back("send");
      return sub(b->payload, a->payload) && sub(a->cont, b->cont);
    case K::Recv:
      trace_.push_back("recv");
      return sub(a->payload, b->payload) && sub(a->cont, b->cont);
    case K::Branch:
    case K::Select: {
      bool branch = a->kind == K::Branch;
      const auto& small = branch ? a->branches : b->branches;
      const auto& large = branch ? b->branches : a->branches;
      for (const auto& [l, s] : small) {
        if (!large.count(l)) return reject(a, b, "label " + l + " missing");
      }
      trace_.push_back(branch ? "branch" : "select");
      for (const auto& [l, s] : small) {
        if (!sub(a->branches.at(l), b->branches.at(l))) return false;
      }
      return true;
    }
    case K::Rec: break;
    }
    return reject(a, b, "unexpected type");
  }
};

class PiSub : public Coinductive<PTypePtr> {
public:
  PiSub(std::size_t fuse, bool equality) : Coinductive(fuse), equality_(equality) {}

  SubtypeJudgement run(const PTypePtr& a, const PTypePtr& b) {
    SubtypeJudgement j{to_string(a), to_string(b), sub(a, b), {}};
    j.derivation = std::move(trace_);
    return j;
  }

private:
  bool equality_;

  bool seq(const std::vector<PTypePtr>& xs, const std::vector<PTypePtr>& ys, int variance) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (variance >= 0 && !sub(xs[i], ys[i])) return false;
      if (variance <= 0 && !sub(ys[i], xs[i])) return false;
    }
    return true;
  }

  bool sub(const PTypePtr& a0, const PTypePtr& b0) {
    using K = PType::Kind;
    Depth guard(depth_);
    if (assume(a0, b0)) return true;
    auto a = unfold_all(a0);
    auto b = unfold_all(b0);
    if (a->kind != b->kind) return reject(a, b, "constructors differ");
    switch (a->kind) {
    case K::Unit: return true;
    case K::Base: return a->name == b->name || reject(a, b, "base types differ");
    case K::Var: return a->name == b->name || reject(a, b, "free type variables differ");
    case K::Chan: {
      if (a->in != b->in || a->out != b->out) return reject(a, b, "capabilities differ");
      if (a->args.size() != b->args.size()) return reject(a, b, "arity differs");
      if (equality_ && a->priority != b->priority) return reject(a, b, "priorities differ");
      if (equality_) return seq(a->args, b->args, 0);
      if (a->in == Cap::Present && a->out == Cap::Present) {
        trace_.push_back("lin_io");
        return seq(a->args, b->args, 0);
      }
      if (a->in == Cap::Present) {
        trace_.push_back("lin_i");
        return seq(a->args, b->args, 1);
      }
      if (a->out == Cap::Present) {
        trace_.push_back("lin_o");
        return seq(a->args, b->args, -1);
      }
      trace_.push_back("empty");
      return true;
    }
    case K::Shared:
      if (a->args.size() != b->args.size()) return reject(a, b, "arity differs");
      trace_.push_back("shared");
      return seq(a->args, b->args, 0);
    case K::Tuple:
      if (a->args.size() != b->args.size()) return reject(a, b, "arity differs");
      return seq(a->args, b->args, equality_ ? 0 : 1);
    case K::Variant: {
      for (const auto& [l, t] : a->branches) {
        if (!b->branches.count(l)) return reject(a, b, "label " + l + " missing");
      }
      if (equality_ && a->branches.size() != b->branches.size()) return reject(a, b, "label sets differ");
      trace_.push_back("variant");
      for (const auto& [l, t] : a->branches) {
        if (equality_ ? !(sub(t, b->branches.at(l)) && sub(b->branches.at(l), t)) : !sub(t, b->branches.at(l))) {
          return false;
        }
      }
      return true;
    }
    case K::Rec: break;
    }
    return reject(a, b, "unexpected type");
  }
};

} // namespace

SubtypeJudgement session_subtype(const STypePtr& a, const STypePtr& b) {
  check_guarded(a);
  check_guarded(b);
  return SessionSub(10 * (size(a) + size(b))).run(a, b);
}

SubtypeJudgement pi_subtype(const PTypePtr& a, const PTypePtr& b) {
  check_guarded(a);
  check_guarded(b);
  return PiSub(10 * (size(a) + size(b)), false).run(a, b);
}

bool pi_tree_equal(const PTypePtr& a, const PTypePtr& b) {
  return PiSub(10 * (size(a) + size(b)) + 64, true).run(a, b).holds;
}

bool session_tree_equal(const STypePtr& a, const STypePtr& b) {
  return session_subtype(a, b).holds && session_subtype(b, a).holds;
}

bool check_subtyping_theorem(const STypePtr& a, const STypePtr& b) {
  return session_subtype(a, b).holds == pi_subtype(encode_type(a), encode_type(b)).holds;
}

} // namespace pik

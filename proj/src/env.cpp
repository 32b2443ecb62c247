#include "pik/env.hpp"

namespace pik {

bool is_linear(const STypePtr& t) {
  if (!t->is_session()) return false;
  return unfold_all(t)->kind != SType::Kind::End;
}

bool is_linear(const PTypePtr& t) { return unfold_all(t)->has_capability(); }

namespace {

template <typename Env> std::string render(const Env& env) {
  std::string s = "{";
  bool first = true;
  for (const auto& [x, t] : env) {
    s += (first ? "" : ", ") + x + ": " + to_string(t);
    first = false;
  }
  return s + "}";
}

} // namespace

std::string to_string(const SessionEnv& env) { return render(env); }
std::string to_string(const PiEnv& env) { return render(env); }

} // namespace pik

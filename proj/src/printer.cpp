#include "pik/printer.hpp"

namespace pik {

namespace {

int level_of(const std::string& op) {
  if (op == "==" || op == "<" || op == "<=") return 1;
  if (op == "+" || op == "-") return 2;
  return 3;
}

std::string expr_at(const ExprPtr& e, int min_level) {
  switch (e->kind) {
  case Expr::Kind::Name: return e->name;
  case Expr::Kind::Unit: return "*";
  case Expr::Kind::Int: return std::to_string(e->value);
  case Expr::Kind::Bool: return e->flag ? "true" : "false";
  case Expr::Kind::Variant: return e->name + "(" + expr_at(e->lhs, 0) + ")";
  case Expr::Kind::Binary: {
    int lv = level_of(e->name);
    int left_level = lv == 1 ? 2 : lv;
    std::string s = expr_at(e->lhs, left_level) + e->name + expr_at(e->rhs, lv + 1);
    return lv < min_level ? "(" + s + ")" : s;
  }
  }
  return "";
}

// True when the rendering ends in a restriction whose scope would swallow a
// following "| Q".
bool open_tail(const ProcPtr& p) {
  using K = Proc::Kind;
  switch (p->kind) {
  case K::Res:
  case K::SRes: return true;
  case K::Out:
  case K::In:
  case K::Sel:
  case K::Rep: return p->cont->kind != K::Par && open_tail(p->cont);
  case K::If: return p->right->kind != K::Par && open_tail(p->right);
  default: return false;
  }
}

std::string print(const ProcPtr& p);

// A position that only admits a prefixed process.
std::string print_prefixed(const ProcPtr& p) {
  if (p->kind == Proc::Kind::Par) return "(" + print(p) + ")";
  return print(p);
}

std::string print_operand(const ProcPtr& p) {
  if (open_tail(p)) return "(" + print(p) + ")";
  return print(p);
}

std::string print(const ProcPtr& p) {
  using K = Proc::Kind;
  switch (p->kind) {
  case K::Nil: return "0";
  case K::Out: {
    std::string s = p->chan + "!<";
    for (std::size_t i = 0; i < p->args.size(); ++i) s += (i ? "," : "") + expr_at(p->args[i], 0);
    return s + ">." + print_prefixed(p->cont);
  }
  case K::In: {
    std::string s = p->chan + "?(";
    for (std::size_t i = 0; i < p->binders.size(); ++i) s += (i ? "," : "") + p->binders[i];
    return s + ")." + print_prefixed(p->cont);
  }
  case K::Sel: return p->chan + " <| " + p->label + "." + print_prefixed(p->cont);
  case K::Bra: {
    std::string s = p->chan + " |> {";
    bool first = true;
    for (const auto& [l, a] : p->arms) {
      s += (first ? "" : ", ") + l + ": " + print(a.body);
      first = false;
    }
    return s + "}";
  }
  case K::Case: {
    std::string s = "case " + expr_at(p->expr, 0) + " of {";
    bool first = true;
    for (const auto& [l, a] : p->arms) {
      s += (first ? " " : ", ") + l + "(" + a.binder + ") > " + print(a.body);
      first = false;
    }
    return s + " }";
  }
  case K::Par: {
    std::string r = p->right->kind == K::Par ? "(" + print(p->right) + ")" : print_operand(p->right);
    return print_operand(p->left) + " | " + r;
  }
  case K::SRes: {
    std::string s = "new " + p->chan + " " + p->chan2;
    if (p->session_annot) s += " : " + to_string(p->session_annot);
    return s + " in " + print(p->cont);
  }
  case K::Res: {
    std::string s = "new " + p->chan;
    if (p->session_annot) s += " : " + to_string(p->session_annot);
    if (p->pi_annot) s += " : " + to_string(p->pi_annot);
    return s + " in " + print(p->cont);
  }
  case K::Rep: return "*" + print_prefixed(p->cont);
  case K::If: {
    std::string a = p->left->kind == K::Par || open_tail(p->left) ? "(" + print(p->left) + ")" : print(p->left);
    return "if " + expr_at(p->expr, 0) + " then " + a + " else " + print_prefixed(p->right);
  }
  }
  return "";
}

const char* kind_name(Proc::Kind k) {
  switch (k) {
  case Proc::Kind::Nil: return "Inaction";
  case Proc::Kind::Out: return "Output";
  case Proc::Kind::In: return "Input";
  case Proc::Kind::Sel: return "Selection";
  case Proc::Kind::Bra: return "Branching";
  case Proc::Kind::Case: return "Case";
  case Proc::Kind::Par: return "Par";
  case Proc::Kind::SRes: return "SessionRes";
  case Proc::Kind::Res: return "ChanRes";
  case Proc::Kind::Rep: return "Replicated";
  case Proc::Kind::If: return "Conditional";
  }
  return "";
}

} // namespace

std::string pretty_print(const ProcPtr& p) { return print(p); }
std::string pretty_print(const ExprPtr& e) { return expr_at(e, 0); }

nlohmann::json to_json(const ExprPtr& e) {
  nlohmann::json j;
  switch (e->kind) {
  case Expr::Kind::Name: j = {{"kind", "Name"}, {"name", e->name}}; break;
  case Expr::Kind::Unit: j = {{"kind", "Unit"}}; break;
  case Expr::Kind::Int: j = {{"kind", "Int"}, {"value", e->value}}; break;
  case Expr::Kind::Bool: j = {{"kind", "Bool"}, {"value", e->flag}}; break;
  case Expr::Kind::Variant: j = {{"kind", "Variant"}, {"label", e->name}, {"children", {to_json(e->lhs)}}}; break;
  case Expr::Kind::Binary:
    j = {{"kind", "Binary"}, {"label", e->name}, {"children", {to_json(e->lhs), to_json(e->rhs)}}};
    break;
  }
  return j;
}

nlohmann::json to_json(const ProcPtr& p) {
  using K = Proc::Kind;
  nlohmann::json j;
  j["kind"] = kind_name(p->kind);
  auto children = nlohmann::json::array();
  switch (p->kind) {
  case K::Nil: break;
  case K::Out: {
    j["name"] = p->chan;
    auto args = nlohmann::json::array();
    for (const auto& a : p->args) args.push_back(to_json(a));
    j["args"] = args;
    children.push_back(to_json(p->cont));
    break;
  }
  case K::In:
    j["name"] = p->chan;
    j["binders"] = p->binders;
    children.push_back(to_json(p->cont));
    break;
  case K::Sel:
    j["name"] = p->chan;
    j["label"] = p->label;
    children.push_back(to_json(p->cont));
    break;
  case K::Bra:
  case K::Case:
    if (p->kind == K::Bra) j["name"] = p->chan;
    if (p->kind == K::Case) j["scrutinee"] = to_json(p->expr);
    for (const auto& [l, a] : p->arms) {
      nlohmann::json arm = {{"kind", "Arm"}, {"label", l}, {"children", {to_json(a.body)}}};
      if (!a.binder.empty()) arm["name"] = a.binder;
      children.push_back(arm);
    }
    break;
  case K::Par:
    children.push_back(to_json(p->left));
    children.push_back(to_json(p->right));
    break;
  case K::SRes:
  case K::Res:
    j["name"] = p->kind == K::SRes ? nlohmann::json{p->chan, p->chan2} : nlohmann::json(p->chan);
    if (p->session_annot) j["type"] = to_string(p->session_annot);
    if (p->pi_annot) j["type"] = to_string(p->pi_annot);
    children.push_back(to_json(p->cont));
    break;
  case K::Rep: children.push_back(to_json(p->cont)); break;
  case K::If:
    j["condition"] = to_json(p->expr);
    children.push_back(to_json(p->left));
    children.push_back(to_json(p->right));
    break;
  }
  j["children"] = children;
  return j;
}

} // namespace pik

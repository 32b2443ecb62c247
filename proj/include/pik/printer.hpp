// Canonical text and JSON renderings of processes and expressions.
#pragma once

#include <string>

#include <json.hpp>

#include "pik/process.hpp"

namespace pik {

/// Text accepted by parse_process; parsing it back gives an alpha-equivalent term.
std::string pretty_print(const ProcPtr& p);
std::string pretty_print(const ExprPtr& e);

/// AST dump with stable fields "kind", "name", "label", "children".
nlohmann::json to_json(const ProcPtr& p);
nlohmann::json to_json(const ExprPtr& e);

} // namespace pik

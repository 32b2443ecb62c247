// Typing contexts. Linearity of an entry is a property of its type: session
// types other than end are linear, as are pi channel types carrying a
// capability; everything else is unrestricted.
#pragma once

#include <map>
#include <string>

#include "pik/types.hpp"

namespace pik {

using SessionEnv = std::map<std::string, STypePtr>;
using PiEnv = std::map<std::string, PTypePtr>;

bool is_linear(const STypePtr& t);
bool is_linear(const PTypePtr& t);

std::string to_string(const SessionEnv& env);
std::string to_string(const PiEnv& env);

} // namespace pik

#pragma once

#include <string>

#include "json.hpp"

namespace nsslip {

using json = nlohmann::ordered_json;

// Doubles are written with 17 significant digits.
std::string dump17(const json& j, int indent = 2);

}  // namespace nsslip

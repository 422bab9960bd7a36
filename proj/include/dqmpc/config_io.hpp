#pragma once

#include <map>
#include <string>

#include "dqmpc/scenario.hpp"

namespace dqmpc {

// Flat key = value text (one pair per line, '#' comments). Keys mirror the
// config field names; vectors are space-separated components; omega_i /
// omega_t take their diagonals (3 resp. 6 values).
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);  // throws with line numbers
ConfigMap load_config_file(const std::string& path);

// Applies typed overrides onto a scenario. Unknown keys and malformed values
// throw std::invalid_argument naming the key.
void apply_config(ScenarioSpec& spec, const ConfigMap& overrides);

// The set of keys apply_config understands (used by the CLI to generate one
// flag per field).
const std::map<std::string, std::string>& config_key_help();

}  // namespace dqmpc

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gnas/errors.hpp"

namespace gnas {

/// Flat dotted-key configuration. Sectioned text configs ("[strategy]\n
/// iterations = 15") flatten to "strategy.iterations"; CLI overrides are
/// "key=value" pairs applied on top.
using ConfigMap = std::map<std::string, std::string>;

/// Parses the sectioned text format: '[section]' headers, 'key = value'
/// lines, '#' or ';' full-line comments. Keys outside a section stay bare.
ConfigMap parse_sectioned_config(std::string_view text);

/// Loads either a sectioned text config or a report manifest (detected by a
/// leading '{'), whose echoed effective_config replays the original run.
ConfigMap load_config_file(const std::filesystem::path& path);

void apply_override(ConfigMap& config, std::string_view key_eq_value);

std::string get_string(const ConfigMap& config, const std::string& key,
                       const std::string& fallback);
int get_int(const ConfigMap& config, const std::string& key, int fallback);
std::uint64_t get_u64(const ConfigMap& config, const std::string& key, std::uint64_t fallback);
double get_double(const ConfigMap& config, const std::string& key, double fallback);
bool get_bool(const ConfigMap& config, const std::string& key, bool fallback);

/// Splits "a,b,c" into trimmed non-empty tokens.
std::vector<std::string> split_list(std::string_view text);

}  // namespace gnas

#include "gnas/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gnas {
namespace {

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

}  // namespace

ConfigMap parse_sectioned_config(std::string_view text) {
  ConfigMap out;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream stream{std::string(text)};
  for (std::string raw; std::getline(stream, raw);) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    // report manifest: replay its echoed effective configuration
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("effective_config") ||
        !doc["effective_config"].is_object())
      throw ConfigError("JSON config must be a report manifest with 'effective_config': " +
                        path.string());
    ConfigMap out;
    for (const auto& [key, value] : doc["effective_config"].items()) {
      if (!value.is_string())
        throw ConfigError("manifest effective_config values must be strings: " + key);
      out[key] = value.get<std::string>();
    }
    return out;
  }
  return parse_sectioned_config(text);
}

void apply_override(ConfigMap& config, std::string_view key_eq_value) {
  const std::size_t eq = key_eq_value.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ConfigError("override must be 'dotted.key=value': '" + std::string(key_eq_value) + "'");
  config[trim(key_eq_value.substr(0, eq))] = trim(key_eq_value.substr(eq + 1));
}

std::string get_string(const ConfigMap& config, const std::string& key,
                       const std::string& fallback) {
  const auto it = config.find(key);
  return it == config.end() ? fallback : it->second;
}

int get_int(const ConfigMap& config, const std::string& key, int fallback) {
  const auto it = config.find(key);
  if (it == config.end()) return fallback;
  try {
    std::size_t pos = 0;
    const int value = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer: '" + it->second + "'");
  }
}

std::uint64_t get_u64(const ConfigMap& config, const std::string& key, std::uint64_t fallback) {
  const auto it = config.find(key);
  if (it == config.end()) return fallback;
  try {
    std::size_t pos = 0;
    const unsigned long long value = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an unsigned integer: '" + it->second + "'");
  }
}

double get_double(const ConfigMap& config, const std::string& key, double fallback) {
  const auto it = config.find(key);
  if (it == config.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double value = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: '" + it->second + "'");
  }
}

bool get_bool(const ConfigMap& config, const std::string& key, bool fallback) {
  const auto it = config.find(key);
  if (it == config.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string token =
        trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (!token.empty()) out.push_back(token);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace gnas

#include "cli/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bagl/errors.hpp"

namespace bagl::cli {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError("key '" + key + "': cannot parse '" + text + "'");
  return value;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key=value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key.empty()) throw ConfigError("empty config key");
  if (key == "estimator.kind") {
    values_["estimator"] = value;
  } else if (key == "estimator.path") {
    values_["external_path"] = value;
  } else {
    values_[key] = value;
  }
}

void RunConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string RunConfig::require(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

long RunConfig::get_long(const std::string& key, long fallback) const {
  return has(key) ? parse_number<long>(key, values_.at(key)) : fallback;
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_number<std::uint64_t>(key, values_.at(key)) : fallback;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_number<double>(key, values_.at(key)) : fallback;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = values_.at(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream in(get(key, ""));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void RunConfig::check_known(const std::set<std::string>& allowed, const std::string& command) const {
  for (const auto& [key, value] : values_)
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' for command '" + command + "'");
}

void RunConfig::require_existing_path(const std::string& key) const {
  const std::string path = require(key);
  if (!std::filesystem::exists(path)) throw ConfigError("key '" + key + "': path '" + path + "' does not exist");
}

}  // namespace bagl::cli

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace bagl::cli {

/// Flat key=value settings. Lines starting with '#' are comments.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text, const std::string& origin = "config");
  static RunConfig from_file(const std::string& path);

  /// "estimator.kind" and "estimator.path" are stored as "estimator" and
  /// "external_path".
  void set(const std::string& key, const std::string& value);
  /// Applies "key=value".
  void set_assignment(const std::string& assignment);

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) > 0; }
  [[nodiscard]] std::string get(const std::string& key, const std::string& fallback) const;
  [[nodiscard]] std::string require(const std::string& key) const;
  [[nodiscard]] long get_long(const std::string& key, long fallback) const;
  [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  [[nodiscard]] double get_double(const std::string& key, double fallback) const;
  [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list with whitespace trimmed; empty items dropped.
  [[nodiscard]] std::vector<std::string> get_list(const std::string& key) const;

  /// Throws ConfigError naming the first key outside `allowed`.
  void check_known(const std::set<std::string>& allowed, const std::string& command) const;
  /// Throws ConfigError if the file named by `key` does not exist.
  void require_existing_path(const std::string& key) const;

  [[nodiscard]] const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace bagl::cli

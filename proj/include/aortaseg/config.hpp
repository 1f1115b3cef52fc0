#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace aortaseg {

/// Flat `key = value` settings with `#` comments. Shared by the volume header,
/// the phantom description and run configuration files.
class Config {
 public:
  Config() = default;

  static Config parse(std::istream& in, const std::string& source = "<stream>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Whitespace-separated numbers; a single value is broadcast when `count` > 1; `count` 0 accepts any length.
  std::vector<double> get_doubles(const std::string& key, std::size_t count) const;

  /// Keys present here but absent from `known`, sorted.
  std::vector<std::string> unknown_keys(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
};

std::string trim(const std::string& s);

}  // namespace aortaseg

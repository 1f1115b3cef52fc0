#include "aortaseg/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aortaseg {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

Config Config::parse(std::istream& in, const std::string& source) {
  Config cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::runtime_error(source + ":" + std::to_string(line_no) + ": empty key");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse(in, path.string());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::require_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error("missing required key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(it->second.substr(used)).size() != 0) {
    throw std::runtime_error("key '" + key + "': not a number: '" + it->second + "'");
  }
  return v;
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(it->second.substr(used)).size() != 0) {
    throw std::runtime_error("key '" + key + "': not an integer: '" + it->second + "'");
  }
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw std::runtime_error("key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, std::size_t count) const {
  std::istringstream in(require_string(key));
  std::vector<double> out;
  double v = 0.0;
  while (in >> v) out.push_back(v);
  if (!in.eof()) throw std::runtime_error("key '" + key + "': malformed number list");
  if (out.size() == 1 && count > 1) out.assign(count, out.front());
  if (count != 0 && out.size() != count) {
    throw std::runtime_error("key '" + key + "': expected " + std::to_string(count) + " values");
  }
  return out;
}

std::vector<std::string> Config::unknown_keys(const std::set<std::string>& known) const {
  std::vector<std::string> out;
  for (const auto& [k, _] : values_) {
    if (!known.count(k)) out.push_back(k);
  }
  return out;
}

}  // namespace aortaseg

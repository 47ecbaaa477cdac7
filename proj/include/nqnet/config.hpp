#pragma once

// Flat key = value run configuration. One key per line, '#' starts a
// comment, surrounding whitespace is ignored. Each command declares its
// schema (key -> default); keys outside the schema are rejected.
// Precedence: schema default < config file < command-line override.

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nqnet {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ConfigSchema = std::map<std::string, std::string>;

namespace detail {
inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace detail

class RunConfig {
 public:
  explicit RunConfig(ConfigSchema schema) : values_(std::move(schema)) {}

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = value;
  }

  /// Applies "key=value".
  void set_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
    set(detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
  }

  void merge_file(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      try {
        set_assignment(line);
      } catch (const ConfigError& e) {
        throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config key '" + key + "' not in schema");
    return it->second;
  }

  double real(const std::string& key) const {
    return convert<double>(key, [](const std::string& s, std::size_t* pos) { return std::stod(s, pos); });
  }

  std::uint64_t u64(const std::string& key) const {
    const auto& s = str(key);
    if (!s.empty() && s[0] == '-') throw ConfigError("config key '" + key + "': expected non-negative integer");
    return convert<std::uint64_t>(key, [](const std::string& v, std::size_t* pos) { return std::stoull(v, pos); });
  }

  std::size_t size(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

  bool flag(const std::string& key) const {
    const auto& s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + s + "'");
  }

  /// Comma-separated list; empty string gives an empty list.
  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(str(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = detail::trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  std::vector<std::size_t> size_list(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& s : list(key)) {
      try {
        std::size_t pos = 0;
        const auto v = std::stoull(s, &pos);
        if (pos != s.size() || s[0] == '-') throw std::invalid_argument(s);
        out.push_back(static_cast<std::size_t>(v));
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad integer '" + s + "'");
      }
    }
    return out;
  }

  /// Writes every key in the effective configuration, sorted.
  void write(std::ostream& out) const {
    for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  template <class T, class F>
  T convert(const std::string& key, F parse) const {
    const auto& s = str(key);
    try {
      std::size_t pos = 0;
      T v = parse(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': cannot parse '" + s + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace nqnet

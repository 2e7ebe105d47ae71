#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "voxsae/core/error.hpp"
#include "voxsae/io/binary.hpp"
#include "voxsae/io/csv.hpp"

namespace voxsae::io {

/// section -> key -> raw value. Keys before any [section] land in "".
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Flat `key = value` text with `[section]` headers; `#` starts a comment.
inline ConfigSections parse_config(const std::string& text, const std::string& name = "config") {
  ConfigSections out;
  std::string section;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (out[section].count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    out[section][key] = trim(line.substr(eq + 1));
  }
  return out;
}

inline ConfigSections read_config(const std::filesystem::path& p) { return parse_config(read_file_text(p), p.string()); }

/// Binds config keys to typed fields. Applying a section with an unbound key
/// raises ConfigError naming it; snapshot() returns the resolved values.
static_assert(std::is_same_v<std::size_t, std::uint64_t>, "size_t fields bind through the uint64 overload");

class ConfigBinder {
 public:
  explicit ConfigBinder(std::string section) : section_(std::move(section)) {}

  ConfigBinder& bind(const std::string& key, double& ref) {
    add(key, [&ref, key, this](const std::string& v) { ref = parse_double(key, v); },
        [&ref] { return nlohmann::ordered_json(ref); });
    return *this;
  }
  ConfigBinder& bind(const std::string& key, std::uint64_t& ref) {
    add(key, [&ref, key, this](const std::string& v) { ref = parse_uint(key, v); },
        [&ref] { return nlohmann::ordered_json(ref); });
    return *this;
  }
  ConfigBinder& bind(const std::string& key, int& ref) {
    add(key, [&ref, key, this](const std::string& v) { ref = static_cast<int>(parse_int(key, v)); },
        [&ref] { return nlohmann::ordered_json(ref); });
    return *this;
  }
  ConfigBinder& bind(const std::string& key, bool& ref) {
    add(key,
        [&ref, key, this](const std::string& v) {
          if (v == "true" || v == "1") ref = true;
          else if (v == "false" || v == "0") ref = false;
          else throw ConfigError(where(key) + ": expected true/false, got '" + v + "'");
        },
        [&ref] { return nlohmann::ordered_json(ref); });
    return *this;
  }
  ConfigBinder& bind(const std::string& key, std::string& ref) {
    add(key, [&ref](const std::string& v) { ref = v; }, [&ref] { return nlohmann::ordered_json(ref); });
    return *this;
  }
  ConfigBinder& bind(const std::string& key, std::vector<double>& ref) {
    add(key,
        [&ref, key, this](const std::string& v) {
          ref.clear();
          std::istringstream in(v);
          std::string item;
          while (std::getline(in, item, ',')) ref.push_back(parse_double(key, trim(item)));
        },
        [&ref] { return nlohmann::ordered_json(ref); });
    return *this;
  }

  bool has(const std::string& key) const { return setters_.count(key) > 0; }

  void set(const std::string& key, const std::string& value) {
    const auto it = setters_.find(key);
    if (it == setters_.end()) throw ConfigError("unknown key '" + key + "' in [" + section_ + "]");
    it->second(value);
  }

  void apply(const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) set(k, v);
  }

  /// Applies this binder's section; any other non-empty section is rejected.
  void apply(const ConfigSections& sections) {
    for (const auto& [name, kv] : sections) {
      if (name == section_ || name.empty()) {
        apply(kv);
      } else {
        throw ConfigError("unknown section [" + name + "] for command '" + section_ + "'");
      }
    }
  }

  nlohmann::ordered_json snapshot() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& k : order_) j[k] = getters_.at(k)();
    return j;
  }

 private:
  void add(const std::string& key, std::function<void(const std::string&)> s,
           std::function<nlohmann::ordered_json()> g) {
    if (!setters_.count(key)) order_.push_back(key);
    setters_[key] = std::move(s);
    getters_[key] = std::move(g);
  }
  std::string where(const std::string& key) const { return "[" + section_ + "] " + key; }
  double parse_double(const std::string& key, const std::string& v) const {
    std::optional<double> d;
    try {
      d = parse_cell(v, where(key));
    } catch (const InputError&) {
    }
    if (!d || !std::isfinite(*d)) throw ConfigError(where(key) + ": expected a finite number, got '" + v + "'");
    return *d;
  }
  std::int64_t parse_int(const std::string& key, const std::string& v) const {
    std::int64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
      throw ConfigError(where(key) + ": expected an integer, got '" + v + "'");
    }
    return out;
  }
  std::uint64_t parse_uint(const std::string& key, const std::string& v) const {
    const auto i = parse_int(key, v);
    if (i < 0) throw ConfigError(where(key) + ": expected a non-negative integer, got '" + v + "'");
    return static_cast<std::uint64_t>(i);
  }

  std::string section_;
  std::vector<std::string> order_;
  std::map<std::string, std::function<void(const std::string&)>> setters_;
  std::map<std::string, std::function<nlohmann::ordered_json()>> getters_;
};

}  // namespace voxsae::io

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hermein/errors.hpp"

namespace hermein {

/// Flat key-value experiment config: one `section.key = value` per line,
/// `#` comments, no nesting.
class Config {
public:
  static Config parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw parse_error(lineno, 1, "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw parse_error(lineno, 1, "empty key");
      if (value.empty())
        throw parse_error(lineno, static_cast<int>(eq) + 2, "empty value");
      for (char c : key)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.')
          throw parse_error(lineno, static_cast<int>(line.find(c)) + 1,
                            "invalid character in key");
      cfg.values_[key] = {value, lineno};
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
      throw parse_error(0, 0, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
      throw parse_error(0, 0, "missing required key '" + key + "'");
    return it->second.raw;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  long long get_int(const std::string& key) const {
    const auto& entry = at(key);
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(entry.raw, &pos);
    } catch (const std::exception&) {
      throw parse_error(entry.line, 1, "expected integer for '" + key + "'");
    }
    if (pos != entry.raw.size())
      throw parse_error(entry.line, 1, "trailing characters after integer for '" + key + "'");
    return v;
  }

  long long get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  double get_double(const std::string& key) const {
    const auto& entry = at(key);
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(entry.raw, &pos);
    } catch (const std::exception&) {
      throw parse_error(entry.line, 1, "expected number for '" + key + "'");
    }
    if (pos != entry.raw.size())
      throw parse_error(entry.line, 1, "trailing characters after number for '" + key + "'");
    return v;
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& entry = at(key);
    if (entry.raw == "true" || entry.raw == "1") return true;
    if (entry.raw == "false" || entry.raw == "0") return false;
    throw parse_error(entry.line, 1, "expected true/false for '" + key + "'");
  }

  std::vector<int> get_int_list(const std::string& key) const {
    const auto& entry = at(key);
    std::string s = entry.raw;
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
      throw parse_error(entry.line, 1, "expected [a,b,...] for '" + key + "'");
    s = s.substr(1, s.size() - 2);
    std::vector<int> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) throw parse_error(entry.line, 1, "empty list entry in '" + key + "'");
      std::size_t pos = 0;
      int v = 0;
      try {
        v = std::stoi(t, &pos);
      } catch (const std::exception&) {
        throw parse_error(entry.line, 1, "expected integer list entry in '" + key + "'");
      }
      if (pos != t.size())
        throw parse_error(entry.line, 1, "bad integer list entry in '" + key + "'");
      out.push_back(v);
    }
    if (out.empty()) throw parse_error(entry.line, 1, "empty list for '" + key + "'");
    return out;
  }

  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const {
    return has(key) ? get_int_list(key) : std::move(fallback);
  }

private:
  struct Entry {
    std::string raw;
    int line = 0;
  };

  const Entry& at(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
      throw parse_error(0, 0, "missing required key '" + key + "'");
    return it->second;
  }

  static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return {};
    return s.substr(a, b - a + 1);
  }

  std::map<std::string, Entry> values_;
};

} // namespace hermein

#pragma once

// Flat `section.key = value` configuration text. Chosen over a rich format
// to keep parsing dependency-free and byte-stable: identifiers, integers,
// reals, quoted strings, and comma lists are the whole grammar. Unknown
// keys are errors, not warnings.

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dep {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  bool start = true;
  for (char c : k) {
    if (start) {
      if (!std::isalpha(static_cast<unsigned char>(c)) && c != '_') return false;
      start = false;
    } else if (c == '.') {
      start = true;
    } else if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
      return false;
    }
  }
  return !start;
}

}  // namespace detail

inline KeyValues parse_config_text(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // comment: first '#' outside quotes
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": missing '='");
    const std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    if (!detail::valid_key(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": bad key '" + key + "'");
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated string");
      value = value.substr(1, value.size() - 2);
    }
    if (kv.count(key))
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

inline KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

inline std::string render_config(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += " = ";
    const bool needs_quotes =
        v.empty() || v.find_first_of(" #\"") != std::string::npos;
    if (needs_quotes) {
      out += '"';
      out += v;
      out += '"';
    } else {
      out += v;
    }
    out += '\n';
  }
  return out;
}

// Typed access over a schema of known keys with defaults.
class Settings {
 public:
  explicit Settings(KeyValues defaults) : kv_(std::move(defaults)) {}

  void merge(const KeyValues& overrides) {
    for (const auto& [k, v] : overrides) {
      auto it = kv_.find(k);
      if (it == kv_.end()) throw ConfigError("unknown config key: " + k);
      it->second = v;
    }
  }

  const KeyValues& effective() const { return kv_; }

  const std::string& str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
  }

  std::int64_t integer(const std::string& key) const {
    return parse_int(str(key), key);
  }

  double real(const std::string& key) const { return parse_real(str(key), key); }

  bool flag(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw ConfigError("config key " + key + ": expected boolean, got '" + v + "'");
  }

  std::vector<std::int64_t> int_list(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const auto& tok : split(str(key))) out.push_back(parse_int(tok, key));
    return out;
  }

  std::vector<double> real_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& tok : split(str(key))) out.push_back(parse_real(tok, key));
    return out;
  }

  std::vector<std::string> str_list(const std::string& key) const {
    return split(str(key));
  }

 private:
  static std::vector<std::string> split(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(v);
    while (std::getline(in, cur, ',')) {
      cur = detail::trim(cur);
      if (!cur.empty()) out.push_back(cur);
    }
    return out;
  }

  static std::int64_t parse_int(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
      throw ConfigError("config key " + key + ": expected integer, got '" + v + "'");
    return x;
  }

  static double parse_real(const std::string& v, const std::string& key) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw ConfigError("config key " + key + ": expected real, got '" + v + "'");
    return x;
  }

  KeyValues kv_;
};

}  // namespace dep

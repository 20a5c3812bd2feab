#include "innervsense/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "innervsense/error.hpp"

namespace innervsense {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw Error(Errc::bad_params, "key '" + key + "': '" + t + "' is not a number");
  }
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::bad_params, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    if (key.empty()) throw Error(Errc::bad_params, "config line " + std::to_string(lineno) + ": empty key");
    cfg.entries_[key] = trim(std::string_view(stripped).substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string* KeyValueConfig::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto* v = find(key);
  return v ? parse_double(key, *v) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  long long out = 0;
  const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
  if (res.ec != std::errc{} || res.ptr != v->data() + v->size()) {
    throw Error(Errc::bad_params, "key '" + key + "': '" + *v + "' is not an integer");
  }
  return out;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = find(key);
  return v ? *v : fallback;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const auto* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::string_view rest = *v;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    out.push_back(parse_double(key, rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

void KeyValueConfig::reject_unused() const {
  std::string unknown;
  for (const auto& [k, v] : entries_) {
    if (used_.count(k) == 0) unknown += (unknown.empty() ? "" : ", ") + k;
  }
  if (!unknown.empty()) throw Error(Errc::bad_params, "unknown config keys: " + unknown);
}

}  // namespace innervsense

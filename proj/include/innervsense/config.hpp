#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace innervsense {

// Flat "key = value" settings with '#' comments. Lists are comma separated.
// Lookups record which keys were consumed so typos can be rejected.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool contains(const std::string& key) const { return entries_.count(key) != 0; }

  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  // Throws Errc::bad_params naming every key that no lookup has touched.
  void reject_unused() const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

 private:
  const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace innervsense

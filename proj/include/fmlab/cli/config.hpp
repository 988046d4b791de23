#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fmlab::cli {

// Sectioned key-value configuration. Every key has a default; unknown
// sections or keys are rejected with the full list.
class Config {
 public:
  Config();  // all defaults

  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text);

  // "section.key=value"
  void apply_override(const std::string& assignment);
  void set(const std::string& section, const std::string& key, const std::string& value);

  const std::string& get(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
  std::vector<int> get_ints(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& section, const std::string& key) const;

  nlohmann::json to_json() const;
  std::string to_ini() const;

  // Section -> ordered (key, default) pairs.
  static const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>&
  schema();

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace fmlab::cli

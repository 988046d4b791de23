#include "fmlab/cli/config.hpp"

#include <charconv>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fmlab/core/errors.hpp"
#include "fmlab/io.hpp"

namespace fmlab::cli {

namespace {

using Schema =
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>;

const std::pair<std::string, std::string>* find_key(const std::string& section, const std::string& key) {
  for (const auto& [name, keys] : Config::schema()) {
    if (name != section) continue;
    for (const auto& kv : keys)
      if (kv.first == key) return &kv;
  }
  return nullptr;
}

std::string where(const std::string& section, const std::string& key) { return section + "." + key; }

}  // namespace

const Schema& Config::schema() {
  static const Schema s = {
      {"dataset",
       {{"name", "two_moons"},
        {"noise", "default"},
        {"center_x", "0"},
        {"center_y", "0"},
        {"samples", "512"},
        {"seed", "2"}}},
      {"field",
       {{"hidden", "64,64"},
        {"time_features", "8"},
        {"checkpoint", ""},
        {"residual_checkpoint", ""},
        {"residual_widths", "16"},
        {"residual_activations", "tanh"},
        {"leaky_slope", "0.2"},
        {"residual_decay", "1"}}},
      {"solver",
       {{"method", "dopri5"},
        {"steps", "100"},
        {"rtol", "1e-5"},
        {"atol", "1e-5"}}},
      {"train",
       {{"steps", "2000"},
        {"batch_size", "256"},
        {"lr", "1e-4"},
        {"grad_clip", "1"},
        {"coupling", "minibatch_ot"},
        {"seed", "0"},
        {"checkpoint_interval", "0"}}},
      {"finetune",
       {{"steps", "200"},
        {"batch_size", "256"},
        {"lr", "5e-6"},
        {"grad_clip", "1"},
        {"solver", "euler"},
        {"solver_steps", "16"},
        {"sigma", "1"},
        {"horizon_T", "0.5"},
        {"lambda_omega", "0"},
        {"eps_A", "1e-6"},
        {"coupling", "minibatch_ot"},
        {"repair_per_batch", "true"},
        {"freeze_pretrained", "true"},
        {"seed", "1"}}},
      {"stability",
       {{"certificate", ""},
        {"tol", "1e-9"},
        {"probes", "100"},
        {"horizon", "1"},
        {"probe_scale", "1"},
        {"region_radius", "5"},
        {"seed", "3"}}},
      {"output", {{"root", "runs"}, {"run", ""}}},
  };
  return s;
}

Config::Config() {
  for (const auto& [section, keys] : schema())
    for (const auto& [key, value] : keys) values_[section][key] = value;
}

Config Config::parse(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  Config cfg;
  std::vector<std::string> unknown;
  for (const auto& [section, node] : tree) {
    if (node.empty()) {
      bool known_section = false;
      for (const auto& entry : schema()) known_section = known_section || entry.first == section;
      if (!known_section || !node.data().empty()) unknown.push_back(section + " (not a section)");
      continue;
    }
    for (const auto& [key, leaf] : node) {
      if (!find_key(section, key)) {
        unknown.push_back(where(section, key));
        continue;
      }
      cfg.values_[section][key] = boost::algorithm::trim_copy(leaf.get_value<std::string>());
    }
  }
  if (!unknown.empty())
    throw ConfigError("unknown config keys: " + boost::algorithm::join(unknown, ", "));
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse(read_text_file(path));
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  if (!find_key(section, key)) throw ConfigError("unknown config keys: " + where(section, key));
  values_[section][key] = value;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("override must look like section.key=value: " + assignment);
  set(boost::algorithm::trim_copy(assignment.substr(0, dot)),
      boost::algorithm::trim_copy(assignment.substr(dot + 1, eq - dot - 1)),
      boost::algorithm::trim_copy(assignment.substr(eq + 1)));
}

const std::string& Config::get(const std::string& section, const std::string& key) const {
  const auto s = values_.find(section);
  if (s == values_.end() || !s->second.count(key))
    throw ConfigError("config key not defined: " + where(section, key));
  return s->second.at(key);
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  return get(section, key);
}

int Config::get_int(const std::string& section, const std::string& key) const {
  const std::string& v = get(section, key);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(where(section, key) + " must be an integer, got '" + v + "'");
  return out;
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key) const {
  const std::string& v = get(section, key);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(where(section, key) + " must be a nonnegative integer, got '" + v + "'");
  return out;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const std::string& v = get(section, key);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(where(section, key) + " must be a number, got '" + v + "'");
  return out;
}

bool Config::get_bool(const std::string& section, const std::string& key) const {
  const std::string v = boost::algorithm::to_lower_copy(get(section, key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(where(section, key) + " must be true or false, got '" + v + "'");
}

std::vector<std::string> Config::get_strings(const std::string& section, const std::string& key) const {
  std::vector<std::string> parts;
  const std::string& v = get(section, key);
  if (boost::algorithm::trim_copy(v).empty()) return parts;
  boost::algorithm::split(parts, v, boost::algorithm::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  return parts;
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key) const {
  std::vector<double> out;
  for (const auto& p : get_strings(section, key)) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), x);
    if (ec != std::errc() || ptr != p.data() + p.size())
      throw ConfigError(where(section, key) + " must be a comma-separated list of numbers");
    out.push_back(x);
  }
  return out;
}

std::vector<int> Config::get_ints(const std::string& section, const std::string& key) const {
  std::vector<int> out;
  for (const auto& p : get_strings(section, key)) {
    int x = 0;
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), x);
    if (ec != std::errc() || ptr != p.data() + p.size())
      throw ConfigError(where(section, key) + " must be a comma-separated list of integers");
    out.push_back(x);
  }
  return out;
}

nlohmann::json Config::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [section, keys] : schema())
    for (const auto& kv : keys) j[section][kv.first] = values_.at(section).at(kv.first);
  return j;
}

std::string Config::to_ini() const {
  std::ostringstream os;
  for (const auto& [section, keys] : schema()) {
    os << '[' << section << "]\n";
    for (const auto& kv : keys) os << kv.first << " = " << values_.at(section).at(kv.first) << '\n';
    os << '\n';
  }
  return os.str();
}

}  // namespace fmlab::cli

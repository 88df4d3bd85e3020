#include "aitsahalia/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "aitsahalia/taming.hpp"

namespace aitsahalia {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "'" + key + "' expects a number, got '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long n = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "'" + key + "' expects an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw Error(ErrorCode::InvalidConfig, "'" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  for (const auto& part : split(text, ',')) {
    const auto dash = part.find('-', 1);
    if (dash != std::string::npos) {
      const long a = to_long("levels", trim(part.substr(0, dash)));
      const long b = to_long("levels", trim(part.substr(dash + 1)));
      if (b < a) throw Error(ErrorCode::InvalidConfig, "level range '" + part + "' is descending");
      for (long l = a; l <= b; ++l) levels.push_back(static_cast<int>(l));
    } else {
      levels.push_back(static_cast<int>(to_long("levels", part)));
    }
  }
  if (levels.empty()) throw Error(ErrorCode::InvalidConfig, "empty level list");
  for (int l : levels) {
    if (l < 0 || l > 24) throw Error(ErrorCode::InvalidConfig, "levels must lie in [0, 24]");
  }
  return levels;
}

std::vector<SchemeKind> parse_schemes(const std::string& text) {
  std::vector<SchemeKind> schemes;
  for (const auto& part : split(text, ',')) schemes.push_back(parse_scheme(part));
  if (schemes.empty()) throw Error(ErrorCode::InvalidConfig, "empty scheme list");
  return schemes;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> values;
  for (const auto& part : split(text, ',')) values.push_back(to_double("p", part));
  if (values.empty()) throw Error(ErrorCode::InvalidConfig, "empty number list");
  return values;
}

void load_config(std::istream& in, RunConfig& cfg) {
  static const char* const kModelKeys[] = {"c_m1", "c0", "c1", "c2", "c3", "kappa", "rho", "x0"};
  std::map<std::string, double> model;
  std::string section;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::InvalidConfig, "malformed section on line " + std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "run") {
        throw Error(ErrorCode::InvalidConfig, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig, "expected key = value on line " + std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section == "model") {
      if (std::find(std::begin(kModelKeys), std::end(kModelKeys), key) == std::end(kModelKeys)) {
        throw Error(ErrorCode::InvalidConfig, "unknown model key '" + key + "'");
      }
      model[key] = to_double(key, value);
    } else if (section == "run") {
      if (key == "preset") cfg.preset = value;
      else if (key == "schemes" || key == "scheme") cfg.schemes = parse_schemes(value);
      else if (key == "reference") cfg.reference = parse_scheme(value);
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_long(key, value));
      else if (key == "paths") cfg.paths = to_long(key, value);
      else if (key == "levels") cfg.levels = parse_levels(value);
      else if (key == "ref_level") cfg.ref_level = static_cast<int>(to_long(key, value));
      else if (key == "alpha") cfg.alpha = to_double(key, value);
      else if (key == "T") cfg.horizon = to_double(key, value);
      else if (key == "out") cfg.out = value;
      else if (key == "workers") cfg.workers = static_cast<int>(to_long(key, value));
      else if (key == "gamma") cfg.gamma = to_double(key, value);
      else if (key == "h_level") cfg.h_level = static_cast<int>(to_long(key, value));
      else if (key == "p") cfg.p_list = parse_doubles(value);
      else if (key == "payoff") cfg.payoff = value;
      else if (key == "strike") cfg.strike = to_double(key, value);
      else if (key == "rmse") cfg.target_rmse = to_double(key, value);
      else if (key == "inverse") cfg.inverse = to_bool(key, value);
      else throw Error(ErrorCode::InvalidConfig, "unknown run key '" + key + "'");
    } else {
      throw Error(ErrorCode::InvalidConfig, "setting outside of a section on line " + std::to_string(line_no));
    }
  }
  if (!model.empty()) {
    for (const char* key : kModelKeys) {
      if (!model.count(key)) throw Error(ErrorCode::InvalidConfig, std::string("[model] is missing '") + key + "'");
    }
    cfg.params = Params{model["c_m1"], model["c0"],    model["c1"],  model["c2"],
                        model["c3"],   model["kappa"], model["rho"], model["x0"]};
  }
}

void load_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config file '" + path + "'");
  load_config(in, cfg);
}

Params RunConfig::model() const {
  const Params p = params ? *params : aitsahalia::preset(preset);
  if (p.kappa > kMaxConfigExponent || p.rho > kMaxConfigExponent) {
    throw Error(ErrorCode::ExponentOutOfRange, "kappa and rho are limited to 64");
  }
  return aitsahalia::validate(p);
}

void validate(const RunConfig& cfg) {
  cfg.model();
  validate(TamingConfig{cfg.alpha, cfg.horizon});
  if (cfg.workers < 0) throw Error(ErrorCode::InvalidConfig, "workers must be >= 0");
  if (cfg.paths && *cfg.paths < 0) throw Error(ErrorCode::InvalidConfig, "paths must be >= 0");
}

}  // namespace aitsahalia

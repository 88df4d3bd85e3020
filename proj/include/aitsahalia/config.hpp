#pragma once

// Run configuration files.
//
// Grammar (one setting per line, '#' starts a comment, blank lines ignored):
//
//   [model]             c_m1, c0, c1, c2, c3, kappa, rho, x0   (all eight required)
//   [run]               preset, schemes, reference, seed, paths, levels, ref_level,
//                       alpha, T, out, workers, gamma, h_level, p, payoff, strike,
//                       rmse, inverse
//   key = value
//
// A [model] section overrides any preset. Level lists accept "4-8" or "4,5,6".

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aitsahalia/model.hpp"
#include "aitsahalia/schemes.hpp"

namespace aitsahalia {

// The largest kappa/rho accepted from configuration; bigger exponents are untested.
inline constexpr double kMaxConfigExponent = 64.0;

struct RunConfig {
  std::string preset = "eg1";
  std::optional<Params> params;  // inline model, takes precedence over preset
  std::uint64_t seed = 20231;
  double alpha = 0.5;
  double horizon = 1.0;
  std::string out = ".";
  int workers = 0;  // 0 = all cores

  // Defaults of these depend on the subcommand.
  std::optional<std::vector<SchemeKind>> schemes;
  std::optional<long> paths;
  std::optional<int> ref_level;
  std::optional<std::vector<int>> levels;
  std::optional<int> h_level;

  std::optional<double> gamma;
  SchemeKind reference = SchemeKind::BEM;
  std::vector<double> p_list{2.0};
  std::string payoff = "identity";
  double strike = 1.0;
  double target_rmse = 0.01;
  bool inverse = false;

  // Model after preset/inline resolution, validated.
  Params model() const;
  std::string model_id() const { return params ? std::string("custom") : preset; }
};

std::vector<int> parse_levels(const std::string& text);
std::vector<SchemeKind> parse_schemes(const std::string& text);
std::vector<double> parse_doubles(const std::string& text);

void load_config(std::istream& in, RunConfig& cfg);
void load_config_file(const std::string& path, RunConfig& cfg);

// Checks that do not depend on the subcommand: model validity, alpha >= 1/2,
// positive horizon, worker count. Step-size restrictions are enforced by the
// studies themselves.
void validate(const RunConfig& cfg);

}  // namespace aitsahalia

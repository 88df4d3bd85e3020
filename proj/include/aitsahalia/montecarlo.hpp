#pragma once

// Monte Carlo studies: strong-error convergence against a fine reference,
// least-squares rate fits, empirical moment stability and multilevel
// estimation of E[P(X_T)].

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aitsahalia/model.hpp"
#include "aitsahalia/schemes.hpp"

namespace aitsahalia {

struct RatePoint {
  double h;
  double e_h;
};

struct RateFit {
  double q = 0;      // slope of log2 e_h against log2 h
  double resid = 0;  // 2-norm of the least-squares residual vector
};

// Ordinary least squares of log2 e_h = q log2 h + b.
RateFit fit_rate(std::span<const RatePoint> points);

// ---------------------------------------------------------------------------
// Strong error

struct StudyConfig {
  std::string preset_id = "custom";
  Params params;
  std::vector<SchemeKind> schemes{SchemeKind::TEM, SchemeKind::BEM};
  SchemeKind reference = SchemeKind::BEM;
  int ref_level = 14;
  std::vector<int> test_levels{4, 5, 6, 7, 8, 9};
  long paths = 10000;
  std::uint64_t seed = 20231;
  double horizon = 1.0;
  double alpha = 0.5;
  NewtonSettings newton;
  int workers = 1;
  // Permits test levels equal to the reference level (coupling self-checks).
  bool allow_reference_level = false;
};

struct LevelError {
  SchemeKind scheme;
  int level;
  double h;
  double e_h;
  double seconds;     // integration wall time summed over paths
  long violations;    // paths that lost positivity
  long censored;      // paths stopped early for any reason (excluded from e_h)
};

struct SchemeSummary {
  SchemeKind scheme;
  std::optional<RateFit> fit;  // present when >= 3 levels have positive errors
  double seconds = 0;
  long violations = 0;
};

struct ConvergenceReport {
  std::string preset_id;
  SchemeKind reference = SchemeKind::BEM;
  int ref_level = 0;
  std::vector<int> levels;
  long n_paths = 0;
  long reference_failures = 0;
  double reference_seconds = 0;
  std::vector<LevelError> rows;  // scheme-major, levels in the requested order
  std::vector<SchemeSummary> summaries;

  const LevelError& at(SchemeKind scheme, int level) const;
  const SchemeSummary& summary(SchemeKind scheme) const;
};

// e_h = sqrt(max_n mean_m |X_ref(t_n) - Y_n|^2) over the coarse grid points t_n,
// each test path driven by the pairwise-summed reference increments.
ConvergenceReport strong_error_study(const StudyConfig& cfg);

// ---------------------------------------------------------------------------
// Moments

struct MomentConfig {
  Params params;
  SchemeKind scheme = SchemeKind::TEM;
  std::vector<double> p_list{2.0};
  std::vector<int> h_levels{4, 6, 8};
  long paths = 2000;
  std::uint64_t seed = 20232;
  double horizon = 1.0;
  double alpha = 0.5;
  NewtonSettings newton;
  int workers = 1;
  bool inverse = false;  // E|Y_n|^(-p) instead of E|Y_n|^p
};

struct MomentRow {
  double p;
  int level;
  double h;
  double sup_moment;        // max_n of the per-step means
  Eigen::VectorXd per_step; // (1/M) sum_m |Y_n|^(+-p), n = 0..N
  long censored;
};

struct MomentReport {
  SchemeKind scheme = SchemeKind::TEM;
  bool inverse = false;
  long n_paths = 0;
  std::vector<MomentRow> rows;
  long censored_total = 0;
  bool insufficient_samples = false;  // fewer than 2 usable paths
  std::vector<std::string> warnings;
  // Per p, max/min of sup_moment across h; pass iff every spread < 2 and
  // finite and no level is short of samples.
  std::vector<double> spreads;
  bool pass = false;

  const MomentRow& at(double p, int level) const;
};

MomentReport moment_study(const MomentConfig& cfg);

// ---------------------------------------------------------------------------
// Multilevel Monte Carlo

enum class PayoffKind { Identity, Call, Digital };

struct Payoff {
  PayoffKind kind = PayoffKind::Identity;
  double strike = 1.0;

  double operator()(double x) const;
  std::string id() const;
};

Payoff parse_payoff(const std::string& name, double strike);

struct MlmcConfig {
  Params params;
  SchemeKind scheme = SchemeKind::TEM;
  Payoff payoff;
  double target_rmse = 0.01;
  std::uint64_t seed = 20233;
  double horizon = 1.0;
  double alpha = 0.5;
  NewtonSettings newton;
  int min_level = 2;
  int max_level = 20;
  long initial_samples = 1000;
  long max_samples = 20'000'000;  // total over all levels
  int workers = 1;
};

struct MlmcLevel {
  int level;
  long samples = 0;
  double sum = 0;
  double sum_sq = 0;

  double mean() const { return samples > 0 ? sum / static_cast<double>(samples) : 0.0; }
  double variance() const;
};

struct MlmcResult {
  std::string payoff_id;
  std::vector<MlmcLevel> levels;
  double estimate = 0;
  double variance = 0;  // sum_l V_l / N_l
  double bias_sq = 0;   // weak-order-1 extrapolation from the two finest levels
  double target_rmse = 0;
  bool variance_decay = false;  // V_l decreasing over the last >= 3 levels

  double std_error() const;
};

// Adaptive driver: grows the finest level until the extrapolated bias falls
// below target/sqrt(2) and allocates N_l = ceil(2 eps^-2 sqrt(V_l/C_l) sum sqrt(V_k C_k)).
MlmcResult mlmc_estimate(const MlmcConfig& cfg);

// Fixed hierarchy min_level..finest_level with equal sample counts. With
// shared_samples, sample i of every level is driven by the same fine lattice
// (seed, i), so the sum of level means telescopes to the finest-level mean.
MlmcResult mlmc_fixed(const MlmcConfig& cfg, int finest_level, long samples_per_level,
                      bool shared_samples);

struct SingleLevelEstimate {
  double mean = 0;
  double std_error = 0;
  long samples = 0;
};

// Plain Monte Carlo of E[P(Y_N)] at h = T 2^-level, path i driven by lattice (seed, i).
SingleLevelEstimate single_level_estimate(const Params& params, SchemeKind scheme, const Payoff& payoff,
                                          int level, long samples, std::uint64_t seed,
                                          double horizon = 1.0, double alpha = 0.5, int workers = 1);

}  // namespace aitsahalia

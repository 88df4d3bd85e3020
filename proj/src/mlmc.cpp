#include <algorithm>
#include <cmath>
#include <limits>

#include "aitsahalia/montecarlo.hpp"
#include "aitsahalia/noise.hpp"
#include "aitsahalia/parallel.hpp"

namespace aitsahalia {

double Payoff::operator()(double x) const {
  switch (kind) {
    case PayoffKind::Identity: return x;
    case PayoffKind::Call: return std::max(x - strike, 0.0);
    case PayoffKind::Digital: return x > strike ? 1.0 : 0.0;
  }
  return x;
}

std::string Payoff::id() const {
  switch (kind) {
    case PayoffKind::Identity: return "identity";
    case PayoffKind::Call: return "call";
    case PayoffKind::Digital: return "digital";
  }
  return "?";
}

Payoff parse_payoff(const std::string& name, double strike) {
  if (name == "identity") return {PayoffKind::Identity, strike};
  if (name == "call") return {PayoffKind::Call, strike};
  if (name == "digital") return {PayoffKind::Digital, strike};
  throw Error(ErrorCode::InvalidConfig, "unknown payoff '" + name + "' (identity, call, digital)");
}

double MlmcLevel::variance() const {
  if (samples < 2) return 0.0;
  const double n = static_cast<double>(samples);
  const double m = sum / n;
  return std::max(0.0, (sum_sq / n - m * m) * n / (n - 1.0));
}

double MlmcResult::std_error() const { return std::sqrt(variance); }

namespace {

constexpr int kLevelShift = 48;

struct Sums {
  double sum = 0;
  double sum_sq = 0;
};

class LevelSampler {
 public:
  explicit LevelSampler(const MlmcConfig& cfg) : cfg_(cfg), params_(validate(cfg.params)) {
    validate(TamingConfig{cfg.alpha, cfg.horizon});
    if (cfg.scheme == SchemeKind::EM) {
      throw Error(ErrorCode::InvalidConfig, "MLMC supports the tem and bem schemes");
    }
  }

  double payoff_at(const Eigen::VectorXd& dW, int level) const {
    auto sc = SchemeConfig<double>::uniform(cfg_.scheme, cfg_.horizon, 1L << level, cfg_.alpha);
    sc.newton = cfg_.newton;
    const auto traj = integrate(params_, sc, dW);
    if (!traj.ok()) {
      throw Error(traj.status == StepStatus::Overflow ? ErrorCode::Overflow : ErrorCode::SolverFailed,
                  "MLMC sample path stopped early");
    }
    return cfg_.payoff(traj.states(traj.states.size() - 1));
  }

  // P_l - P_{l-1} (or P_l on the coarsest level) from one lattice at level >= l.
  double correction(const BrownianLattice& lattice, int level) const {
    const double fine = payoff_at(lattice.coarsen(level), level);
    if (level == cfg_.min_level) return fine;
    return fine - payoff_at(lattice.coarsen(level - 1), level - 1);
  }

  // Adds `count` independent samples (indices offset..offset+count) to `lvl`.
  void extend(MlmcLevel& lvl, long count) const {
    if (count <= 0) return;
    const long offset = lvl.samples;
    auto blocks = for_each_block<Sums>(count, cfg_.workers, [&](long begin, long end) {
      Sums s;
      for (long i = begin; i < end; ++i) {
        const std::uint64_t path =
            (static_cast<std::uint64_t>(lvl.level) << kLevelShift) | static_cast<std::uint64_t>(offset + i);
        const auto lattice = BrownianLattice::generate(cfg_.seed, path, cfg_.horizon, lvl.level);
        const double y = correction(lattice, lvl.level);
        s.sum += y;
        s.sum_sq += y * y;
      }
      return s;
    });
    for (const auto& s : blocks) {
      lvl.sum += s.sum;
      lvl.sum_sq += s.sum_sq;
    }
    lvl.samples += count;
  }

  double cost(int level) const {
    const double fine = std::ldexp(1.0, level);
    return level == cfg_.min_level ? fine : 1.5 * fine;
  }

  const MlmcConfig& config() const { return cfg_; }

 private:
  MlmcConfig cfg_;
  Params params_;
};

void finish(MlmcResult& res) {
  res.estimate = 0.0;
  res.variance = 0.0;
  for (const auto& lvl : res.levels) {
    res.estimate += lvl.mean();
    if (lvl.samples > 0) res.variance += lvl.variance() / static_cast<double>(lvl.samples);
  }
  const std::size_t n = res.levels.size();
  if (n >= 2) {
    const double bias = std::max(std::abs(res.levels[n - 1].mean()), std::abs(res.levels[n - 2].mean()) / 2.0);
    res.bias_sq = bias * bias;
  }
  // Corrections only: the coarsest level holds P itself.
  if (n >= 4) {
    res.variance_decay = true;
    for (std::size_t l = n - 2; l < n; ++l) {
      if (!(res.levels[l].variance() < res.levels[l - 1].variance())) res.variance_decay = false;
    }
  }
}

void check_common(const MlmcConfig& cfg) {
  if (!(cfg.min_level >= 1) || cfg.min_level > cfg.max_level || cfg.max_level > kMaxFineLevel) {
    throw Error(ErrorCode::InvalidConfig, "MLMC levels must satisfy 1 <= min <= max <= 24");
  }
  if (cfg.scheme == SchemeKind::BEM && !(std::ldexp(cfg.horizon, -cfg.min_level) * cfg.params.c1 < 1.0)) {
    throw Error(ErrorCode::StepTooLarge, "BEM needs h < 1/c1 on the coarsest MLMC level");
  }
}

}  // namespace

MlmcResult mlmc_estimate(const MlmcConfig& cfg) {
  if (!(cfg.target_rmse > 0.0) || !std::isfinite(cfg.target_rmse)) {
    throw Error(ErrorCode::InvalidConfig, "target rmse must be positive");
  }
  if (cfg.initial_samples < 2) throw Error(ErrorCode::InvalidConfig, "need at least two initial samples");
  check_common(cfg);
  const LevelSampler sampler(cfg);
  const double eps2 = cfg.target_rmse * cfg.target_rmse;

  MlmcResult res;
  res.payoff_id = cfg.payoff.id();
  res.target_rmse = cfg.target_rmse;

  int finest = std::min(cfg.min_level + 2, cfg.max_level);
  for (int l = cfg.min_level; l <= finest; ++l) res.levels.push_back({l});
  std::vector<long> extra(res.levels.size(), cfg.initial_samples);

  // Level variances, floored at V_{l-1} / 4 on correction levels so a noisy
  // near-zero estimate cannot starve a level of samples.
  auto variances = [&] {
    std::vector<double> v(res.levels.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = res.levels[i].variance();
      if (i >= 2) v[i] = std::max(v[i], 0.25 * v[i - 1]);
    }
    return v;
  };
  auto optimal_counts = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += std::sqrt(v[i] * sampler.cost(res.levels[i].level));
    std::vector<long> target(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double n = std::ceil(2.0 / eps2 * std::sqrt(v[i] / sampler.cost(res.levels[i].level)) * s);
      target[i] = static_cast<long>(std::min(n, 1e15));
    }
    return target;
  };

  long total = 0;
  for (;;) {
    for (std::size_t i = 0; i < res.levels.size(); ++i) {
      if (extra[i] <= 0) continue;
      if (total + extra[i] > cfg.max_samples) {
        throw Error(ErrorCode::BudgetExceeded, "sample cap reached before the rmse target");
      }
      sampler.extend(res.levels[i], extra[i]);
      total += extra[i];
    }

    const auto target = optimal_counts(variances());
    bool more = false;
    for (std::size_t i = 0; i < res.levels.size(); ++i) {
      extra[i] = std::max(0L, target[i] - res.levels[i].samples);
      more = more || extra[i] > 0;
    }
    if (more) continue;

    const std::size_t n = res.levels.size();
    const double bias = std::max(std::abs(res.levels[n - 1].mean()), std::abs(res.levels[n - 2].mean()) / 2.0);
    if (bias <= cfg.target_rmse / std::sqrt(2.0)) break;
    if (finest == cfg.max_level) {
      throw Error(ErrorCode::BudgetExceeded, "maximum level reached before the bias target");
    }
    ++finest;
    res.levels.push_back({finest});
    extra.push_back(cfg.initial_samples);
  }

  finish(res);
  return res;
}

MlmcResult mlmc_fixed(const MlmcConfig& cfg, int finest_level, long samples_per_level, bool shared_samples) {
  check_common(cfg);
  if (finest_level < cfg.min_level || finest_level > kMaxFineLevel) {
    throw Error(ErrorCode::InvalidConfig, "finest level must lie in [min_level, 24]");
  }
  if (samples_per_level < 1) throw Error(ErrorCode::InvalidConfig, "need at least one sample per level");
  const LevelSampler sampler(cfg);

  MlmcResult res;
  res.payoff_id = cfg.payoff.id();
  res.target_rmse = cfg.target_rmse;
  for (int l = cfg.min_level; l <= finest_level; ++l) res.levels.push_back({l});

  if (!shared_samples) {
    for (auto& lvl : res.levels) sampler.extend(lvl, samples_per_level);
    finish(res);
    return res;
  }

  const std::size_t n_levels = res.levels.size();
  auto blocks = for_each_block<std::vector<Sums>>(samples_per_level, cfg.workers, [&](long begin, long end) {
    std::vector<Sums> sums(n_levels);
    for (long i = begin; i < end; ++i) {
      const auto lattice = BrownianLattice::generate(cfg.seed, static_cast<std::uint64_t>(i), cfg.horizon,
                                                     finest_level);
      for (std::size_t li = 0; li < n_levels; ++li) {
        const double y = sampler.correction(lattice, res.levels[li].level);
        sums[li].sum += y;
        sums[li].sum_sq += y * y;
      }
    }
    return sums;
  });
  for (const auto& blk : blocks) {
    for (std::size_t li = 0; li < n_levels; ++li) {
      res.levels[li].sum += blk[li].sum;
      res.levels[li].sum_sq += blk[li].sum_sq;
    }
  }
  for (auto& lvl : res.levels) lvl.samples = samples_per_level;
  finish(res);
  return res;
}

SingleLevelEstimate single_level_estimate(const Params& params, SchemeKind scheme, const Payoff& payoff,
                                          int level, long samples, std::uint64_t seed, double horizon,
                                          double alpha, int workers) {
  if (samples < 2) throw Error(ErrorCode::InvalidConfig, "need at least two samples");
  MlmcConfig cfg;
  cfg.params = params;
  cfg.scheme = scheme;
  cfg.payoff = payoff;
  cfg.seed = seed;
  cfg.horizon = horizon;
  cfg.alpha = alpha;
  cfg.workers = workers;
  cfg.min_level = level;
  cfg.max_level = level;
  check_common(cfg);
  const LevelSampler sampler(cfg);

  auto blocks = for_each_block<Sums>(samples, workers, [&](long begin, long end) {
    Sums s;
    for (long i = begin; i < end; ++i) {
      const auto lattice = BrownianLattice::generate(seed, static_cast<std::uint64_t>(i), horizon, level);
      const double y = sampler.payoff_at(lattice.increments, level);
      s.sum += y;
      s.sum_sq += y * y;
    }
    return s;
  });
  MlmcLevel acc{level};
  for (const auto& s : blocks) {
    acc.sum += s.sum;
    acc.sum_sq += s.sum_sq;
  }
  acc.samples = samples;
  return {acc.mean(), std::sqrt(acc.variance() / static_cast<double>(samples)), samples};
}

}  // namespace aitsahalia

#include "aitsahalia/montecarlo.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "aitsahalia/noise.hpp"
#include "aitsahalia/parallel.hpp"

namespace aitsahalia {

RateFit fit_rate(std::span<const RatePoint> points) {
  if (points.size() < 2) throw Error(ErrorCode::DegenerateFit, "need at least two points");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RatePoint& pt = points[static_cast<std::size_t>(i)];
    if (!(pt.h > 0.0) || !(pt.e_h > 0.0)) {
      throw Error(ErrorCode::DegenerateFit, "step sizes and errors must be positive");
    }
    design(i, 0) = std::log2(pt.h);
    design(i, 1) = 1.0;
    rhs(i) = std::log2(pt.e_h);
  }
  if ((design.col(0).array() == design(0, 0)).all()) {
    throw Error(ErrorCode::DegenerateFit, "all step sizes are equal");
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(rhs);
  return {beta(0), (design * beta - rhs).norm()};
}

// ---------------------------------------------------------------------------

const LevelError& ConvergenceReport::at(SchemeKind scheme, int level) const {
  for (const auto& row : rows) {
    if (row.scheme == scheme && row.level == level) return row;
  }
  throw Error(ErrorCode::InvalidConfig, "no such (scheme, level) in report");
}

const SchemeSummary& ConvergenceReport::summary(SchemeKind scheme) const {
  for (const auto& s : summaries) {
    if (s.scheme == scheme) return s;
  }
  throw Error(ErrorCode::InvalidConfig, "scheme not part of report");
}

namespace {

struct LevelAccumulator {
  Eigen::VectorXd sq_sum;
  long used = 0;
  long violations = 0;
  long censored = 0;
  double seconds = 0;
};

struct StudyBlock {
  std::vector<LevelAccumulator> cells;  // scheme-major
  long reference_failures = 0;
  double reference_seconds = 0;
};

bool lost_positivity(const Trajectory<double>& traj) {
  return traj.status == StepStatus::PositivityLost || (traj.states.array() <= 0.0).any();
}

void check_bem_levels(const Params& p, SchemeKind kind, double horizon, std::span<const int> levels) {
  if (kind != SchemeKind::BEM) return;
  for (int level : levels) {
    if (!(std::ldexp(horizon, -level) * p.c1 < 1.0)) {
      throw Error(ErrorCode::StepTooLarge,
                  "BEM needs h < 1/c1; level " + std::to_string(level) + " is too coarse");
    }
  }
}

}  // namespace

ConvergenceReport strong_error_study(const StudyConfig& cfg) {
  const Params params = validate(cfg.params);
  validate(TamingConfig{cfg.alpha, cfg.horizon});
  if (cfg.paths < 2) throw Error(ErrorCode::InvalidConfig, "need at least two paths");
  if (cfg.schemes.empty()) throw Error(ErrorCode::InvalidConfig, "no schemes requested");
  if (cfg.test_levels.empty()) throw Error(ErrorCode::InvalidConfig, "no test levels requested");
  if (cfg.ref_level > kMaxFineLevel) throw Error(ErrorCode::LevelTooDeep, "reference level too deep");
  for (int level : cfg.test_levels) {
    if (level < 0) throw Error(ErrorCode::LevelMismatch, "levels must be >= 0");
    const bool finer = cfg.allow_reference_level ? level <= cfg.ref_level : level < cfg.ref_level;
    if (!finer) throw Error(ErrorCode::RefNotFiner, "reference level must be finer than every test level");
  }
  check_bem_levels(params, cfg.reference, cfg.horizon, std::span<const int>(&cfg.ref_level, 1));
  for (SchemeKind s : cfg.schemes) check_bem_levels(params, s, cfg.horizon, cfg.test_levels);

  const std::size_t n_levels = cfg.test_levels.size();
  const std::size_t n_cells = cfg.schemes.size() * n_levels;

  auto make_config = [&](SchemeKind kind, int level) {
    auto sc = SchemeConfig<double>::uniform(kind, cfg.horizon, 1L << level, cfg.alpha);
    sc.newton = cfg.newton;
    return sc;
  };

  auto blocks = for_each_block<StudyBlock>(cfg.paths, cfg.workers, [&](long begin, long end) {
    StudyBlock blk;
    blk.cells.resize(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c) {
      blk.cells[c].sq_sum = Eigen::VectorXd::Zero((1L << cfg.test_levels[c % n_levels]) + 1);
    }
    const auto ref_cfg = make_config(cfg.reference, cfg.ref_level);
    for (long m = begin; m < end; ++m) {
      const auto lattice = BrownianLattice::generate(cfg.seed, static_cast<std::uint64_t>(m), cfg.horizon,
                                                     cfg.ref_level);
      const auto ref = integrate(params, ref_cfg, lattice.increments);
      blk.reference_seconds += ref.seconds;
      if (!ref.ok()) {
        ++blk.reference_failures;
        continue;
      }
      for (std::size_t li = 0; li < n_levels; ++li) {
        const int level = cfg.test_levels[li];
        const Eigen::VectorXd dW = lattice.coarsen(level);
        const Eigen::Index stride = Eigen::Index{1} << (cfg.ref_level - level);
        for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
          LevelAccumulator& acc = blk.cells[si * n_levels + li];
          const auto traj = integrate(params, make_config(cfg.schemes[si], level), dW);
          acc.seconds += traj.seconds;
          if (lost_positivity(traj)) ++acc.violations;
          if (!traj.ok()) {
            ++acc.censored;
            continue;
          }
          ++acc.used;
          for (Eigen::Index n = 0; n < traj.states.size(); ++n) {
            const double d = ref.states(n * stride) - traj.states(n);
            acc.sq_sum(n) += d * d;
          }
        }
      }
    }
    return blk;
  });

  StudyBlock total;
  total.cells.resize(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    total.cells[c].sq_sum = Eigen::VectorXd::Zero((1L << cfg.test_levels[c % n_levels]) + 1);
  }
  for (const auto& blk : blocks) {
    total.reference_failures += blk.reference_failures;
    total.reference_seconds += blk.reference_seconds;
    for (std::size_t c = 0; c < n_cells; ++c) {
      auto& t = total.cells[c];
      const auto& b = blk.cells[c];
      t.sq_sum += b.sq_sum;
      t.used += b.used;
      t.violations += b.violations;
      t.censored += b.censored;
      t.seconds += b.seconds;
    }
  }

  ConvergenceReport rep;
  rep.preset_id = cfg.preset_id;
  rep.reference = cfg.reference;
  rep.ref_level = cfg.ref_level;
  rep.levels = cfg.test_levels;
  rep.n_paths = cfg.paths;
  rep.reference_failures = total.reference_failures;
  rep.reference_seconds = total.reference_seconds;
  for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
    SchemeSummary summary{cfg.schemes[si], std::nullopt, 0.0, 0};
    std::vector<RatePoint> points;
    for (std::size_t li = 0; li < n_levels; ++li) {
      const auto& acc = total.cells[si * n_levels + li];
      const int level = cfg.test_levels[li];
      const double h = std::ldexp(cfg.horizon, -level);
      const double e_h = acc.used > 0 ? std::sqrt(acc.sq_sum.maxCoeff() / static_cast<double>(acc.used))
                                      : std::numeric_limits<double>::quiet_NaN();
      rep.rows.push_back({cfg.schemes[si], level, h, e_h, acc.seconds, acc.violations, acc.censored});
      summary.seconds += acc.seconds;
      summary.violations += acc.violations;
      if (e_h > 0.0 && std::isfinite(e_h)) points.push_back({h, e_h});
    }
    if (points.size() >= 3) summary.fit = fit_rate(points);
    rep.summaries.push_back(summary);
  }
  return rep;
}

// ---------------------------------------------------------------------------

const MomentRow& MomentReport::at(double p, int level) const {
  for (const auto& row : rows) {
    if (row.p == p && row.level == level) return row;
  }
  throw Error(ErrorCode::InvalidConfig, "no such (p, level) in moment report");
}

MomentReport moment_study(const MomentConfig& cfg) {
  const Params params = validate(cfg.params);
  validate(TamingConfig{cfg.alpha, cfg.horizon});
  if (cfg.paths < 1) throw Error(ErrorCode::InvalidConfig, "need at least one path");
  if (cfg.h_levels.empty() || cfg.p_list.empty()) {
    throw Error(ErrorCode::InvalidConfig, "need at least one step size and one moment order");
  }
  check_bem_levels(params, cfg.scheme, cfg.horizon, cfg.h_levels);
  const int fine_level = *std::max_element(cfg.h_levels.begin(), cfg.h_levels.end());
  if (fine_level > kMaxFineLevel) throw Error(ErrorCode::LevelTooDeep, "step level too deep");

  MomentReport rep;
  rep.scheme = cfg.scheme;
  rep.inverse = cfg.inverse;
  rep.n_paths = cfg.paths;

  const Regime regime = classify_regime(params, cfg.alpha);
  for (double p : cfg.p_list) {
    if (regime.kind == RegimeKind::Critical && !cfg.inverse && p > 2.0 * regime.ratio + 1.0) {
      rep.warnings.push_back("p = " + std::to_string(p) + " exceeds 2 c2/c3^2 + 1 = " +
                             std::to_string(2.0 * regime.ratio + 1.0) + " for this critical model");
    }
  }

  const std::size_t n_p = cfg.p_list.size();
  const std::size_t n_h = cfg.h_levels.size();
  struct Cell {
    Eigen::VectorXd sum;
    long used = 0;
    long censored = 0;
  };

  auto blocks = for_each_block<std::vector<Cell>>(cfg.paths, cfg.workers, [&](long begin, long end) {
    std::vector<Cell> cells(n_h);
    for (std::size_t hi = 0; hi < n_h; ++hi) {
      cells[hi].sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_p) * ((1L << cfg.h_levels[hi]) + 1));
    }
    for (long m = begin; m < end; ++m) {
      const auto lattice =
          BrownianLattice::generate(cfg.seed, static_cast<std::uint64_t>(m), cfg.horizon, fine_level);
      for (std::size_t hi = 0; hi < n_h; ++hi) {
        const int level = cfg.h_levels[hi];
        auto sc = SchemeConfig<double>::uniform(cfg.scheme, cfg.horizon, 1L << level, cfg.alpha);
        sc.newton = cfg.newton;
        const auto traj = integrate(params, sc, lattice.coarsen(level));
        Cell& cell = cells[hi];
        if (!traj.ok()) {
          ++cell.censored;
          continue;
        }
        ++cell.used;
        const Eigen::Index len = traj.states.size();
        for (std::size_t pi = 0; pi < n_p; ++pi) {
          const double order = cfg.inverse ? -cfg.p_list[pi] : cfg.p_list[pi];
          cell.sum.segment(static_cast<Eigen::Index>(pi) * len, len).array() +=
              traj.states.array().abs().pow(order);
        }
      }
    }
    return cells;
  });

  std::vector<Cell> total(n_h);
  for (std::size_t hi = 0; hi < n_h; ++hi) {
    total[hi].sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_p) * ((1L << cfg.h_levels[hi]) + 1));
  }
  for (const auto& blk : blocks) {
    for (std::size_t hi = 0; hi < n_h; ++hi) {
      total[hi].sum += blk[hi].sum;
      total[hi].used += blk[hi].used;
      total[hi].censored += blk[hi].censored;
    }
  }

  rep.pass = true;
  for (std::size_t pi = 0; pi < n_p; ++pi) {
    double lo = std::numeric_limits<double>::infinity();
    double hi_sup = 0.0;
    bool finite = true;
    for (std::size_t hi = 0; hi < n_h; ++hi) {
      const int level = cfg.h_levels[hi];
      const Eigen::Index len = (Eigen::Index{1} << level) + 1;
      const Cell& cell = total[hi];
      MomentRow row;
      row.p = cfg.p_list[pi];
      row.level = level;
      row.h = std::ldexp(cfg.horizon, -level);
      row.censored = cell.censored;
      if (cell.used > 0) {
        row.per_step = cell.sum.segment(static_cast<Eigen::Index>(pi) * len, len) / static_cast<double>(cell.used);
        row.sup_moment = row.per_step.maxCoeff();
      } else {
        row.per_step = Eigen::VectorXd::Constant(len, std::numeric_limits<double>::quiet_NaN());
        row.sup_moment = std::numeric_limits<double>::quiet_NaN();
      }
      finite = finite && std::isfinite(row.sup_moment);
      lo = std::min(lo, row.sup_moment);
      hi_sup = std::max(hi_sup, row.sup_moment);
      rep.rows.push_back(std::move(row));
    }
    const double spread = finite ? hi_sup / lo : std::numeric_limits<double>::infinity();
    rep.spreads.push_back(spread);
    rep.pass = rep.pass && finite && spread < 2.0;
  }
  for (const auto& cell : total) {
    rep.censored_total += cell.censored;
    if (cell.used < 2) rep.insufficient_samples = true;
  }
  if (rep.insufficient_samples) rep.pass = false;
  return rep;
}

}  // namespace aitsahalia

#include "aitsahalia/taming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aitsahalia {

double GridSpec::at(long i) const {
  if (points <= 1) return lo;
  const double t = static_cast<double>(i) / static_cast<double>(points - 1);
  return std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << "log[" << lo << ":" << hi << "]x" << points;
  return os.str();
}

namespace {

double normalised_margin(double lhs, double bound) {
  return (lhs - bound) / (1.0 + std::abs(bound));
}

// Margin for lhs = exp(log_lhs), bound = exp(log_bound), safe when either
// side overflows a double.
double log_domain_margin(double log_lhs, double log_bound) {
  if (log_bound < 700.0 && log_lhs < 700.0) {
    return normalised_margin(std::exp(log_lhs), std::exp(log_bound));
  }
  return std::expm1(log_lhs - log_bound);
}

double exponent_gamma(double m1, double m2) { return std::max(0.5, (std::max(m1, m2) - 1.0) / 2.0); }

}  // namespace

double default_gamma(const Params& p, double alpha) {
  const Regime regime = classify_regime(p, alpha);
  if (regime.kind == RegimeKind::Critical) return regime.ratio;
  const double m1 = 2.0 * (2.0 * alpha + 1.0) * p.kappa;
  const double m2 = 2.0 * (2.0 * p.kappa * alpha + p.rho);
  return exponent_gamma(m1, m2);
}

AssumptionReport check_assumptions(const Params& p, const TamingConfig& cfg, double h,
                                   const GridSpec& grid, std::optional<double> gamma) {
  validate(p);
  if (!(h > 0.0)) throw Error(ErrorCode::NonPositiveStep, "step size must be positive");

  const double alpha = cfg.alpha;
  const Regime regime = classify_regime(p, alpha);

  AssumptionReport rep;
  rep.h = h;
  rep.alpha = alpha;
  rep.grid = grid;
  rep.m1 = 2.0 * (2.0 * alpha + 1.0) * p.kappa;
  rep.m2 = 2.0 * (2.0 * p.kappa * alpha + p.rho);
  rep.gamma_required = exponent_gamma(rep.m1, rep.m2);

  const double requested = gamma.value_or(default_gamma(p, alpha));
  rep.gamma_used = regime.kind == RegimeKind::Critical ? std::min(regime.ratio, requested) : requested;
  rep.exponent_condition_ok = detail::at_least(2.0 * rep.gamma_used + 1.0, std::max(rep.m1, rep.m2));

  const double h_alpha = std::pow(h, alpha);
  const double log_h_alpha = alpha * std::log(h);
  const double sqrt_h = std::sqrt(h);
  const double g_scale = std::pow(h, p.rho / (2.0 * p.kappa));
  const double c3_sq = p.c3 * p.c3;
  const double excess = p.kappa + 1.0 - 2.0 * p.rho;

  constexpr double lowest = std::numeric_limits<double>::lowest();
  double a31_f = lowest, a31_g = lowest, a33_f = lowest, a33_g = lowest;
  double tamed_sup = lowest, untamed_sup = lowest;

  for (long i = 0; i < grid.points; ++i) {
    const double x = grid.at(i);
    const double log_x = std::log(x);
    const auto [fh, gh] = detail::tamed_from_logs(p, alpha, h_alpha, log_h_alpha, log_x);

    a31_f = std::max(a31_f, normalised_margin(std::abs(fh) * sqrt_h, p.c2));
    a31_g = std::max(a31_g, normalised_margin(std::abs(gh) * g_scale, p.c3));

    tamed_sup = std::max(tamed_sup, x * fh + rep.gamma_used * gh * gh);
    // -c2 x^(kappa+1) + gamma c3^2 x^(2 rho), factored to survive large x.
    const double untamed = detail::pow_or_inf(x, 2.0 * p.rho) *
                           (rep.gamma_used * c3_sq - p.c2 * detail::pow_or_inf(x, excess));
    if (!std::isnan(untamed)) untamed_sup = std::max(untamed_sup, untamed);

    const double x_kappa = detail::pow_or_inf(x, p.kappa);
    const double x_rho = detail::pow_or_inf(x, p.rho);
    const double log_f_bound = 2.0 * std::log(p.c2) + 2.0 * log_h_alpha + rep.m1 * log_x;
    const double log_g_bound = 2.0 * std::log(p.c3) + 2.0 * log_h_alpha + rep.m2 * log_x;
    if (std::isfinite(x_kappa)) {
      const double diff_f = -p.c2 * x_kappa - fh;
      const double diff_g = p.c3 * x_rho - gh;
      const double f_bound = std::exp(log_f_bound);
      const double g_bound = std::exp(log_g_bound);
      if (std::isfinite(f_bound) && std::isfinite(diff_f * diff_f)) {
        a33_f = std::max(a33_f, normalised_margin(diff_f * diff_f, f_bound));
      } else {
        a33_f = std::max(a33_f, log_domain_margin(2.0 * std::log(std::abs(diff_f)), log_f_bound));
      }
      if (std::isfinite(g_bound) && std::isfinite(diff_g * diff_g)) {
        a33_g = std::max(a33_g, normalised_margin(diff_g * diff_g, g_bound));
      } else {
        a33_g = std::max(a33_g, log_domain_margin(2.0 * std::log(std::abs(diff_g)), log_g_bound));
      }
    } else {
      // f itself is unrepresentable; fall back to the closed form of the
      // modification error, f - f_h = -c2 x^kappa u / (1 + u).
      const double log_u = log_h_alpha + 2.0 * p.kappa * alpha * log_x;
      const double log_ratio = log_u - (log_u > 30.0 ? log_u : std::log1p(std::exp(log_u)));
      const double log_df = std::log(p.c2) + p.kappa * log_x + log_ratio;
      const double log_dg = std::log(p.c3) + p.rho * log_x + log_ratio;
      a33_f = std::max(a33_f, log_domain_margin(2.0 * log_df, log_f_bound));
      a33_g = std::max(a33_g, log_domain_margin(2.0 * log_dg, log_g_bound));
    }
  }

  rep.a31_f_margin = a31_f;
  rep.a31_g_margin = a31_g;
  rep.a32_sup = tamed_sup;
  rep.a32_bound = std::max(0.0, untamed_sup);
  rep.a32_margin = std::isinf(rep.a32_bound) ? lowest : normalised_margin(tamed_sup, rep.a32_bound);
  rep.a33_f_margin = a33_f;
  rep.a33_g_margin = a33_g;

  const double tol = kAssumptionTolerance;
  rep.pass = rep.a31_f_margin <= tol && rep.a31_g_margin <= tol && rep.a32_margin <= tol &&
             rep.a33_f_margin <= tol && rep.a33_g_margin <= tol;
  return rep;
}

}  // namespace aitsahalia

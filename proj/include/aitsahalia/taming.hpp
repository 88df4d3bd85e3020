#pragma once

// Tamed drift/diffusion modifications
//
//   f_h(x) = -c2 x^kappa / (1 + h^alpha x^(2 kappa alpha)),
//   g_h(x) =  c3 x^rho   / (1 + h^alpha x^(2 kappa alpha)),
//
// and grid-based verification of the bounds the scheme's analysis relies on.

#include <cmath>
#include <optional>
#include <string>

#include "aitsahalia/errors.hpp"
#include "aitsahalia/model.hpp"

namespace aitsahalia {

struct TamingConfig {
  double alpha = 0.5;
  double horizon = 1.0;
};

inline TamingConfig validate(const TamingConfig& cfg) {
  if (!(cfg.alpha >= 0.5) || !std::isfinite(cfg.alpha)) {
    throw Error(ErrorCode::InvalidConfig, "taming exponent alpha must be >= 1/2");
  }
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
    throw Error(ErrorCode::InvalidConfig, "horizon T must be positive");
  }
  return cfg;
}

template <typename Scalar>
struct TamedPair {
  Scalar f;
  Scalar g;
};

namespace detail {

// Above this value of h^alpha x^(2 kappa alpha) the quotient is evaluated in
// the rearranged form -c2 x^(kappa - 2 kappa alpha) / (h^alpha + x^(-2 kappa alpha)).
inline constexpr double kTamingSwitch = 1e8;

// log_h_alpha = alpha * ln h; log_x = ln x. Shared by the free functions and
// the TEM stepper so both evaluate the quotient identically.
template <typename Scalar>
TamedPair<Scalar> tamed_from_logs(const ModelParams<Scalar>& p, Scalar alpha, Scalar h_alpha,
                                  Scalar log_h_alpha, Scalar log_x) {
  using std::exp;
  using std::log;
  const Scalar tka = Scalar(2) * p.kappa * alpha;
  const Scalar log_u = log_h_alpha + tka * log_x;
  if (log_u <= Scalar(std::log(kTamingSwitch))) {
    const Scalar den = Scalar(1) + exp(log_u);
    return {-p.c2 * exp(p.kappa * log_x) / den, p.c3 * exp(p.rho * log_x) / den};
  }
  const Scalar den = h_alpha + exp(-tka * log_x);
  return {-p.c2 * exp((p.kappa - tka) * log_x) / den, p.c3 * exp((p.rho - tka) * log_x) / den};
}

template <typename Scalar>
void check_step_and_state(Scalar h, Scalar x) {
  if (!(h > Scalar(0))) throw Error(ErrorCode::NonPositiveStep, "step size must be positive");
  if (!(x > Scalar(0))) throw Error(ErrorCode::NonPositiveState, "state must be positive");
}

}  // namespace detail

template <typename Scalar>
TamedPair<Scalar> tamed_coefficients(const ModelParams<Scalar>& p, const TamingConfig& cfg,
                                     Scalar h, Scalar x) {
  using std::log;
  using std::pow;
  detail::check_step_and_state(h, x);
  const Scalar alpha = static_cast<Scalar>(cfg.alpha);
  return detail::tamed_from_logs(p, alpha, pow(h, alpha), alpha * log(h), log(x));
}

template <typename Scalar>
Scalar f_h(const ModelParams<Scalar>& p, const TamingConfig& cfg, Scalar h, Scalar x) {
  return tamed_coefficients(p, cfg, h, x).f;
}

template <typename Scalar>
Scalar g_h(const ModelParams<Scalar>& p, const TamingConfig& cfg, Scalar h, Scalar x) {
  return tamed_coefficients(p, cfg, h, x).g;
}

// Log-spaced sampling grid for the assumption checks.
struct GridSpec {
  double lo = 1e-8;
  double hi = 1e8;
  long points = 100000;

  double at(long i) const;
  std::string describe() const;
};

// All margins are normalised as max over the grid of (lhs - bound) / (1 + |bound|),
// so a margin <= kAssumptionTolerance means the bound holds at every grid point.
inline constexpr double kAssumptionTolerance = 1e-12;

struct AssumptionReport {
  double h = 0;
  double alpha = 0;
  GridSpec grid;

  // |f_h| <= c2 h^(-1/2) and |g_h| <= c3 h^(-rho/(2 kappa)).
  double a31_f_margin = 0;
  double a31_g_margin = 0;

  // <x, f_h(x)> + gamma |g_h(x)|^2 <= L.
  double a32_sup = 0;
  double a32_bound = 0;  // L
  double a32_margin = 0;
  double gamma_used = 0;

  // |f - f_h|^2 <= c2^2 h^(2 alpha) x^m1 and |g - g_h|^2 <= c3^2 h^(2 alpha) x^m2.
  double a33_f_margin = 0;
  double a33_g_margin = 0;
  double m1 = 0;
  double m2 = 0;

  // Smallest gamma with max(m1, m2) <= 2 gamma + 1. Reported, not enforced.
  double gamma_required = 0;
  bool exponent_condition_ok = false;

  bool pass = false;
};

// Default gamma: c2/c3^2 in the critical case, the smallest gamma meeting the
// exponent condition (at least 1/2) otherwise.
double default_gamma(const Params& p, double alpha);

// alpha is deliberately not validated here: feeding alpha < 1/2 yields a
// failing report rather than an exception.
AssumptionReport check_assumptions(const Params& p, const TamingConfig& cfg, double h,
                                   const GridSpec& grid = {},
                                   std::optional<double> gamma = std::nullopt);

}  // namespace aitsahalia

#pragma once

// Generalized Ait-Sahalia interest-rate model
//
//   dX = (c_m1 / X - c0 + c1 X - c2 X^kappa) dt + c3 X^rho dW,   X_0 = x0 > 0,
//
// with all coefficients positive, kappa, rho > 1 and kappa + 1 >= 2 rho.

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "aitsahalia/errors.hpp"

namespace aitsahalia {

template <typename Scalar = double>
struct ModelParams {
  Scalar c_m1 = 0;
  Scalar c0 = 0;
  Scalar c1 = 0;
  Scalar c2 = 0;
  Scalar c3 = 0;
  Scalar kappa = 0;
  Scalar rho = 0;
  Scalar x0 = 1;

  template <typename Other>
  ModelParams<Other> cast() const {
    return {static_cast<Other>(c_m1), static_cast<Other>(c0),    static_cast<Other>(c1),
            static_cast<Other>(c2),   static_cast<Other>(c3),    static_cast<Other>(kappa),
            static_cast<Other>(rho),  static_cast<Other>(x0)};
  }

  bool operator==(const ModelParams&) const = default;
};

using Params = ModelParams<double>;

enum class RegimeKind { NonCritical, Critical };

struct Regime {
  RegimeKind kind = RegimeKind::NonCritical;
  double ratio = 0;  // c2 / c3^2
  bool stm_threshold_ok = true;
  bool tamed_threshold_ok = true;
};

inline std::string_view to_string(RegimeKind kind) {
  return kind == RegimeKind::Critical ? "critical" : "non-critical";
}

namespace detail {

// Exponent of e above which x^p is treated as unrepresentable.
inline constexpr double kMaxLogPower = 700.0;

// x^p for x > 0, returning +inf instead of throwing when the guard trips.
template <typename Scalar>
Scalar pow_or_inf(Scalar x, Scalar p) {
  using std::exp;
  using std::log;
  const Scalar l = p * log(x);
  if (l > Scalar(kMaxLogPower)) return std::numeric_limits<Scalar>::infinity();
  return exp(l);
}

// Threshold comparisons on c2/c3^2 tolerate a few ulps so that inputs such as
// c3 = sqrt(2) land on the boundary they were meant to describe.
inline bool at_least(double value, double threshold) {
  return value >= threshold - 1e-12 * (1.0 + std::abs(threshold));
}

}  // namespace detail

// x^p with an explicit overflow guard on p * ln(x).
template <typename Scalar>
Scalar guarded_pow(Scalar x, Scalar p) {
  const Scalar v = detail::pow_or_inf(x, p);
  if (!std::isfinite(static_cast<double>(v))) {
    throw Error(ErrorCode::Overflow, "x^p not representable");
  }
  return v;
}

template <typename Scalar>
ModelParams<Scalar> validate(const ModelParams<Scalar>& p) {
  auto positive = [](Scalar v, const char* name) {
    if (!(v > Scalar(0)) || !std::isfinite(static_cast<double>(v))) {
      throw Error(ErrorCode::NonPositiveCoefficient, std::string(name) + " must be positive");
    }
  };
  positive(p.c_m1, "c_m1");
  positive(p.c0, "c0");
  positive(p.c1, "c1");
  positive(p.c2, "c2");
  positive(p.c3, "c3");
  positive(p.x0, "x0");
  if (!(p.kappa > Scalar(1)) || !std::isfinite(static_cast<double>(p.kappa))) {
    throw Error(ErrorCode::ExponentOutOfRange, "kappa must exceed 1");
  }
  if (!(p.rho > Scalar(1)) || !std::isfinite(static_cast<double>(p.rho))) {
    throw Error(ErrorCode::ExponentOutOfRange, "rho must exceed 1");
  }
  if (p.kappa + Scalar(1) < Scalar(2) * p.rho) {
    throw Error(ErrorCode::InadmissibleRegime, "kappa + 1 < 2 rho");
  }
  return p;
}

// Criticality uses exact comparison; supply kappa and rho as exactly
// representable values (halves, quarters) when the critical case is intended.
template <typename Scalar>
Regime classify_regime(const ModelParams<Scalar>& p, double alpha) {
  const double kappa = static_cast<double>(p.kappa);
  const double rho = static_cast<double>(p.rho);
  const double c3 = static_cast<double>(p.c3);
  Regime r;
  r.ratio = static_cast<double>(p.c2) / (c3 * c3);
  if (kappa + 1.0 == 2.0 * rho) {
    r.kind = RegimeKind::Critical;
    r.stm_threshold_ok = r.ratio > 2.0 * kappa - 1.5;
    r.tamed_threshold_ok = detail::at_least(r.ratio, (2.0 * alpha + 1.0) * kappa - 0.5);
  } else {
    r.kind = RegimeKind::NonCritical;
  }
  return r;
}

template <typename Scalar>
Scalar drift_unchecked(const ModelParams<Scalar>& p, Scalar x) {
  return p.c_m1 / x - p.c0 + p.c1 * x - p.c2 * detail::pow_or_inf(x, p.kappa);
}

template <typename Scalar>
Scalar drift(const ModelParams<Scalar>& p, Scalar x) {
  if (!(x > Scalar(0))) throw Error(ErrorCode::NonPositiveState, "drift needs x > 0");
  return p.c_m1 / x - p.c0 + p.c1 * x - p.c2 * guarded_pow(x, p.kappa);
}

template <typename Scalar>
Scalar diffusion(const ModelParams<Scalar>& p, Scalar x) {
  if (!(x > Scalar(0))) throw Error(ErrorCode::NonPositiveState, "diffusion needs x > 0");
  return p.c3 * guarded_pow(x, p.rho);
}

// Built-in parameter sets of the three reference experiments (x0 = 1).
inline Params preset(std::string_view name) {
  if (name == "eg1") return {1.5, 2.0, 1.0, 2.0, 1.0, 5.0, 1.5, 1.0};
  if (name == "eg2") return {1.5, 2.0, 1.0, 4.0, 0.5, 3.0, 2.0, 1.0};
  if (name == "eg3") return {2.0, 3.0, 4.0, 7.0, std::sqrt(2.0), 2.0, 1.5, 1.0};
  throw Error(ErrorCode::InvalidConfig,
              "unknown preset '" + std::string(name) + "' (valid presets: eg1, eg2, eg3)");
}

inline std::vector<std::string> preset_names() { return {"eg1", "eg2", "eg3"}; }

}  // namespace aitsahalia

#pragma once

// One-step maps and trajectory integration on a uniform mesh h = T / N:
//
//   TEM: Y+ = Y + c_m1 h / Y+ + (-c0 + c1 Y + f_h(Y)) h + g_h(Y) dW   (closed-form root)
//   BEM: Y+ = Y + h mu(Y+) + c3 Y^rho dW                                (Newton solve)
//   EM : Y+ = Y + h mu(Y) + c3 Y^rho dW                                 (control)

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "aitsahalia/errors.hpp"
#include "aitsahalia/model.hpp"
#include "aitsahalia/taming.hpp"

namespace aitsahalia {

enum class SchemeKind { TEM, BEM, EM };

inline std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::TEM: return "tem";
    case SchemeKind::BEM: return "bem";
    case SchemeKind::EM: return "em";
  }
  return "?";
}

inline SchemeKind parse_scheme(std::string_view name) {
  if (name == "tem" || name == "TEM") return SchemeKind::TEM;
  if (name == "bem" || name == "BEM") return SchemeKind::BEM;
  if (name == "em" || name == "EM") return SchemeKind::EM;
  throw Error(ErrorCode::InvalidConfig, "unknown scheme '" + std::string(name) + "' (tem, bem, em)");
}

struct NewtonSettings {
  int max_iters = 100;
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
};

template <typename Scalar = double>
struct SchemeConfig {
  SchemeKind kind = SchemeKind::TEM;
  Scalar h = 0;
  long n_steps = 0;
  TamingConfig taming;
  NewtonSettings newton;

  // Uniform mesh on [0, T] with N steps; T is also the taming horizon.
  static SchemeConfig uniform(SchemeKind kind, Scalar horizon, long n_steps, double alpha = 0.5) {
    if (n_steps < 0) throw Error(ErrorCode::InvalidConfig, "number of steps must be >= 0");
    SchemeConfig cfg;
    cfg.kind = kind;
    cfg.n_steps = n_steps;
    cfg.h = n_steps > 0 ? horizon / static_cast<Scalar>(n_steps) : horizon;
    cfg.taming = {alpha, static_cast<double>(horizon)};
    return cfg;
  }
};

enum class StepStatus { Ok, PositivityLost, SolverFailed, Overflow };

inline std::string_view to_string(StepStatus s) {
  switch (s) {
    case StepStatus::Ok: return "ok";
    case StepStatus::PositivityLost: return "positivity_lost";
    case StepStatus::SolverFailed: return "solver_failed";
    case StepStatus::Overflow: return "overflow";
  }
  return "?";
}

template <typename Scalar = double>
struct StepOutcome {
  Scalar y_next = 0;
  StepStatus status = StepStatus::Ok;
  int newton_iters = 0;
};

// Unique positive root of x - c_m1_h / x = a, c_m1_h > 0. The a < 0 branch is
// the rationalised form, free of cancellation.
template <typename Scalar>
Scalar tem_root(Scalar a, Scalar c_m1_h) {
  using std::hypot;
  using std::sqrt;
  const Scalar s = hypot(a, Scalar(2) * sqrt(c_m1_h));
  if (a >= Scalar(0)) return (a + s) / Scalar(2);
  return Scalar(2) * c_m1_h / (s - a);
}

// Precomputes the step-size dependent constants of the TEM map.
template <typename Scalar = double>
class TemStepper {
 public:
  TemStepper(const ModelParams<Scalar>& p, const SchemeConfig<Scalar>& cfg)
      : p_(p), h_(cfg.h), alpha_(static_cast<Scalar>(cfg.taming.alpha)) {
    using std::log;
    using std::pow;
    if (!(h_ > Scalar(0))) throw Error(ErrorCode::NonPositiveStep, "step size must be positive");
    h_alpha_ = pow(h_, alpha_);
    log_h_alpha_ = alpha_ * log(h_);
    c_m1_h_ = p_.c_m1 * h_;
  }

  // Drift/diffusion argument a of the root problem for state y and increment dW.
  Scalar root_argument(Scalar y, Scalar dW) const {
    using std::log;
    const auto [fh, gh] = detail::tamed_from_logs(p_, alpha_, h_alpha_, log_h_alpha_, log(y));
    const Scalar theta = -p_.c0 + p_.c1 * y + fh;
    return y + theta * h_ + gh * dW;
  }

  StepOutcome<Scalar> operator()(Scalar y, Scalar dW) const {
    const Scalar a = root_argument(y, dW);
    if (!std::isfinite(static_cast<double>(a))) return {a, StepStatus::Overflow, 0};
    return {tem_root(a, c_m1_h_), StepStatus::Ok, 0};
  }

  Scalar c_m1_h() const { return c_m1_h_; }

 private:
  ModelParams<Scalar> p_;
  Scalar h_, alpha_, h_alpha_, log_h_alpha_, c_m1_h_;
};

// Drift-implicit Euler. Requires h < 1/c1, which makes F(z) = z - h mu(z) - b
// strictly increasing and convex on (0, inf), so its root is unique.
template <typename Scalar = double>
class BemStepper {
 public:
  BemStepper(const ModelParams<Scalar>& p, const SchemeConfig<Scalar>& cfg)
      : p_(p), h_(cfg.h), newton_(cfg.newton) {
    if (!(h_ > Scalar(0))) throw Error(ErrorCode::NonPositiveStep, "step size must be positive");
    if (!(h_ * p_.c1 < Scalar(1))) {
      throw Error(ErrorCode::StepTooLarge, "BEM needs h < 1/c1");
    }
  }

  // F(z) = z - h (c_m1/z - c0 + c1 z - c2 z^kappa) - b, and F'(z).
  Scalar residual(Scalar z, Scalar b) const {
    return z - h_ * drift_unchecked(p_, z) - b;
  }

  StepOutcome<Scalar> operator()(Scalar y, Scalar dW) const {
    using std::abs;
    using std::sqrt;
    const Scalar b = y + p_.c3 * detail::pow_or_inf(y, p_.rho) * dW;
    if (!std::isfinite(static_cast<double>(b))) return {b, StepStatus::Overflow, 0};

    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    Scalar lo = 0;  // F(0+) = -inf
    Scalar hi = inf;
    Scalar z = std::max(y, sqrt(p_.c_m1 * h_));
    Scalar fz = residual(z, b);
    bool force_bisect = false;
    int doublings = 0;

    for (int it = 1; it <= newton_.max_iters; ++it) {
      if (abs(fz) <= Scalar(newton_.abs_tol) + Scalar(newton_.rel_tol) * abs(z)) {
        return {z, StepStatus::Ok, it - 1};
      }
      if (fz < Scalar(0)) {
        lo = z;
      } else {
        hi = z;
      }

      Scalar next = std::numeric_limits<Scalar>::quiet_NaN();
      if (!force_bisect && std::isfinite(static_cast<double>(fz))) {
        const Scalar zk = detail::pow_or_inf(z, p_.kappa);
        const Scalar dF = Scalar(1) + h_ * p_.c_m1 / (z * z) - h_ * p_.c1 +
                          h_ * p_.c2 * p_.kappa * zk / z;
        next = z - fz / dF;
      }
      if (!(next > lo && next < hi)) {
        if (std::isinf(static_cast<double>(hi))) {
          if (++doublings > 200) return {z, StepStatus::SolverFailed, it};
          next = Scalar(2) * std::max(z, lo);
        } else {
          next = Scalar(0.5) * (lo + hi);
        }
      }
      const Scalar fnext = residual(next, b);
      force_bisect = !(abs(fnext) < abs(fz)) && std::isfinite(static_cast<double>(hi));
      z = next;
      fz = fnext;
    }
    if (abs(fz) <= Scalar(newton_.abs_tol) + Scalar(newton_.rel_tol) * abs(z)) {
      return {z, StepStatus::Ok, newton_.max_iters};
    }
    return {z, StepStatus::SolverFailed, newton_.max_iters};
  }

 private:
  ModelParams<Scalar> p_;
  Scalar h_;
  NewtonSettings newton_;
};

template <typename Scalar = double>
class EmStepper {
 public:
  EmStepper(const ModelParams<Scalar>& p, const SchemeConfig<Scalar>& cfg) : p_(p), h_(cfg.h) {}

  StepOutcome<Scalar> operator()(Scalar y, Scalar dW) const {
    if (!(y > Scalar(0))) return {y, StepStatus::PositivityLost, 0};
    const Scalar mu = drift_unchecked(p_, y);
    const Scalar sigma = p_.c3 * detail::pow_or_inf(y, p_.rho);
    const Scalar next = y + mu * h_ + sigma * dW;
    if (!std::isfinite(static_cast<double>(next))) return {next, StepStatus::Overflow, 0};
    if (!(next > Scalar(0))) return {next, StepStatus::PositivityLost, 0};
    return {next, StepStatus::Ok, 0};
  }

 private:
  ModelParams<Scalar> p_;
  Scalar h_;
};

template <typename Scalar>
StepOutcome<Scalar> tem_step(const ModelParams<Scalar>& p, const SchemeConfig<Scalar>& cfg, Scalar y,
                             Scalar dW) {
  detail::check_step_and_state(cfg.h, y);
  return TemStepper<Scalar>(p, cfg)(y, dW);
}

template <typename Scalar>
StepOutcome<Scalar> bem_step(const ModelParams<Scalar>& p, const SchemeConfig<Scalar>& cfg, Scalar y,
                             Scalar dW) {
  detail::check_step_and_state(cfg.h, y);
  return BemStepper<Scalar>(p, cfg)(y, dW);
}

template <typename Scalar>
StepOutcome<Scalar> em_step(const ModelParams<Scalar>& p, const SchemeConfig<Scalar>& cfg, Scalar y,
                            Scalar dW) {
  return EmStepper<Scalar>(p, cfg)(y, dW);
}

template <typename Scalar = double>
struct Trajectory {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  // states(0) = x0. On early stop the last entry is the offending value.
  Vector states;
  std::vector<StepStatus> statuses;
  StepStatus status = StepStatus::Ok;
  long newton_iters = 0;
  double seconds = 0;

  bool ok() const { return status == StepStatus::Ok; }
  Eigen::Index steps_taken() const { return static_cast<Eigen::Index>(statuses.size()); }
};

namespace detail {

template <typename Scalar, typename Stepper, typename Derived>
Trajectory<Scalar> run_stepper(const Stepper& step, Scalar x0, const Eigen::MatrixBase<Derived>& dW) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = dW.size();
  Trajectory<Scalar> traj;
  traj.states.resize(n + 1);
  traj.statuses.reserve(static_cast<std::size_t>(n));
  traj.states(0) = x0;
  Scalar y = x0;
  Eigen::Index k = 0;
  for (; k < n; ++k) {
    const StepOutcome<Scalar> out = step(y, static_cast<Scalar>(dW(k)));
    traj.statuses.push_back(out.status);
    traj.newton_iters += out.newton_iters;
    traj.states(k + 1) = out.y_next;
    y = out.y_next;
    if (out.status != StepStatus::Ok) {
      traj.status = out.status;
      ++k;
      break;
    }
  }
  traj.states.conservativeResize(k + 1);
  traj.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return traj;
}

}  // namespace detail

// Advances x0 through the supplied increments; length(increments) = N.
template <typename Scalar, typename Derived>
Trajectory<Scalar> integrate(const ModelParams<Scalar>& p, const SchemeConfig<Scalar>& cfg,
                             const Eigen::MatrixBase<Derived>& increments) {
  if (increments.size() != cfg.n_steps) {
    throw Error(ErrorCode::InvalidConfig, "increment count must equal the number of steps");
  }
  if (cfg.n_steps == 0) {
    Trajectory<Scalar> traj;
    traj.states.setConstant(1, p.x0);
    return traj;
  }
  switch (cfg.kind) {
    case SchemeKind::TEM: return detail::run_stepper(TemStepper<Scalar>(p, cfg), p.x0, increments);
    case SchemeKind::BEM: return detail::run_stepper(BemStepper<Scalar>(p, cfg), p.x0, increments);
    case SchemeKind::EM: return detail::run_stepper(EmStepper<Scalar>(p, cfg), p.x0, increments);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown scheme");
}

}  // namespace aitsahalia

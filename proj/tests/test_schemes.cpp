#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "aitsahalia/noise.hpp"
#include "aitsahalia/schemes.hpp"
#include "oracles.hpp"

using namespace aitsahalia;

namespace {

SchemeConfig<double> with_step(SchemeKind kind, double h) {
  SchemeConfig<double> cfg;
  cfg.kind = kind;
  cfg.h = h;
  cfg.n_steps = 1;
  return cfg;
}

oracle::Model as_oracle(const Params& p) { return {p.c_m1, p.c0, p.c1, p.c2, p.c3, p.kappa, p.rho}; }

}  // namespace

TEST_CASE("TEM root at a = 0 is sqrt(c_m1 h)") {
  const Params eg1 = preset("eg1");
  const double h = 0.1;
  const auto cfg = with_step(SchemeKind::TEM, h);
  const TemStepper<double> step(eg1, cfg);
  const double y = 0.8;
  const double dW = -step.root_argument(y, 0.0) / g_h(eg1, cfg.taming, h, y);
  CHECK(std::abs(step.root_argument(y, dW)) < 1e-15);
  CHECK(tem_step(eg1, cfg, y, dW).y_next == doctest::Approx(std::sqrt(eg1.c_m1 * h)).epsilon(1e-12));
  CHECK(tem_root(0.0, 0.3) == doctest::Approx(std::sqrt(0.3)));
}

TEST_CASE("TEM step matches the bisection oracle") {
  const Params eg1 = preset("eg1");
  const auto cfg = with_step(SchemeKind::TEM, 0.25);
  const auto out = tem_step(eg1, cfg, 1.0, 0.1);
  CHECK(out.status == StepStatus::Ok);
  // a from an independent evaluation of the update with f_h, g_h in closed form.
  const double u = 0.5 * 1.0;
  const double theta = -eg1.c0 + eg1.c1 * 1.0 - eg1.c2 / (1 + u);
  const double a = 1.0 + theta * 0.25 + eg1.c3 / (1 + u) * 0.1;
  const long double ref = oracle::tem_root_bisect(a, eg1.c_m1 * 0.25);
  CHECK(out.y_next == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
}

TEST_CASE("TEM survives adversarial steps") {
  const Params eg1 = preset("eg1");
  const auto cfg = with_step(SchemeKind::TEM, 10.0);
  for (double y : {1e-8, 1.0, 1e4}) {
    const auto out = tem_step(eg1, cfg, y, -1e6);
    CHECK(out.status == StepStatus::Ok);
    CHECK(out.y_next > 0.0);
  }
}

TEST_CASE("TEM root solves the implicit equation and is increasing in a") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> expo(-12.0, 12.0);
  std::uniform_real_distribution<double> sign(-1.0, 1.0);
  std::vector<double> as;
  for (int i = 0; i < 20000; ++i) {
    const double a = (sign(rng) < 0 ? -1.0 : 1.0) * std::pow(10.0, expo(rng));
    const double c = 1.5 * std::pow(10.0, expo(rng) / 2.0 - 1.0);  // c_m1 h, h in [1e-7, 1e5]
    const double y = tem_root(a, c);
    REQUIRE(y > 0.0);
    REQUIRE(std::abs((y - c / y) - a) <= 1e-10 * (1.0 + std::abs(a)));
    as.push_back(a);
  }
  std::sort(as.begin(), as.end());
  double prev = 0.0;
  for (double a : as) {
    const double y = tem_root(a, 0.5);
    REQUIRE(y >= prev);
    prev = y;
  }
  CHECK(tem_root(-1.0, 0.5) < tem_root(-0.999, 0.5));
}

TEST_CASE("BEM consistency as h -> 0") {
  const Params eg1 = preset("eg1");
  for (double y : {0.5, 1.0, 1.4}) {
    const auto out = bem_step(eg1, with_step(SchemeKind::BEM, 1e-8), y, 0.0);
    CHECK(out.status == StepStatus::Ok);
    CHECK(std::abs(out.y_next - y) <= 1e-6 * (1.0 + std::abs(drift(eg1, y))));
  }
}

TEST_CASE("BEM root agrees with a bisection-only solve") {
  const Params eg1 = preset("eg1");
  const double h = std::ldexp(1.0, -6);
  const auto out = bem_step(eg1, with_step(SchemeKind::BEM, h), 1.0, 0.05);
  REQUIRE(out.status == StepStatus::Ok);
  CHECK(out.newton_iters >= 1);
  const long double ref = oracle::bem_root_bisect(as_oracle(eg1), h, 1.0L, 0.05L);
  CHECK(std::abs(out.y_next - static_cast<double>(ref)) <= 1e-10);

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ys(0.05, 3.0), dws(-0.5, 0.5);
  for (const auto& name : preset_names()) {
    const Params p = preset(name);
    for (int i = 0; i < 200; ++i) {
      const double y = ys(rng), dW = dws(rng);
      const auto o = bem_step(p, with_step(SchemeKind::BEM, h), y, dW);
      REQUIRE(o.status == StepStatus::Ok);
      const long double r = oracle::bem_root_bisect(as_oracle(p), h, y, dW);
      REQUIRE(std::abs(o.y_next - static_cast<double>(r)) <= 1e-10 * (1.0 + std::abs(static_cast<double>(r))));
    }
  }
}

TEST_CASE("BEM roots are positive for random inputs") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> logy(-4.0, 1.0), dws(-3.0, 3.0);
  const Params eg1 = preset("eg1");
  const auto cfg = with_step(SchemeKind::BEM, std::ldexp(1.0, -4));
  const BemStepper<double> step(eg1, cfg);
  long failures = 0;
  for (int i = 0; i < 100000; ++i) {
    const double y = std::pow(10.0, logy(rng));
    const auto out = step(y, dws(rng));
    if (out.status != StepStatus::Ok || !(out.y_next > 0.0)) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("BEM rejects steps at or above 1/c1") {
  const Params eg3 = preset("eg3");  // c1 = 4
  try {
    bem_step(eg3, with_step(SchemeKind::BEM, 0.25), 1.0, 0.0);
    FAIL("expected StepTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StepTooLarge);
  }
  CHECK_NOTHROW(bem_step(eg3, with_step(SchemeKind::BEM, 0.0625), 1.0, 0.0));
}

TEST_CASE("TEM and BEM one-step gap scales like h^(1+alpha)") {
  const Params eg2 = preset("eg2");
  std::vector<double> gaps;
  for (int k = 13; k <= 20; ++k) {
    const double h = std::ldexp(1.0, -k);
    const double t = tem_step(eg2, with_step(SchemeKind::TEM, h), 1.0, 0.0).y_next;
    const double b = bem_step(eg2, with_step(SchemeKind::BEM, h), 1.0, 0.0).y_next;
    gaps.push_back(std::abs(t - b));
  }
  // The taming term dominates: h |f - f_h| ~ h^(1 + alpha) with alpha = 1/2.
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    const double ratio = gaps[i - 1] / gaps[i];
    CHECK(ratio > 2.6);
    CHECK(ratio < 2.9);
  }
  // Leading term at y = 1 is c2 h^(3/2).
  const double c = gaps.back() / std::pow(std::ldexp(1.0, -20), 1.5);
  CHECK(c == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("EM control scheme") {
  const Params eg1 = preset("eg1");
  const double h = 1e-6;
  const auto out = em_step(eg1, with_step(SchemeKind::EM, h), 1.2, 0.0);
  CHECK(out.status == StepStatus::Ok);
  CHECK(out.y_next == doctest::Approx(1.2 + drift(eg1, 1.2) * h).epsilon(1e-15));

  const auto lost = em_step(eg1, with_step(SchemeKind::EM, 0.0625), 1.0, -1.0);
  CHECK(lost.status == StepStatus::PositivityLost);
  CHECK(lost.y_next < 0.0);
  CHECK(em_step(eg1, with_step(SchemeKind::EM, 0.0625), 0.0, 0.1).status == StepStatus::PositivityLost);
  CHECK(em_step(eg1, with_step(SchemeKind::EM, 0.0625), -1.0, 0.1).status == StepStatus::PositivityLost);
  CHECK(em_step(eg1, with_step(SchemeKind::EM, 0.0625), 1e150, 0.1).status == StepStatus::Overflow);
}

TEST_CASE("integrate") {
  const Params eg2 = preset("eg2");

  SUBCASE("zero steps") {
    const auto cfg = SchemeConfig<double>::uniform(SchemeKind::TEM, 1.0, 0);
    const auto traj = integrate(eg2, cfg, Eigen::VectorXd());
    REQUIRE(traj.states.size() == 1);
    CHECK(traj.states(0) == eg2.x0);
    CHECK(traj.ok());
  }

  SUBCASE("TEM stays positive on wild increments") {
    const auto cfg = SchemeConfig<double>::uniform(SchemeKind::TEM, 8.0, 64);
    const auto lat = BrownianLattice::generate(1, 1, 8.0, 6);
    const auto traj = integrate(eg2, cfg, (50.0 * lat.increments).eval());
    CHECK(traj.ok());
    CHECK(traj.states.size() == 65);
    CHECK((traj.states.array() > 0.0).all());
  }

  SUBCASE("deterministic") {
    const auto cfg = SchemeConfig<double>::uniform(SchemeKind::TEM, 1.0, 16);
    const auto lat = BrownianLattice::generate(77, 4, 1.0, 4);
    const auto a = integrate(eg2, cfg, lat.increments);
    const auto b = integrate(eg2, cfg, lat.increments);
    CHECK((a.states.array() == b.states.array()).all());
  }

  SUBCASE("EM stops at the first failure") {
    const Params eg1 = preset("eg1");
    const auto cfg = SchemeConfig<double>::uniform(SchemeKind::EM, 1.0, 16);
    Eigen::VectorXd dW = Eigen::VectorXd::Zero(16);
    dW(3) = -5.0;
    const auto traj = integrate(eg1, cfg, dW);
    CHECK(traj.status == StepStatus::PositivityLost);
    CHECK(traj.steps_taken() == 4);
    CHECK(traj.states.size() == 5);
    CHECK(traj.states(4) <= 0.0);
    CHECK(traj.statuses.back() == StepStatus::PositivityLost);
  }

  SUBCASE("length mismatch") {
    const auto cfg = SchemeConfig<double>::uniform(SchemeKind::TEM, 1.0, 8);
    CHECK_THROWS_AS(integrate(eg2, cfg, Eigen::VectorXd::Zero(4)), Error);
  }

  SUBCASE("uniform mesh") {
    const auto cfg = SchemeConfig<double>::uniform(SchemeKind::BEM, 1.0, 512);
    CHECK(cfg.h * 512 == 1.0);
  }
}

TEST_CASE("schemes instantiate for long double") {
  const auto p = preset("eg1").cast<long double>();
  const auto cfg = SchemeConfig<long double>::uniform(SchemeKind::TEM, 1.0L, 32);
  const auto lat = BrownianLattice::generate(3, 3, 1.0, 5);
  const auto traj_ld = integrate(p, cfg, lat.increments.cast<long double>());
  const auto traj_d = integrate(preset("eg1"), SchemeConfig<double>::uniform(SchemeKind::TEM, 1.0, 32), lat.increments);
  CHECK(traj_ld.ok());
  for (Eigen::Index n = 0; n < traj_d.states.size(); ++n) {
    CHECK(traj_d.states(n) == doctest::Approx(static_cast<double>(traj_ld.states(n))).epsilon(1e-12));
  }
  const auto bem_cfg = SchemeConfig<long double>::uniform(SchemeKind::BEM, 1.0L, 32);
  CHECK(integrate(p, bem_cfg, lat.increments.cast<long double>()).ok());
}

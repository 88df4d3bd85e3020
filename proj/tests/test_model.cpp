#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "aitsahalia/model.hpp"

using namespace aitsahalia;

TEST_CASE("validate accepts the reference parameter sets") {
  for (const auto& name : preset_names()) CHECK_NOTHROW(validate(preset(name)));
  const Params eg1 = preset("eg1");
  CHECK(eg1 == Params{1.5, 2.0, 1.0, 2.0, 1.0, 5.0, 1.5, 1.0});
  const Params eg2 = preset("eg2");
  CHECK(eg2.c2 == 4.0);
  CHECK(eg2.c3 == 0.5);
  CHECK(eg2.kappa == 3.0);
  CHECK(eg2.rho == 2.0);
}

TEST_CASE("validate rejects inadmissible input with the right error") {
  auto code_of = [](const Params& p) {
    try {
      validate(p);
    } catch (const Error& e) {
      return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Io;
  };
  Params p = preset("eg1");
  p.kappa = 2.0;
  p.rho = 2.0;
  CHECK(code_of(p) == ErrorCode::InadmissibleRegime);

  p = preset("eg1");
  p.c0 = 0.0;
  CHECK(code_of(p) == ErrorCode::NonPositiveCoefficient);
  try {
    validate(p);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("c0") != std::string::npos);
  }

  p = preset("eg1");
  p.rho = 1.0;
  CHECK(code_of(p) == ErrorCode::ExponentOutOfRange);
  p = preset("eg1");
  p.kappa = 0.5;
  CHECK(code_of(p) == ErrorCode::ExponentOutOfRange);
  p = preset("eg1");
  p.x0 = -1.0;
  CHECK(code_of(p) == ErrorCode::NonPositiveCoefficient);
  p = preset("eg1");
  p.c3 = std::nan("");
  CHECK(code_of(p) == ErrorCode::NonPositiveCoefficient);

  CHECK_THROWS_AS(preset("eg4"), Error);
}

TEST_CASE("validate rejects exactly the violating parameter sets") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(0.05, 5.0);
  std::uniform_int_distribution<int> which(0, 9);
  for (int trial = 0; trial < 5000; ++trial) {
    Params p{coef(rng), coef(rng), coef(rng), coef(rng), coef(rng), 1.0 + coef(rng), 1.0 + coef(rng) / 3, coef(rng)};
    p.kappa = std::max(p.kappa, 2.0 * p.rho - 1.0);
    const int inject = which(rng);
    switch (inject) {
      case 0: p.c_m1 = -p.c_m1; break;
      case 1: p.c0 = 0.0; break;
      case 2: p.c2 = -1.0; break;
      case 3: p.kappa = 1.0; break;
      case 4: p.rho = 0.9; break;
      case 5: p.kappa = 2.0 * p.rho - 1.5; break;
      default: break;  // valid
    }
    const bool should_fail = inject <= 5;
    bool failed = false;
    try {
      validate(p);
    } catch (const Error&) {
      failed = true;
    }
    CHECK(failed == should_fail);
  }
}

TEST_CASE("classify_regime on the reference sets") {
  const Regime r1 = classify_regime(preset("eg1"), 0.5);
  CHECK(r1.kind == RegimeKind::NonCritical);
  CHECK(r1.stm_threshold_ok);
  CHECK(r1.tamed_threshold_ok);

  const Regime r2 = classify_regime(preset("eg2"), 0.5);
  CHECK(r2.kind == RegimeKind::Critical);
  CHECK(r2.ratio == 16.0);
  CHECK(r2.stm_threshold_ok);  // 16 > 2*3 - 1.5
  CHECK(r2.tamed_threshold_ok);

  // c2 / c3^2 = 2 kappa - 1/2 = (2 alpha + 1) kappa - 1/2 at alpha = 1/2.
  const Regime r3 = classify_regime(preset("eg3"), 0.5);
  CHECK(r3.kind == RegimeKind::Critical);
  CHECK(r3.ratio == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(r3.tamed_threshold_ok);
  CHECK(r3.stm_threshold_ok);  // 3.5 > 2.5
  CHECK_FALSE(classify_regime(preset("eg3"), 0.6).tamed_threshold_ok);
}

TEST_CASE("classify_regime is idempotent and ignores irrelevant fields") {
  Params p = preset("eg2");
  const Regime a = classify_regime(p, 0.5);
  const Regime b = classify_regime(p, 0.5);
  CHECK(a.kind == b.kind);
  CHECK(a.ratio == b.ratio);
  p.c_m1 = 9.0;
  p.c0 = 0.1;
  p.c1 = 3.0;
  p.x0 = 4.0;
  const Regime c = classify_regime(p, 0.5);
  CHECK(c.kind == a.kind);
  CHECK(c.ratio == a.ratio);
  CHECK(c.stm_threshold_ok == a.stm_threshold_ok);
  CHECK(c.tamed_threshold_ok == a.tamed_threshold_ok);
}

TEST_CASE("drift and diffusion values") {
  const Params eg1 = preset("eg1");
  CHECK(drift(eg1, 1.0) == doctest::Approx(1.5 - 2.0 + 1.0 - 2.0));
  CHECK(diffusion(eg1, 1.0) == doctest::Approx(1.0));
  const Params eg3 = preset("eg3");
  CHECK(drift(eg3, 1.0) == doctest::Approx(2.0 - 3.0 + 4.0 - 7.0));
  CHECK(diffusion(eg3, 1.0) == doctest::Approx(std::sqrt(2.0)));

  // Independent evaluation with std::pow at an off-grid point.
  const double x = 0.73;
  CHECK(drift(eg1, x) == doctest::Approx(1.5 / x - 2.0 + x - 2.0 * std::pow(x, 5.0)).epsilon(1e-14));
  CHECK(diffusion(eg1, x) == doctest::Approx(std::pow(x, 1.5)).epsilon(1e-14));

  CHECK(drift(eg1, 1e-8) > 1e7 * eg1.c_m1 / 2.0);
  CHECK_THROWS_AS(drift(eg1, 0.0), Error);
  CHECK_THROWS_AS(diffusion(eg1, -1.0), Error);
}

TEST_CASE("drift overflow fails loudly") {
  const Params eg1 = preset("eg1");
  try {
    drift(eg1, 1e200);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Overflow);
  }
}

TEST_CASE("diffusion is positive across scales") {
  for (const auto& name : preset_names()) {
    const Params p = preset(name);
    for (int i = 0; i <= 240; ++i) {
      const double x = std::pow(10.0, -6.0 + 0.05 * i);
      CHECK(diffusion(p, x) > 0.0);
    }
  }
}

TEST_CASE("model functions instantiate for long double") {
  const auto p = preset("eg1").cast<long double>();
  CHECK(static_cast<double>(drift(p, 1.0L)) == doctest::Approx(-1.5));
}

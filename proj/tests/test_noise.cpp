#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "aitsahalia/errors.hpp"
#include "aitsahalia/noise.hpp"
#include "oracles.hpp"

using namespace aitsahalia;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::apply(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::apply(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("open-unit mapping stays inside (0, 1)") {
  CHECK(bits_to_open_unit(0) > 0.0);
  CHECK(bits_to_open_unit(~0ULL) < 1.0);
  CHECK(bits_to_open_unit(1ULL << 63) == doctest::Approx(0.5));
}

TEST_CASE("normal quantile inverts the normal CDF") {
  for (double p : {1e-300, 1e-30, 1e-10, 1e-5, 0.001, 0.02425, 0.1, 0.3, 0.5, 0.7, 0.9, 0.97575, 0.999, 1 - 1e-10}) {
    const double z = normal_quantile(p);
    const long double back = oracle::normal_cdf(z);
    const long double target = p;
    const double rel = static_cast<double>(std::abs(back - target) / std::min(target, 1.0L - target));
    CHECK_MESSAGE(rel < 1e-13, "p = " << p);
  }
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-15));
  CHECK(normal_quantile(0.025) == doctest::Approx(-normal_quantile(0.975)).epsilon(1e-14));
}

TEST_CASE("reproducibility vectors") {
  // (seed 0, path 0, step 0): Philox words e169c58d:6627e8d5 -> u = 0.88052019788861424,
  // Phi^-1(u) = 1.1775912390542733 (independently evaluated).
  CHECK(standard_normal(0, 0, 0) == doctest::Approx(1.1775912390542733).epsilon(1e-14));
  // Frozen outputs; a change here means lattices are no longer reproducible.
  CHECK(standard_normal(20231, 7, 123) == doctest::Approx(-0.044002911965718608).epsilon(1e-14));
  CHECK(standard_normal(1, 2, 3) == doctest::Approx(-0.25490363922421133).epsilon(1e-14));
  const auto lat = BrownianLattice::generate(42, 3, 1.0, 4);
  REQUIRE(lat.increments.size() == 16);
  CHECK(lat.increments(0) == doctest::Approx(-0.03418007915752265).epsilon(1e-14));
  CHECK(lat.increments(15) == doctest::Approx(0.63351414841023368).epsilon(1e-14));
}

TEST_CASE("generation is deterministic and keyed by path") {
  const auto a = BrownianLattice::generate(99, 5, 1.0, 10);
  const auto b = BrownianLattice::generate(99, 5, 1.0, 10);
  CHECK((a.increments.array() == b.increments.array()).all());
  const auto c = BrownianLattice::generate(99, 6, 1.0, 10);
  CHECK((a.increments.array() != c.increments.array()).any());
  const auto d = BrownianLattice::generate(100, 5, 1.0, 10);
  CHECK((a.increments.array() != d.increments.array()).any());
  // Element k only depends on (seed, path, k): a deeper lattice is a different
  // grid, but its first element comes from the same normal draw.
  const auto deep = BrownianLattice::generate(99, 5, 1.0, 12);
  CHECK(deep.increments(0) / std::sqrt(deep.fine_step()) == doctest::Approx(a.increments(0) / std::sqrt(a.fine_step())));
}

TEST_CASE("increment mean and variance") {
  const int level = 20;
  const auto lat = BrownianLattice::generate(2024, 0, 1.0, level);
  const double h = lat.fine_step();
  CHECK(h == std::ldexp(1.0, -level));
  const double n = static_cast<double>(lat.increments.size());
  const double mean = lat.increments.mean();
  CHECK(std::abs(mean) < 4.0 * std::sqrt(h / n));
  const double var = (lat.increments.array() - mean).square().sum() / (n - 1.0);
  // Var of the sample variance for Gaussians is 2 h^2 / (n - 1).
  CHECK(std::abs(var - h) < 4.0 * h * std::sqrt(2.0 / (n - 1.0)));
}

TEST_CASE("coarsening") {
  const auto lat = BrownianLattice::generate(11, 2, 2.0, 8);
  CHECK((lat.coarsen(8).array() == lat.increments.array()).all());

  const Eigen::VectorXd w0 = lat.coarsen(0);
  REQUIRE(w0.size() == 1);
  for (int level = 1; level <= 8; ++level) {
    const Eigen::VectorXd c = lat.coarsen(level);
    CHECK(c.size() == (1 << level));
    // Coarsening an intermediate level reproduces the direct result bit for bit.
    for (int lower = 0; lower < level; ++lower) {
      CHECK((coarsen_increments(c, level, lower).array() == lat.coarsen(lower).array()).all());
    }
    CHECK(c.sum() == doctest::Approx(w0(0)).epsilon(1e-13));
  }
  const Eigen::VectorXd c3 = lat.coarsen(3);
  CHECK(c3(1) == doctest::Approx(lat.increments.segment(32, 32).sum()).epsilon(1e-13));

  CHECK_THROWS_AS(lat.coarsen(9), Error);
  CHECK_THROWS_AS(lat.coarsen(-1), Error);
}

TEST_CASE("levels beyond the memory guard are rejected") {
  try {
    BrownianLattice::generate(1, 1, 1.0, 25);
    FAIL("expected LevelTooDeep");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LevelTooDeep);
  }
}

TEST_CASE("coupled levels share one Brownian path") {
  // Cov(W_T at level 2, W_T at level 6) across paths equals T = 1.5.
  const int paths = 20000;
  double s_a = 0, s_b = 0, s_ab = 0;
  for (int m = 0; m < paths; ++m) {
    const auto lat = BrownianLattice::generate(5, static_cast<std::uint64_t>(m), 1.5, 6);
    const double a = lat.coarsen(2).sum();
    const double b = lat.coarsen(6).sum();
    s_a += a;
    s_b += b;
    s_ab += a * b;
  }
  const double cov = s_ab / paths - (s_a / paths) * (s_b / paths);
  CHECK(std::abs(cov - 1.5) < 4.0 * 1.5 * std::sqrt(2.0 / paths));
}

TEST_CASE("binary dump round trip and layout") {
  const auto lat = BrownianLattice::generate(0x0102030405060708ULL, 9, 1.0, 3);
  std::stringstream buf;
  save_lattice(lat, buf);
  const std::string bytes = buf.str();
  CHECK(bytes.size() == 8 * (4 + 8));
  CHECK(static_cast<unsigned char>(bytes[0]) == 0x08);  // little-endian seed
  CHECK(static_cast<unsigned char>(bytes[7]) == 0x01);
  CHECK(static_cast<unsigned char>(bytes[8]) == 9);
  CHECK(static_cast<unsigned char>(bytes[24]) == 3);
  const auto back = load_lattice(buf);
  CHECK(back.seed == lat.seed);
  CHECK(back.path_index == 9);
  CHECK(back.horizon == 1.0);
  CHECK(back.fine_level == 3);
  CHECK((back.increments.array() == lat.increments.array()).all());

  std::stringstream truncated(bytes.substr(0, 40));
  CHECK_THROWS_AS(load_lattice(truncated), Error);
}

#pragma once

// Reproducible Brownian increments on a dyadic grid.
//
// Each increment is a pure function of (seed, path_index, step_index): a
// Philox4x32-10 block keyed by the seed with the (step, path) pair as counter,
// mapped to a standard normal by inverse-CDF. Coarser grids are obtained by
// pairwise summation, so every level of one lattice sees the same path.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <iosfwd>

namespace aitsahalia {

inline constexpr int kMaxFineLevel = 24;

struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key);
};

// Maps 64 random bits to the open interval (0, 1).
double bits_to_open_unit(std::uint64_t bits);

// Inverse of the standard normal CDF (Wichura AS241, ~1e-16 relative accuracy).
double normal_quantile(double p);

double standard_normal(std::uint64_t seed, std::uint64_t path_index, std::uint64_t step_index);

struct BrownianLattice {
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  double horizon = 1.0;
  int fine_level = 0;
  Eigen::VectorXd increments;  // 2^fine_level draws of N(0, horizon 2^-fine_level)

  double fine_step() const;

  static BrownianLattice generate(std::uint64_t seed, std::uint64_t path_index, double horizon,
                                  int fine_level);

  // Increments on the grid with step horizon 2^-level (length 2^level).
  Eigen::VectorXd coarsen(int level) const;
};

// Pairwise-sum `increments` (length 2^from_level) down to length 2^to_level.
Eigen::VectorXd coarsen_increments(const Eigen::VectorXd& increments, int from_level, int to_level);

// Binary dump: seed, path_index, horizon (IEEE bits), fine_level as
// little-endian 64-bit fields, then the increments as little-endian doubles.
void save_lattice(const BrownianLattice& lattice, std::ostream& out);
BrownianLattice load_lattice(std::istream& in);

}  // namespace aitsahalia

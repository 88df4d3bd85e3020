#include "aitsahalia/noise.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "aitsahalia/errors.hpp"

namespace aitsahalia {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;
constexpr int kRounds = 10;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(prod);
  hi = static_cast<std::uint32_t>(prod >> 32);
}

template <std::size_t N>
double horner(const double (&c)[N], double r) {
  double v = c[N - 1];
  for (std::size_t i = N - 1; i-- > 0;) v = v * r + c[i];
  return v;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw Error(ErrorCode::Io, "truncated lattice dump");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

Philox4x32::Counter Philox4x32::apply(Counter ctr, Key key) {
  for (int round = 0; round < kRounds; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMul0, ctr[0], lo0, hi0);
    mulhilo(kMul1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

double bits_to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double normal_quantile(double p) {
  static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e+2,
                                 1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                 4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                 3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[] = {1.0,
                                 4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                 5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                 3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                 5.2264952788528545610e+3};
  static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                 5.76949722146069140550e0, 3.64784832476320460504e0,
                                 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                 2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {1.0,
                                 2.05319162663775882187e0, 1.67638483018380384940e0,
                                 6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                 1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                 1.05075007164441684324e-9};
  static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                 1.78482653991729133580e0, 2.96560571828504891230e-1,
                                 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                 2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {1.0,
                                 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                 1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                 1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                 2.04426310338993978564e-15};

  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -HUGE_VAL;
    if (p == 1.0) return HUGE_VAL;
    return std::nan("");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * horner(a, r) / horner(b, r);
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double v;
  if (r <= 5.0) {
    r -= 1.6;
    v = horner(c, r) / horner(d, r);
  } else {
    r -= 5.0;
    v = horner(e, r) / horner(f, r);
  }
  return q < 0.0 ? -v : v;
}

double standard_normal(std::uint64_t seed, std::uint64_t path_index, std::uint64_t step_index) {
  const Philox4x32::Key key = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const Philox4x32::Counter ctr = {
      static_cast<std::uint32_t>(step_index), static_cast<std::uint32_t>(step_index >> 32),
      static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(path_index >> 32)};
  const Philox4x32::Counter out = Philox4x32::apply(ctr, key);
  const std::uint64_t bits = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  return normal_quantile(bits_to_open_unit(bits));
}

double BrownianLattice::fine_step() const { return std::ldexp(horizon, -fine_level); }

BrownianLattice BrownianLattice::generate(std::uint64_t seed, std::uint64_t path_index, double horizon,
                                          int fine_level) {
  if (fine_level < 0) throw Error(ErrorCode::LevelMismatch, "fine level must be >= 0");
  if (fine_level > kMaxFineLevel) {
    throw Error(ErrorCode::LevelTooDeep, "fine level exceeds " + std::to_string(kMaxFineLevel));
  }
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidConfig, "horizon must be positive");
  BrownianLattice lat;
  lat.seed = seed;
  lat.path_index = path_index;
  lat.horizon = horizon;
  lat.fine_level = fine_level;
  const Eigen::Index n = Eigen::Index{1} << fine_level;
  const double scale = std::sqrt(lat.fine_step());
  lat.increments.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    lat.increments(k) = scale * standard_normal(seed, path_index, static_cast<std::uint64_t>(k));
  }
  return lat;
}

Eigen::VectorXd coarsen_increments(const Eigen::VectorXd& increments, int from_level, int to_level) {
  if (to_level < 0 || to_level > from_level) {
    throw Error(ErrorCode::LevelMismatch, "coarse level must lie in [0, fine level]");
  }
  if (increments.size() != (Eigen::Index{1} << from_level)) {
    throw Error(ErrorCode::LevelMismatch, "increment count does not match level");
  }
  Eigen::VectorXd cur = increments;
  for (int level = from_level; level > to_level; --level) {
    const Eigen::Index half = cur.size() / 2;
    Eigen::VectorXd next(half);
    for (Eigen::Index k = 0; k < half; ++k) next(k) = cur(2 * k) + cur(2 * k + 1);
    cur = std::move(next);
  }
  return cur;
}

Eigen::VectorXd BrownianLattice::coarsen(int level) const {
  return coarsen_increments(increments, fine_level, level);
}

void save_lattice(const BrownianLattice& lattice, std::ostream& out) {
  put_u64(out, lattice.seed);
  put_u64(out, lattice.path_index);
  put_u64(out, std::bit_cast<std::uint64_t>(lattice.horizon));
  put_u64(out, static_cast<std::uint64_t>(lattice.fine_level));
  for (Eigen::Index k = 0; k < lattice.increments.size(); ++k) {
    put_u64(out, std::bit_cast<std::uint64_t>(lattice.increments(k)));
  }
  if (!out) throw Error(ErrorCode::Io, "failed to write lattice dump");
}

BrownianLattice load_lattice(std::istream& in) {
  BrownianLattice lat;
  lat.seed = get_u64(in);
  lat.path_index = get_u64(in);
  lat.horizon = std::bit_cast<double>(get_u64(in));
  const std::uint64_t level = get_u64(in);
  if (level > static_cast<std::uint64_t>(kMaxFineLevel)) {
    throw Error(ErrorCode::LevelTooDeep, "lattice dump level too deep");
  }
  lat.fine_level = static_cast<int>(level);
  const Eigen::Index n = Eigen::Index{1} << lat.fine_level;
  lat.increments.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) lat.increments(k) = std::bit_cast<double>(get_u64(in));
  return lat;
}

}  // namespace aitsahalia

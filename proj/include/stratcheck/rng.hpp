#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace stratcheck {

// Counter-based deterministic generator. Every draw is a pure function of
// (seed, stream, counter), so shells and points can be generated in any
// order (or on any thread) and still come out bit-identical.
namespace rng_detail {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable sub-seed for work unit `idx` (shells, restarts, t-cells).
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t idx) {
  return mix64(seed ^ mix64(idx + 0xa54ff53a5f1d36f1ULL));
}

}  // namespace rng_detail

using rng_detail::derive_seed;

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(rng_detail::mix64(seed ^ 0x6a09e667f3bcc908ULL)) {}

  /// Derive an independent substream (e.g. one per shell index).
  CounterRng stream(std::uint64_t id) const {
    CounterRng r(0);
    r.key_ = rng_detail::mix64(key_ ^ rng_detail::mix64(id + 0xbb67ae8584caa73bULL));
    return r;
  }

  std::uint64_t word(std::uint64_t counter) const {
    return rng_detail::mix64(key_ ^ rng_detail::mix64(counter + 0x3c6ef372fe94f82bULL));
  }

  /// Uniform double in (0, 1]; never 0, safe under log().
  double uniform(std::uint64_t counter) const {
    return static_cast<double>((word(counter) >> 11) + 1) * 0x1.0p-53;
  }

  /// i-th standard normal (Box-Muller, consumes counters 2i and 2i+1).
  double gaussian(std::uint64_t i) const {
    const double u1 = uniform(2 * i);
    const double u2 = uniform(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// i-th point of the unit sphere in R^dim (normalized Gaussian vector).
  Eigen::VectorXd sphere_point(int dim, std::uint64_t i) const {
    Eigen::VectorXd v(dim);
    for (;;) {
      for (int k = 0; k < dim; ++k) v[k] = gaussian(i * static_cast<std::uint64_t>(dim) + static_cast<std::uint64_t>(k));
      const double n = v.norm();
      if (n > 1e-12) return v / n;
      i += 0x100000000ULL;  // practically unreachable; reseed far away
    }
  }

 private:
  std::uint64_t key_;
};

}  // namespace stratcheck

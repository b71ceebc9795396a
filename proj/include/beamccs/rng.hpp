#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace beamccs {

/// SplitMix64 finalizer, used to spread seeds into independent streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Deterministic child seed: stream `stream` of master seed `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (0xD1B54A32D192ED03ull * (stream + 1)));
}

/// Seeded pseudo-random generator. Every randomized operation in the library
/// takes one of these (or a raw seed) explicitly; there is no global state.
/// Gaussian variates use Box-Muller on top of mt19937_64 because
/// std::normal_distribution's algorithm is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Independent generator for sub-stream `stream` of this generator's seed.
  Rng derive(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), rejection-sampled so the stream is portable.
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal variate; consumes exactly two uniforms per call.
  double gaussian() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
  }

  /// Circularly symmetric complex normal with total variance `var`
  /// (var/2 per real component). Draw order: real part, then imaginary.
  std::complex<double> cgaussian(double var) {
    const double s = std::sqrt(var / 2.0);
    const double re = s * gaussian();
    const double im = s * gaussian();
    return {re, im};
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace beamccs

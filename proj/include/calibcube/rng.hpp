#ifndef CALIBCUBE_RNG_HPP
#define CALIBCUBE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string_view>

#include "calibcube/digest.hpp"
#include "calibcube/error.hpp"

namespace calibcube {

/// Deterministic 64-bit generator (SplitMix64 core) with hand-rolled
/// distributions. All arithmetic is fixed-width, so identical seeds produce
/// byte-identical streams on every platform; std::* distributions are
/// implementation-defined and must not be used anywhere in the pipeline.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(scramble(scramble(seed))) {}

  /// Independent sub-stream addressed by a string tag, e.g. ("events").
  static Rng substream(uint64_t seed, std::string_view tag) {
    return Rng(scramble(seed) ^ fnv1a64(tag));
  }

  /// Independent sub-stream addressed by two indices (e.g. round, iteration).
  static Rng fork(uint64_t seed, uint64_t a, uint64_t b) {
    return Rng(scramble(scramble(seed) ^ scramble(a + 0x9e3779b97f4a7c15ULL)) ^
               scramble(b + 0x3c6ef372fe94f82aULL));
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n >= 1. Lemire's multiply-shift with
  /// rejection, bias-free and deterministic.
  uint64_t uniform_int(uint64_t n) {
    if (n == 0) throw CalibError(Errc::InvariantViolation, "uniform_int(0)");
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
    auto lo = static_cast<uint64_t>(m);
    if (lo < n) {
      uint64_t threshold = (0ULL - n) % n;
      while (lo < threshold) {
        m = static_cast<__uint128_t>(next_u64()) * n;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  /// Standard normal via Box-Muller; consumes exactly two draws per call.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Poisson count via Knuth's product method, chunked so large means do not
  /// underflow the running product.
  uint64_t poisson(double mean) {
    uint64_t count = 0;
    while (mean > 500.0) {
      count += poisson_small(500.0);
      mean -= 500.0;
    }
    return count + poisson_small(mean);
  }

 private:
  uint64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    uint64_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  static uint64_t scramble(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t state_;
};

}  // namespace calibcube

#endif  // CALIBCUBE_RNG_HPP

#pragma once

// Seeded generator with a portable uniform mapping, so reports reproduce
// bit-for-bit across standard libraries.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace bergman {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  /// log2 of the result is uniform in [log2 lo, log2 hi].
  double log_uniform(double lo, double hi) {
    return std::exp2(uniform(std::log2(lo), std::log2(hi)));
  }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * n); }
  bool coin() { return (engine_() >> 63) != 0; }

  /// Uniform point of the disc (area measure) with |z| <= rmax.
  std::complex<double> disc_point(double rmax) {
    const double r = rmax * std::sqrt(uniform());
    return std::polar(r, 2.0 * std::numbers::pi * uniform());
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bergman

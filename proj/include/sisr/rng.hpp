#pragma once

#include <cstdint>
#include <random>

namespace sisr {

/// Seedable 64-bit generator with platform-independent draws. The engine is
/// std::mt19937_64, whose output sequence is fixed by the standard; the
/// distributions are implemented here because the std:: ones are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n) by rejection, n > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal by inverse CDF of uniform().
  double normal();

  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double prob) { return uniform() < prob; }

 private:
  std::mt19937_64 engine_;
};

/// Standard normal CDF and quantile.
double normal_cdf(double x);
double normal_quantile(double u);

}  // namespace sisr

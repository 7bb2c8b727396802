#include "sisr/rng.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

namespace sisr {

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() { return normal_quantile(uniform()); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double u) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, u);
}

}  // namespace sisr

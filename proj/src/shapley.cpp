#include "sisr/shapley.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>
#include <vector>

#include "sisr/error.hpp"

namespace sisr {

namespace {

void require_full(const PayoffTable& table, int max_p, const char* what) {
  if (!table.full_enumeration()) {
    fail(ErrorKind::kUnsupported,
         std::string(what) + " needs a full enumeration of all 2^p coalitions");
  }
  if (table.p() > max_p) {
    fail(ErrorKind::kCapacity, std::string(what) + " supports p <= " +
                                   std::to_string(max_p));
  }
}

// |A|! (p - |A| - 1)! / p! for |A| = 0..p-1.
std::vector<double> marginal_weights(int p) {
  std::vector<double> w(p);
  for (int k = 0; k < p; ++k) {
    if (p <= 18) {
      double r = 1.0 / p;
      // k! (p-1-k)! / (p-1)! = 1 / C(p-1, k)
      r /= binomial(p - 1, k);
      w[k] = r;
    } else {
      w[k] = std::exp(std::lgamma(k + 1.0) + std::lgamma(p - k + 0.0) -
                      std::lgamma(p + 1.0));
    }
  }
  return w;
}

}  // namespace

ShapleyVector exact_shapley(const PayoffTable& table) {
  require_full(table, kMaxEnumerationFeatures, "exact Shapley values");
  const int p = table.p();
  const std::vector<double> w = marginal_weights(p);
  const auto& e = table.entries();

  ShapleyVector out;
  out.baseline = table.empty_value();
  out.beta = Eigen::VectorXd::Zero(p);
  const std::uint32_t n = 1u << p;
  for (std::uint32_t bits = 0; bits < n; ++bits) {
    const int k = std::popcount(bits);
    if (k == p) continue;
    const double wk = w[k];
    const double base = e[bits].value;
    std::uint32_t absent = ~bits & CoalitionMask::full_bits(p);
    for_each_member(absent, [&](int j) {
      out.beta[j] += wk * (e[bits | (1u << j)].value - base);
    });
  }
  return out;
}

ShapleyVector wls_shapley(const PayoffTable& table) {
  require_full(table, 16, "weighted least-squares Shapley values");
  const int p = table.p();
  ShapleyVector out;
  out.baseline = table.empty_value();
  const double total = table.grand_value() - table.empty_value();
  if (p == 1) {
    out.beta = Eigen::VectorXd::Constant(1, total);
    return out;
  }

  // Free variables beta_1..beta_{p-1}; beta_p = total - sum of the rest.
  // For A containing feature p the row becomes -(indicator of the free
  // features missing from A) with target shifted by -total.
  const int q = p - 1;
  const std::uint32_t last = 1u << q;
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(q, q);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q);
  std::vector<double> kernel(p, 0.0);
  for (int k = 1; k < p; ++k) kernel[k] = shapley_kernel_weight(p, k);

  const std::uint32_t n = 1u << p;
  const std::uint32_t free_bits = last - 1;
  Eigen::VectorXd row(q);
  for (std::uint32_t bits = 1; bits + 1 < n; ++bits) {
    const double w = kernel[std::popcount(bits)];
    double target = table[bits].value - out.baseline;
    row.setZero();
    if (bits & last) {
      target -= total;
      for_each_member(~bits & free_bits, [&](int j) { row[j] = -1.0; });
    } else {
      for_each_member(bits, [&](int j) { row[j] = 1.0; });
    }
    normal.noalias() += w * row * row.transpose();
    rhs.noalias() += w * target * row;
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 0.0) {
    fail(ErrorKind::kNumerical, "constrained Shapley system is singular");
  }
  const Eigen::VectorXd free = ldlt.solve(rhs);
  out.beta.resize(p);
  out.beta.head(q) = free;
  out.beta[q] = total - free.sum();
  return out;
}

}  // namespace sisr

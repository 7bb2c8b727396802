#pragma once

#include <Eigen/Core>

#include "sisr/coalition.hpp"

namespace sisr {

struct ShapleyVector {
  Eigen::VectorXd beta;
  /// Empty-coalition payoff before any adjustment.
  double baseline = 0.0;
};

/// Average marginal contribution over all coalitions. Needs a full table.
ShapleyVector exact_shapley(const PayoffTable& table);

/// Kernel-weighted least squares with c = nu(empty) and the efficiency
/// constraint eliminated by substitution; p <= 16.
ShapleyVector wls_shapley(const PayoffTable& table);

}  // namespace sisr

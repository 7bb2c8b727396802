#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sisr/coalition.hpp"
#include "sisr/shapley.hpp"
#include "sisr/sparse_sphere.hpp"

namespace sisr {

/// Initial transformed payoffs are t0 = C * nu / max|nu|.
inline constexpr double kDefaultInitScale = 1e4;

struct SolveOptions {
  int sparsity = 0;  // s; 0 means p
  double outer_tol = 1e-9;
  std::size_t max_outer = 500;
  double inner_tol = kDefaultInnerTol;
  std::size_t inner_max_iter = kDefaultInnerMaxIter;
  double infinite_multiplier = kDefaultInfiniteMultiplier;
  double rho_inflation = kDefaultRhoInflation;
  double init_scale = kDefaultInitScale;
  /// Keep per-outer-iteration objective values in the solution.
  bool record_trace = false;
};

struct TransformSample {
  double nu;     // baseline-adjusted payoff, original scale
  double t_hat;  // fitted transformed payoff
};

struct SisrSolution {
  SparseUnitVector gamma;
  /// Sorted by nu ascending (stable in table order).
  std::vector<TransformSample> transform_samples;
  Eigen::VectorXd beta;
  /// Fitted t in table order.
  Eigen::VectorXd t_hat;
  double objective = 0.0;
  double baseline = 0.0;  // nu(empty) before adjustment
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;
  std::size_t inner_nonconverged = 0;
  std::size_t degenerate_steps = 0;
  bool converged = false;
  std::vector<double> objective_trace;
  SolveOptions options;
};

SisrSolution solve(const PayoffTable& table, const SolveOptions& options);

/// beta_j = T^-1(gamma_j) by piecewise-linear interpolation of the inverted
/// pairs (t_hat, nu) after averaging nu over duplicate t_hat. Queries beyond
/// the fitted range extend the terminal segment. A zero gamma_j maps to zero
/// and the result keeps the sign of gamma_j (T(0) = 0).
Eigen::VectorXd recover_beta(const Eigen::VectorXd& gamma,
                             const std::vector<TransformSample>& samples);

struct RicResult {
  int selected = 0;
  int s_min = 0;
  int s_max = 0;
  std::vector<double> scores;      // indexed by s - s_min
  std::vector<double> objectives;  // same indexing
  double sigma2 = 0.0;
  std::vector<SisrSolution> solutions;
  static constexpr const char* kFormula =
      "RIC(s) = 2*objective(s)/sigma2 + 2*s*log(p); "
      "sigma2 = 2*objective(s_max)/(N - s_max), N = finite-weight coalitions";
};

RicResult ric_select(const PayoffTable& table, int s_min, int s_max,
                     const SolveOptions& options);

struct AttributionReport {
  ShapleyVector shapley;
  SisrSolution sisr;
  /// Zero-based feature indices by decreasing attribution (stable on ties).
  std::vector<int> shapley_rank;
  std::vector<int> sisr_rank;
};

AttributionReport conventional_and_calibrated(const PayoffTable& table,
                                              const SolveOptions& options);

/// Feature indices ordered by decreasing value, ties by lower index.
std::vector<int> rank_features(const Eigen::VectorXd& values);

}  // namespace sisr

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "sisr/coalition.hpp"
#include "sisr/engine.hpp"

namespace sisr {

// ---------------------------------------------------------------------------
// Transforms and ground truth
// ---------------------------------------------------------------------------

enum class TransformScheme {
  kFifthRoot,
  kSquareRoot,
  kExponential,
  kLogarithmic,
  kTangent,
  kNormalCdf,
};

TransformScheme parse_transform_scheme(std::string_view name);
std::string_view scheme_name(TransformScheme scheme);
const std::vector<TransformScheme>& all_transform_schemes();

/// A strictly increasing map with T(0) = 0 and a known inverse. Values of
/// T below image_min are outside the inverse's domain.
struct MonotoneTransform {
  std::string name;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
  double image_min = -std::numeric_limits<double>::infinity();
};

MonotoneTransform cube_root_transform();
MonotoneTransform square_root_transform();
MonotoneTransform identity_transform();
/// "cube-root", "square-root" or "identity".
MonotoneTransform transform_by_name(std::string_view name);

struct GeneratorTruth {
  Eigen::VectorXd gamma_star;
  std::vector<int> support;  // zero-based
  std::string transform_name;
  /// T*, applied to unadjusted payoffs.
  std::function<double(double)> forward;
  double c0 = 0.0;
  double c1 = 1.0;
  double c2 = 0.0;
  double sigma0 = 0.0;
  std::uint64_t seed = 0;
  /// Draws that stayed outside the inverse's domain after 100 resamples.
  std::size_t clamped = 0;
};

struct GeneratedPayoffs {
  PayoffTable table;
  GeneratorTruth truth;
};

/// gamma* = c0 [2^0 .. 2^(p-1)], nu = Q(c1 * sorted U), U ~ Uniform(0, c0 (2^p - 1)).
GeneratedPayoffs gen_transform_payoffs(int p, TransformScheme scheme,
                                       std::uint64_t seed);

/// T*(nu_A) ~ Normal(sum_{j in A} gamma*_j, sigma0^2 / w(A)) for nontrivial A;
/// the empty and grand coalitions sit exactly at their means.
GeneratedPayoffs gen_sparse_payoffs(int p, const Eigen::VectorXd& gamma_star,
                                    const MonotoneTransform& transform,
                                    double sigma0, std::uint64_t seed);

/// The sparse-recovery truth used for the benchmark table: three equal
/// entries 1/sqrt(3) followed by zeros.
Eigen::VectorXd three_sparse_gamma(int p);

/// Winner-takes-all game: nu_A = max_{j in A} beta*_j, nu_empty = 0.
PayoffTable gen_max_payoffs(int p, const Eigen::VectorXd& beta_star);

// ---------------------------------------------------------------------------
// Regression designs and R^2 payoffs
// ---------------------------------------------------------------------------

enum class RegressionTask { kContinuous, kBinary };

struct RegressionDesign {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  double theta = 0.0;
  Eigen::VectorXd alpha_star;
  RegressionTask task = RegressionTask::kContinuous;
  std::uint64_t seed = 0;
};

/// Rows ~ Normal(0, Sigma) with Sigma_ij = theta^|i-j|. Continuous:
/// y = X alpha* + N(0,1). Binary: y ~ Bernoulli(logistic(X alpha*)).
RegressionDesign gen_gaussian_design(int n, int p, double theta,
                                     const Eigen::VectorXd& alpha_star,
                                     RegressionTask task, std::uint64_t seed);

struct RegressionPayoffs {
  PayoffTable table;
  /// Masks whose fit was rank deficient or did not converge.
  std::vector<std::uint32_t> flagged;
};

/// nu_A = training R^2 of OLS of y on an intercept plus X_A.
RegressionPayoffs r2_payoffs(const RegressionDesign& design, int threads = 0);

/// nu_A = 1 - deviance(A) / deviance(intercept only), logistic fits by IRLS.
RegressionPayoffs pseudo_r2_payoffs(const RegressionDesign& design,
                                    int threads = 0);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// 100 * <gamma_hat, gamma_star>; both must be unit vectors.
double affinity(const Eigen::VectorXd& gamma_hat, const Eigen::VectorXd& gamma_star,
                bool absolute = false);

/// Percentage of the true support carried by nonzeros of gamma_hat.
double support_recovery(const Eigen::VectorXd& gamma_hat,
                        const std::vector<int>& support_star);

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Weighted relative residuals of the scores Z gamma_hat against the fitted
/// monotone t_hat and against the best affine function of nu.
struct LinearityCheck {
  double monotone_residual = 0.0;
  double linear_residual = 0.0;
};
LinearityCheck linearity_check(const PayoffTable& table, const SisrSolution& sol);

struct TimingRow {
  int s = 0;
  double median_seconds = 0.0;
  std::size_t outer_iterations = 0;
};

/// Median-of-`repeats` wall time of solve() for each s, rows sorted by s.
std::vector<TimingRow> timing_sweep(const PayoffTable& table,
                                    std::vector<int> s_values,
                                    const SolveOptions& options, int repeats = 3);

}  // namespace sisr

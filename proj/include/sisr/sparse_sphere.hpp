#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sisr/coalition.hpp"

namespace sisr {

inline constexpr double kDefaultRhoInflation = 1e-6;
inline constexpr double kDefaultSpectralTol = 1e-10;
inline constexpr double kDefaultInnerTol = 1e-10;
inline constexpr std::size_t kDefaultInnerMaxIter = 10000;

/// A point on the s-sparse unit sphere, or the all-zero start state.
struct SparseUnitVector {
  Eigen::VectorXd gamma;
  int sparsity_cap = 0;

  static SparseUnitVector zero(int p, int s) {
    return {Eigen::VectorXd::Zero(p), s};
  }
  bool is_zero() const { return (gamma.array() == 0.0).all(); }
  int nonzeros() const { return static_cast<int>((gamma.array() != 0.0).count()); }
  std::uint32_t support_bits() const;
};

/// Precomputed quadratic pieces of l(gamma) = 0.5 (Z gamma - t)^T W (Z gamma - t):
/// gram = Z^T W Z (fixed per table), linear = Z^T W t (refreshed whenever t
/// changes), and the step constant rho = (1 + inflation) * ||gram||_2.
class StepContext {
 public:
  StepContext(Eigen::MatrixXd gram, double inflation = kDefaultRhoInflation,
              double spectral_tol = kDefaultSpectralTol);

  /// Same gram and rho, new right-hand side.
  void set_target(const Eigen::VectorXd& t, const IncidenceMatrix& z,
                  const Eigen::VectorXd& w);
  void set_linear(Eigen::VectorXd linear, double target_energy);

  int p() const { return static_cast<int>(gram_.rows()); }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& linear() const { return linear_; }
  double rho() const { return rho_; }
  double inflation() const { return inflation_; }
  double spectral_norm() const { return spectral_norm_; }

  /// gram * gamma using only the nonzero coordinates of gamma.
  Eigen::VectorXd gram_times(const Eigen::VectorXd& gamma) const;
  /// l(gamma) evaluated through the quadratic form; needs set_target first.
  double objective(const Eigen::VectorXd& gamma) const;
  /// l(gamma) minus the gamma-independent term 0.5 t^T W t.
  double reduced_objective(const Eigen::VectorXd& gamma) const;

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd linear_;
  double target_energy_ = 0.0;  // 0.5 t^T W t
  double inflation_;
  double spectral_norm_;
  double rho_;
};

/// Keeps the s largest-magnitude entries; ties at the cut go to the lower index.
Eigen::VectorXd hard_threshold(const Eigen::VectorXd& y, int s);

/// H(y;s) / ||H(y;s)||_2. Throws kDomain on a zero result; gamma_step catches
/// that case itself and keeps the previous iterate.
SparseUnitVector normalized_hard_threshold(const Eigen::VectorXd& y, int s);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration from the
/// normalized all-ones vector, stopped on relative Rayleigh-quotient change.
double spectral_norm(const Eigen::MatrixXd& gram, double tol = kDefaultSpectralTol);

/// 0.5 (Z gamma - t)^T W (Z gamma - t), evaluated directly over the rows.
double objective(const Eigen::VectorXd& gamma, const Eigen::VectorXd& t,
                 const IncidenceMatrix& z, const Eigen::VectorXd& w);

struct GammaStepResult {
  SparseUnitVector gamma;
  bool degenerate = false;
};

/// One surrogate-minimization step: H°(gamma - (gram gamma - linear)/rho; s).
GammaStepResult gamma_step(const SparseUnitVector& gamma, const StepContext& ctx,
                           int s);

struct GammaSolveResult {
  SparseUnitVector gamma;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t degenerate_steps = 0;
  double objective = 0.0;
  double final_displacement = 0.0;
  /// l(gamma^k) for every iterate including the initial one.
  std::vector<double> objective_trace;
};

struct GammaSolveOptions {
  double tol = kDefaultInnerTol;
  std::size_t max_iter = kDefaultInnerMaxIter;
  bool record_trace = false;
};

GammaSolveResult gamma_solve(const StepContext& ctx, int s,
                             const SparseUnitVector& init,
                             const GammaSolveOptions& options = {});

}  // namespace sisr

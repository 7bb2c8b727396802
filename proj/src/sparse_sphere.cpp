#include "sisr/sparse_sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sisr/error.hpp"

namespace sisr {

std::uint32_t SparseUnitVector::support_bits() const {
  std::uint32_t bits = 0;
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    if (gamma[j] != 0.0) bits |= 1u << j;
  }
  return bits;
}

// ---------------------------------------------------------------------------
// Thresholding
// ---------------------------------------------------------------------------

Eigen::VectorXd hard_threshold(const Eigen::VectorXd& y, int s) {
  const auto p = static_cast<int>(y.size());
  if (s < 1 || s > p) {
    fail(ErrorKind::kDomain, "sparsity " + std::to_string(s) +
                                 " outside [1, " + std::to_string(p) + "]");
  }
  if (s == p) return y;
  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(y[a]) > std::abs(y[b]);
  });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
  for (int k = 0; k < s; ++k) out[idx[k]] = y[idx[k]];
  return out;
}

SparseUnitVector normalized_hard_threshold(const Eigen::VectorXd& y, int s) {
  Eigen::VectorXd h = hard_threshold(y, s);
  const double norm = h.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    fail(ErrorKind::kDomain, "normalized hard thresholding of a zero vector");
  }
  return {h / norm, s};
}

// ---------------------------------------------------------------------------
// Spectral norm
// ---------------------------------------------------------------------------

namespace {

double power_iteration(const Eigen::MatrixXd& a, Eigen::VectorXd v, double tol) {
  constexpr int kMaxIter = 100000;
  v.normalize();
  double lambda = v.dot(a * v);
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd av = a * v;
    const double norm = av.norm();
    if (norm == 0.0) return 0.0;
    v = av / norm;
    const double next = v.dot(a * v);
    if (std::abs(next - lambda) <= tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace

double spectral_norm(const Eigen::MatrixXd& gram, double tol) {
  const auto p = gram.rows();
  if (p != gram.cols() || p == 0) {
    fail(ErrorKind::kStructural, "spectral norm needs a non-empty square matrix");
  }
  const double scale = gram.cwiseAbs().maxCoeff();
  if (!((gram - gram.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale)) {
    fail(ErrorKind::kStructural, "spectral norm needs a symmetric matrix");
  }
  if (p == 1) return std::abs(gram(0, 0));
  if (p == 2) {
    const double mean = 0.5 * (gram(0, 0) + gram(1, 1));
    const double half_gap = 0.5 * (gram(0, 0) - gram(1, 1));
    return mean + std::hypot(half_gap, gram(0, 1));
  }

  double lambda = power_iteration(gram, Eigen::VectorXd::Ones(p), tol);
  // The all-ones start can be orthogonal to the dominant eigenvector; the
  // largest diagonal entry is a lower bound on the top eigenvalue of a PSD
  // matrix, so falling under it means the wrong eigenpair was found.
  Eigen::Index jmax = 0;
  const double dmax = gram.diagonal().maxCoeff(&jmax);
  if (lambda < dmax * (1.0 - tol)) {
    lambda = std::max(lambda,
                      power_iteration(gram, Eigen::VectorXd::Unit(p, jmax), tol));
  }
  return lambda;
}

// ---------------------------------------------------------------------------
// StepContext
// ---------------------------------------------------------------------------

StepContext::StepContext(Eigen::MatrixXd gram, double inflation,
                         double spectral_tol)
    : gram_(std::move(gram)), inflation_(inflation) {
  if (!(inflation > 0.0)) {
    fail(ErrorKind::kDomain, "rho inflation must be positive");
  }
  spectral_norm_ = sisr::spectral_norm(gram_, spectral_tol);
  rho_ = (1.0 + inflation_) * spectral_norm_;
  if (!(rho_ > 0.0)) {
    fail(ErrorKind::kNumerical, "gram matrix has zero spectral norm");
  }
  linear_ = Eigen::VectorXd::Zero(gram_.rows());
}

void StepContext::set_target(const Eigen::VectorXd& t, const IncidenceMatrix& z,
                             const Eigen::VectorXd& w) {
  if (z.p() != p()) {
    fail(ErrorKind::kStructural, "step context: incidence width mismatch");
  }
  linear_ = z.weighted_transpose_multiply(w, t);
  target_energy_ = 0.5 * (w.array() * t.array().square()).sum();
}

void StepContext::set_linear(Eigen::VectorXd linear, double target_energy) {
  if (linear.size() != p()) {
    fail(ErrorKind::kStructural, "step context: linear term length mismatch");
  }
  linear_ = std::move(linear);
  target_energy_ = target_energy;
}

Eigen::VectorXd StepContext::gram_times(const Eigen::VectorXd& gamma) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(gram_.rows());
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    if (gamma[j] != 0.0) out.noalias() += gamma[j] * gram_.col(j);
  }
  return out;
}

double StepContext::reduced_objective(const Eigen::VectorXd& gamma) const {
  return 0.5 * gamma.dot(gram_times(gamma)) - gamma.dot(linear_);
}

double StepContext::objective(const Eigen::VectorXd& gamma) const {
  return reduced_objective(gamma) + target_energy_;
}

// ---------------------------------------------------------------------------
// Objective and gamma updates
// ---------------------------------------------------------------------------

double objective(const Eigen::VectorXd& gamma, const Eigen::VectorXd& t,
                 const IncidenceMatrix& z, const Eigen::VectorXd& w) {
  if (gamma.size() != z.p() || static_cast<std::size_t>(t.size()) != z.rows() ||
      static_cast<std::size_t>(w.size()) != z.rows()) {
    fail(ErrorKind::kStructural, "objective: dimension mismatch");
  }
  const Eigen::VectorXd r = z.multiply(gamma) - t;
  return 0.5 * (w.array() * r.array().square()).sum();
}

GammaStepResult gamma_step(const SparseUnitVector& gamma, const StepContext& ctx,
                           int s) {
  if (gamma.gamma.size() != ctx.p()) {
    fail(ErrorKind::kStructural, "gamma step: length mismatch");
  }
  const Eigen::VectorXd y =
      gamma.gamma - (ctx.gram_times(gamma.gamma) - ctx.linear()) / ctx.rho();
  Eigen::VectorXd h = hard_threshold(y, s);
  const double norm = h.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    return {gamma, true};
  }
  return {SparseUnitVector{h / norm, s}, false};
}

GammaSolveResult gamma_solve(const StepContext& ctx, int s,
                             const SparseUnitVector& init,
                             const GammaSolveOptions& options) {
  if (!(options.tol > 0.0)) {
    fail(ErrorKind::kDomain, "inner tolerance must be positive");
  }
  GammaSolveResult out;
  out.gamma = init;
  out.gamma.sparsity_cap = s;
  double current = ctx.reduced_objective(init.gamma);
  if (options.record_trace) out.objective_trace.push_back(current);

  for (std::size_t it = 0; it < options.max_iter; ++it) {
    GammaStepResult step = gamma_step(out.gamma, ctx, s);
    ++out.iterations;
    if (step.degenerate) {
      ++out.degenerate_steps;
      out.final_displacement = 0.0;
      out.converged = true;
      break;
    }
    out.final_displacement = (step.gamma.gamma - out.gamma.gamma).norm();
    out.gamma = std::move(step.gamma);
    current = ctx.reduced_objective(out.gamma.gamma);
    if (options.record_trace) out.objective_trace.push_back(current);
    if (out.final_displacement <= options.tol) {
      out.converged = true;
      break;
    }
  }
  // Descent makes the last iterate the best one visited once past the
  // (possibly infeasible) zero start.
  const double energy = ctx.objective(Eigen::VectorXd::Zero(ctx.p()));
  out.objective = current + energy;
  for (double& v : out.objective_trace) v += energy;
  return out;
}

}  // namespace sisr

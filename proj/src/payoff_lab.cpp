#include "sisr/payoff_lab.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "sisr/parallel.hpp"
#include "sisr/error.hpp"
#include "sisr/rng.hpp"

namespace sisr {

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

namespace {

struct SchemeInfo {
  TransformScheme scheme;
  std::string_view name;
};

constexpr SchemeInfo kSchemes[] = {
    {TransformScheme::kFifthRoot, "fifth-root"},
    {TransformScheme::kSquareRoot, "square-root"},
    {TransformScheme::kExponential, "exponential"},
    {TransformScheme::kLogarithmic, "logarithmic"},
    {TransformScheme::kTangent, "tangent"},
    {TransformScheme::kNormalCdf, "normal-cdf"},
};

}  // namespace

TransformScheme parse_transform_scheme(std::string_view name) {
  for (const auto& s : kSchemes) {
    if (s.name == name) return s.scheme;
  }
  fail(ErrorKind::kConfig, "unknown transform scheme '" + std::string(name) + "'");
}

std::string_view scheme_name(TransformScheme scheme) {
  for (const auto& s : kSchemes) {
    if (s.scheme == scheme) return s.name;
  }
  return "unknown";
}

const std::vector<TransformScheme>& all_transform_schemes() {
  static const std::vector<TransformScheme> all = [] {
    std::vector<TransformScheme> v;
    for (const auto& s : kSchemes) v.push_back(s.scheme);
    return v;
  }();
  return all;
}

MonotoneTransform cube_root_transform() {
  return {"cube-root", [](double x) { return std::cbrt(x); },
          [](double y) { return y * y * y; }};
}

MonotoneTransform square_root_transform() {
  return {"square-root", [](double x) { return std::sqrt(x); },
          [](double y) { return y * y; }, 0.0};
}

MonotoneTransform identity_transform() {
  return {"identity", [](double x) { return x; }, [](double y) { return y; }};
}

MonotoneTransform transform_by_name(std::string_view name) {
  if (name == "cube-root") return cube_root_transform();
  if (name == "square-root") return square_root_transform();
  if (name == "identity") return identity_transform();
  fail(ErrorKind::kConfig, "unknown transform '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Payoff generators
// ---------------------------------------------------------------------------

namespace {

void check_generator_p(int p) {
  if (p < 2 || p > kMaxEnumerationFeatures) {
    fail(ErrorKind::kCapacity, "generators support 2 <= p <= " +
                                   std::to_string(kMaxEnumerationFeatures));
  }
}

std::vector<int> support_of(const Eigen::VectorXd& v) {
  std::vector<int> s;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) s.push_back(static_cast<int>(j));
  }
  return s;
}

}  // namespace

GeneratedPayoffs gen_transform_payoffs(int p, TransformScheme scheme,
                                       std::uint64_t seed) {
  check_generator_p(p);
  const std::size_t n = std::size_t{1} << p;
  const double c0 = std::sqrt(3.0 / (std::pow(4.0, p) - 1.0));

  GeneratorTruth truth;
  truth.c0 = c0;
  truth.seed = seed;
  truth.transform_name = std::string(scheme_name(scheme));
  truth.gamma_star.resize(p);
  for (int j = 0; j < p; ++j) truth.gamma_star[j] = c0 * std::ldexp(1.0, j);
  truth.support = support_of(truth.gamma_star);

  Rng rng(seed);
  std::vector<double> u(n);
  const double upper = c0 * (static_cast<double>(n) - 1.0);
  for (auto& x : u) x = rng.uniform(0.0, upper);
  std::sort(u.begin(), u.end());

  std::function<double(double)> q;
  switch (scheme) {
    case TransformScheme::kFifthRoot:
      q = [](double x) { return std::pow(x, 5.0); };
      truth.forward = [](double v) { return std::pow(v, 0.2); };
      break;
    case TransformScheme::kSquareRoot:
      q = [](double x) { return x * x; };
      truth.forward = [](double v) { return std::sqrt(v); };
      break;
    case TransformScheme::kExponential:
      q = [](double x) { return std::log1p(x); };
      truth.forward = [](double v) { return std::expm1(v); };
      break;
    case TransformScheme::kLogarithmic:
      q = [](double x) { return std::expm1(x); };
      truth.forward = [](double v) { return std::log1p(v); };
      break;
    case TransformScheme::kTangent: {
      truth.c1 = 10.0;
      const double c1 = truth.c1;
      q = [](double x) { return std::atan(x); };
      truth.forward = [c1](double v) { return std::tan(v) / c1; };
      break;
    }
    case TransformScheme::kNormalCdf: {
      truth.c1 = 1.0 / std::sqrt(3.0);
      truth.c2 = normal_quantile(truth.c1 * u.front());
      const double c1 = truth.c1;
      const double c2 = truth.c2;
      q = [c2](double x) { return normal_quantile(x) - c2; };
      truth.forward = [c1, c2](double v) { return normal_cdf(v + c2) / c1; };
      break;
    }
  }

  std::vector<double> nu(n);
  for (std::size_t i = 0; i < n; ++i) nu[i] = q(truth.c1 * u[i]);
  return {PayoffTable::from_values(p, nu), std::move(truth)};
}

Eigen::VectorXd three_sparse_gamma(int p) {
  if (p < 3) fail(ErrorKind::kDomain, "three-sparse truth needs p >= 3");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
  g.head(3).setConstant(1.0 / std::sqrt(3.0));
  return g;
}

GeneratedPayoffs gen_sparse_payoffs(int p, const Eigen::VectorXd& gamma_star,
                                    const MonotoneTransform& transform,
                                    double sigma0, std::uint64_t seed) {
  check_generator_p(p);
  if (gamma_star.size() != p) {
    fail(ErrorKind::kStructural, "gamma* length differs from p");
  }
  if (std::abs(gamma_star.norm() - 1.0) > 1e-12) {
    fail(ErrorKind::kDomain, "gamma* must have unit Euclidean norm");
  }
  if (!(sigma0 >= 0.0)) fail(ErrorKind::kDomain, "sigma0 must be nonnegative");
  if (std::abs(transform.forward(0.0)) > 1e-12) {
    fail(ErrorKind::kDomain, "transform must satisfy T(0) = 0");
  }

  GeneratorTruth truth;
  truth.gamma_star = gamma_star;
  truth.support = support_of(gamma_star);
  truth.transform_name = transform.name;
  truth.forward = transform.forward;
  truth.sigma0 = sigma0;
  truth.seed = seed;

  const std::size_t n = std::size_t{1} << p;
  std::vector<double> kernel(p, 0.0);
  for (int k = 1; k < p; ++k) kernel[k] = shapley_kernel_weight(p, k);

  Rng rng(seed);
  std::vector<double> nu(n);
  nu[0] = transform.inverse(0.0);
  for (std::size_t bits = 1; bits + 1 < n; ++bits) {
    double mean = 0.0;
    for_each_member(static_cast<std::uint32_t>(bits),
                    [&](int j) { mean += gamma_star[j]; });
    const double sd = sigma0 / std::sqrt(kernel[std::popcount(bits)]);
    double draw = rng.normal(mean, sd);
    for (int retry = 0; draw < transform.image_min && retry < 100; ++retry) {
      draw = rng.normal(mean, sd);
    }
    if (draw < transform.image_min) {
      draw = transform.image_min;
      ++truth.clamped;
    }
    nu[bits] = transform.inverse(draw);
  }
  nu[n - 1] = transform.inverse(gamma_star.sum());
  return {PayoffTable::from_values(p, nu), std::move(truth)};
}

PayoffTable gen_max_payoffs(int p, const Eigen::VectorXd& beta_star) {
  check_generator_p(p);
  if (beta_star.size() != p) {
    fail(ErrorKind::kStructural, "beta* length differs from p");
  }
  if ((beta_star.array() < 0.0).any()) {
    fail(ErrorKind::kDomain, "winner-takes-all contributions must be nonnegative");
  }
  const std::size_t n = std::size_t{1} << p;
  std::vector<double> nu(n, 0.0);
  for (std::size_t bits = 1; bits < n; ++bits) {
    // Max over members = max(value without the top bit, top member's value).
    const int top = 31 - std::countl_zero(static_cast<std::uint32_t>(bits));
    const std::size_t rest = bits & ~(std::size_t{1} << top);
    nu[bits] = rest == 0 ? beta_star[top] : std::max(nu[rest], beta_star[top]);
  }
  return PayoffTable::from_values(p, nu);
}

// ---------------------------------------------------------------------------
// Regression designs
// ---------------------------------------------------------------------------

RegressionDesign gen_gaussian_design(int n, int p, double theta,
                                     const Eigen::VectorXd& alpha_star,
                                     RegressionTask task, std::uint64_t seed) {
  if (!(std::abs(theta) < 1.0)) {
    fail(ErrorKind::kDomain, "Toeplitz parameter must satisfy |theta| < 1");
  }
  if (p < 1 || n < p + 2) fail(ErrorKind::kDomain, "design needs n >= p + 2");
  if (alpha_star.size() != p) {
    fail(ErrorKind::kStructural, "alpha* length differs from p");
  }
  Eigen::MatrixXd sigma(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(theta, std::abs(i - j));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::kNumerical, "Toeplitz covariance is not positive definite");
  }
  const Eigen::MatrixXd lower = llt.matrixL();

  RegressionDesign d;
  d.theta = theta;
  d.alpha_star = alpha_star;
  d.task = task;
  d.seed = seed;
  Rng rng(seed);
  Eigen::MatrixXd z(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  d.x = z * lower.transpose();
  const Eigen::VectorXd eta = d.x * alpha_star;
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    if (task == RegressionTask::kContinuous) {
      d.y[i] = eta[i] + rng.normal();
    } else {
      const double prob = 1.0 / (1.0 + std::exp(-eta[i]));
      d.y[i] = rng.bernoulli(prob) ? 1.0 : 0.0;
    }
  }
  return d;
}

namespace {

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, std::uint32_t bits,
                               bool intercept) {
  const int k = std::popcount(bits) + (intercept ? 1 : 0);
  Eigen::MatrixXd out(x.rows(), k);
  int c = 0;
  if (intercept) out.col(c++).setOnes();
  for_each_member(bits, [&](int j) { out.col(c++) = x.col(j); });
  return out;
}

double softplus(double v) {
  return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

double logistic_deviance(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    dev += softplus(eta[i]) - y[i] * eta[i];
  }
  return 2.0 * dev;
}

struct LogisticFit {
  double deviance = 0.0;
  bool converged = false;
};

// Newton/IRLS with step halving on the deviance.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  constexpr int kMaxIter = 50;
  constexpr double kTol = 1e-8;
  constexpr double kRidge = 1e-8;
  const auto k = x.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(x.rows());
  LogisticFit fit;
  fit.deviance = logistic_deviance(eta, y);
  for (int it = 0; it < kMaxIter; ++it) {
    Eigen::VectorXd prob(eta.size());
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob[i] = 1.0 / (1.0 + std::exp(-eta[i]));
      w[i] = prob[i] * (1.0 - prob[i]);
    }
    Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    h.diagonal().array() += kRidge;
    const Eigen::VectorXd grad = x.transpose() * (y - prob);
    const Eigen::VectorXd step = h.ldlt().solve(grad);
    if (!step.allFinite()) break;

    double scale = 1.0;
    Eigen::VectorXd next_beta;
    Eigen::VectorXd next_eta;
    double next_dev = 0.0;
    for (int halving = 0; halving < 30; ++halving) {
      next_beta = beta + scale * step;
      next_eta = x * next_beta;
      next_dev = logistic_deviance(next_eta, y);
      if (next_dev <= fit.deviance) break;
      scale *= 0.5;
    }
    if (!(next_dev <= fit.deviance)) {
      fit.converged = true;  // no descent direction left
      break;
    }
    const double change = fit.deviance - next_dev;
    beta = std::move(next_beta);
    eta = std::move(next_eta);
    fit.deviance = next_dev;
    if (change / (std::abs(next_dev) + 0.1) < kTol) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

void require_task(const RegressionDesign& d, RegressionTask task, int max_p) {
  if (d.task != task) {
    fail(ErrorKind::kDomain, task == RegressionTask::kContinuous
                                 ? "R^2 payoffs need a continuous response"
                                 : "pseudo-R^2 payoffs need a binary response");
  }
  const auto p = static_cast<int>(d.x.cols());
  if (p < 1 || p > max_p) {
    fail(ErrorKind::kCapacity, "regression payoffs support 1 <= p <= " +
                                   std::to_string(max_p));
  }
  if (d.y.size() != d.x.rows()) {
    fail(ErrorKind::kStructural, "design response length differs from rows");
  }
}

RegressionPayoffs collect(int p, std::vector<double> nu,
                          const std::vector<char>& flags) {
  RegressionPayoffs out{PayoffTable::from_values(p, nu), {}};
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) out.flagged.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

}  // namespace

RegressionPayoffs r2_payoffs(const RegressionDesign& design, int threads) {
  require_task(design, RegressionTask::kContinuous, 15);
  const auto p = static_cast<int>(design.x.cols());
  const Eigen::RowVectorXd means = design.x.colwise().mean();
  const Eigen::MatrixXd xc = design.x.rowwise() - means;
  const Eigen::VectorXd yc = design.y.array() - design.y.mean();
  const double tss = yc.squaredNorm();
  if (!(tss > 0.0)) fail(ErrorKind::kData, "response has zero variance");

  const std::size_t n = std::size_t{1} << p;
  std::vector<double> nu(n, 0.0);
  std::vector<char> flags(n, 0);
  detail::parallel_for(n, threads, [&](std::size_t bits) {
    if (bits == 0) return;
    const Eigen::MatrixXd xa = select_columns(xc, static_cast<std::uint32_t>(bits), false);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xa);
    Eigen::VectorXd coef;
    if (qr.rank() < xa.cols()) {
      flags[bits] = 1;
      coef = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(xa).solve(yc);
    } else {
      coef = qr.solve(yc);
    }
    const double rss = (yc - xa * coef).squaredNorm();
    nu[bits] = 1.0 - rss / tss;
  });
  return collect(p, std::move(nu), flags);
}

RegressionPayoffs pseudo_r2_payoffs(const RegressionDesign& design, int threads) {
  require_task(design, RegressionTask::kBinary, 12);
  const auto p = static_cast<int>(design.x.cols());
  const Eigen::VectorXd& y = design.y;
  if (((y.array() != 0.0) && (y.array() != 1.0)).any()) {
    fail(ErrorKind::kData, "binary response must be 0/1");
  }
  const double rate = y.mean();
  if (rate <= 0.0 || rate >= 1.0) {
    fail(ErrorKind::kData, "binary response has a single class; null deviance is zero");
  }
  const double null_dev =
      -2.0 * static_cast<double>(y.size()) *
      (rate * std::log(rate) + (1.0 - rate) * std::log1p(-rate));

  const std::size_t n = std::size_t{1} << p;
  std::vector<double> nu(n, 0.0);
  std::vector<char> flags(n, 0);
  detail::parallel_for(n, threads, [&](std::size_t bits) {
    if (bits == 0) return;
    const LogisticFit fit = fit_logistic(
        select_columns(design.x, static_cast<std::uint32_t>(bits), true), y);
    if (!fit.converged) flags[bits] = 1;
    nu[bits] = 1.0 - fit.deviance / null_dev;
  });
  return collect(p, std::move(nu), flags);
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double affinity(const Eigen::VectorXd& gamma_hat, const Eigen::VectorXd& gamma_star,
                bool absolute) {
  if (gamma_hat.size() != gamma_star.size()) {
    fail(ErrorKind::kStructural, "affinity: length mismatch");
  }
  if (std::abs(gamma_hat.norm() - 1.0) > 1e-8 ||
      std::abs(gamma_star.norm() - 1.0) > 1e-8) {
    fail(ErrorKind::kDomain, "affinity needs unit-norm vectors");
  }
  const double a = 100.0 * gamma_hat.dot(gamma_star);
  return absolute ? std::abs(a) : a;
}

double support_recovery(const Eigen::VectorXd& gamma_hat,
                        const std::vector<int>& support_star) {
  if (support_star.empty()) {
    fail(ErrorKind::kDomain, "support recovery needs a nonempty true support");
  }
  int hit = 0;
  for (int j : support_star) {
    if (j < 0 || j >= gamma_hat.size()) {
      fail(ErrorKind::kStructural, "support index out of range");
    }
    if (gamma_hat[j] != 0.0) ++hit;
  }
  return 100.0 * hit / static_cast<double>(support_star.size());
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) {
    fail(ErrorKind::kStructural, "correlation needs two equal-length samples");
  }
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double denom = std::sqrt((da * da).sum() * (db * db).sum());
  if (!(denom > 0.0)) fail(ErrorKind::kDomain, "correlation of a constant sample");
  return (da * db).sum() / denom;
}

LinearityCheck linearity_check(const PayoffTable& table, const SisrSolution& sol) {
  const PayoffTable adjusted = baseline_adjust(table);
  if (sol.t_hat.size() != static_cast<Eigen::Index>(adjusted.size())) {
    fail(ErrorKind::kStructural, "solution does not belong to this table");
  }
  const Eigen::VectorXd w =
      weight_vector(adjusted, sol.options.infinite_multiplier).weights;
  const Eigen::VectorXd nu = adjusted.values();
  const std::vector<CoalitionMask> masks = adjusted.masks();
  const Eigen::VectorXd delta =
      incidence_matrix(masks).multiply(sol.gamma.gamma, sol.gamma.support_bits());
  const Eigen::ArrayXd sw = w.array().sqrt();
  const double scale = (sw * delta.array()).matrix().norm();
  if (!(scale > 0.0)) fail(ErrorKind::kNumerical, "fitted scores are all zero");

  Eigen::MatrixXd a(nu.size(), 2);
  a.col(0) = sw.matrix();
  a.col(1) = (sw * nu.array()).matrix();
  const Eigen::VectorXd rhs = (sw * delta.array()).matrix();
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(rhs);

  LinearityCheck out;
  out.monotone_residual = (sw * (sol.t_hat - delta).array()).matrix().norm() / scale;
  out.linear_residual = (a * coef - rhs).norm() / scale;
  return out;
}

std::vector<TimingRow> timing_sweep(const PayoffTable& table,
                                    std::vector<int> s_values,
                                    const SolveOptions& options, int repeats) {
  if (repeats < 1) fail(ErrorKind::kDomain, "timing needs at least one repeat");
  std::sort(s_values.begin(), s_values.end());
  s_values.erase(std::unique(s_values.begin(), s_values.end()), s_values.end());
  std::vector<TimingRow> rows;
  for (int s : s_values) {
    SolveOptions o = options;
    o.sparsity = s;
    std::vector<double> times;
    std::size_t outer = 0;
    for (int r = 0; r < repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      const SisrSolution sol = solve(table, o);
      const auto stop = std::chrono::steady_clock::now();
      times.push_back(std::chrono::duration<double>(stop - start).count());
      outer = sol.outer_iterations;
    }
    std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
    rows.push_back({s, times[times.size() / 2], outer});
  }
  return rows;
}

}  // namespace sisr

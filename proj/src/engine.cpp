#include "sisr/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sisr/error.hpp"
#include "sisr/isotonic.hpp"

namespace sisr {

namespace {

void validate(const PayoffTable& table, const SolveOptions& o, int s) {
  if (table.p() < 2) {
    fail(ErrorKind::kDomain, "SISR needs at least two features");
  }
  if (s < 1 || s > table.p()) {
    fail(ErrorKind::kDomain, "sparsity " + std::to_string(s) + " outside [1, " +
                                 std::to_string(table.p()) + "]");
  }
  if (!(o.outer_tol > 0.0) || !(o.inner_tol > 0.0) || o.max_outer == 0 ||
      o.inner_max_iter == 0 || !(o.rho_inflation > 0.0) || !(o.init_scale > 0.0)) {
    fail(ErrorKind::kDomain, "solver tolerances and limits must be positive");
  }
}

double max_abs(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

SisrSolution solve(const PayoffTable& table, const SolveOptions& options) {
  const int p = table.p();
  const int s = options.sparsity == 0 ? p : options.sparsity;
  validate(table, options, s);

  const PayoffTable adjusted = baseline_adjust(table);
  const Eigen::VectorXd nu = adjusted.values();
  const double scale = max_abs(nu);
  if (scale == 0.0) {
    fail(ErrorKind::kFlatPayoff,
         "all payoffs are equal after baseline adjustment; nothing to attribute");
  }

  const OrderPlan plan = build_order(nu);
  const Eigen::VectorXd w =
      weight_vector(adjusted, options.infinite_multiplier).weights;
  const std::vector<CoalitionMask> masks = adjusted.masks();
  const IncidenceMatrix z = incidence_matrix(masks);
  StepContext ctx(z.weighted_gram(w), options.rho_inflation);

  SisrSolution sol;
  sol.options = options;
  sol.options.sparsity = s;
  sol.baseline = table.empty_value();

  Eigen::VectorXd t = (options.init_scale / scale) * nu;
  SparseUnitVector gamma = SparseUnitVector::zero(p, s);
  const GammaSolveOptions inner_opts{options.inner_tol, options.inner_max_iter,
                                     false};

  double previous = std::numeric_limits<double>::infinity();
  double current = previous;
  double first = previous;
  for (std::size_t outer = 0; outer < options.max_outer; ++outer) {
    ctx.set_target(t, z, w);
    GammaSolveResult inner = gamma_solve(ctx, s, gamma, inner_opts);
    sol.inner_iterations += inner.iterations;
    sol.degenerate_steps += inner.degenerate_steps;
    if (!inner.converged) ++sol.inner_nonconverged;
    gamma = std::move(inner.gamma);

    const Eigen::VectorXd delta = z.multiply(gamma.gamma, gamma.support_bits());
    IsotonicFit fit = isotonic_fit(delta, w, plan);
    t = std::move(fit.t);
    current = fit.objective;
    ++sol.outer_iterations;
    if (options.record_trace) sol.objective_trace.push_back(current);

    if (outer == 0) first = current;
    // Either the objective has stalled, or it has collapsed to a numerically
    // exact fit, where a relative-change test keeps chasing rounding noise.
    if (current <= options.outer_tol * first ||
        (std::isfinite(previous) &&
         previous - current <= options.outer_tol * previous)) {
      sol.converged = true;
      break;
    }
    previous = current;
  }

  if (gamma.is_zero()) {
    fail(ErrorKind::kNumerical,
         "attribution vector degenerated to zero; payoffs give no direction");
  }

  sol.gamma = std::move(gamma);
  sol.objective = current;
  sol.transform_samples.reserve(nu.size());
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const std::size_t i = plan.permutation[k];
    sol.transform_samples.push_back({nu[i], t[i]});
  }
  sol.t_hat = std::move(t);
  sol.beta = recover_beta(sol.gamma.gamma, sol.transform_samples);
  return sol;
}

Eigen::VectorXd recover_beta(const Eigen::VectorXd& gamma,
                             const std::vector<TransformSample>& samples) {
  if (samples.empty()) {
    fail(ErrorKind::kStructural, "inverse transform needs fitted samples");
  }
  // Knots of the inverse map t_hat -> nu, strictly increasing in t_hat.
  std::vector<double> knot_t;
  std::vector<double> knot_nu;
  std::size_t k = 0;
  while (k < samples.size()) {
    std::size_t end = k;
    double sum = 0.0;
    while (end < samples.size() && samples[end].t_hat == samples[k].t_hat) {
      sum += samples[end].nu;
      ++end;
    }
    if (!knot_t.empty() && samples[k].t_hat < knot_t.back()) {
      fail(ErrorKind::kStructural,
           "transform samples are not monotone in the fitted values");
    }
    knot_t.push_back(samples[k].t_hat);
    knot_nu.push_back(sum / static_cast<double>(end - k));
    k = end;
  }
  if (knot_t.size() < 2) {
    fail(ErrorKind::kNonInvertible,
         "fitted transform is constant and cannot be inverted");
  }

  auto interpolate = [&](double q) {
    auto it = std::upper_bound(knot_t.begin(), knot_t.end(), q);
    std::size_t hi = static_cast<std::size_t>(it - knot_t.begin());
    hi = std::clamp<std::size_t>(hi, 1, knot_t.size() - 1);
    const std::size_t lo = hi - 1;
    const double frac = (q - knot_t[lo]) / (knot_t[hi] - knot_t[lo]);
    return knot_nu[lo] + frac * (knot_nu[hi] - knot_nu[lo]);
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(gamma.size());
  for (Eigen::Index j = 0; j < gamma.size(); ++j) {
    const double g = gamma[j];
    if (g == 0.0) continue;
    const double b = interpolate(g);
    beta[j] = g > 0.0 ? std::max(b, 0.0) : std::min(b, 0.0);
  }
  return beta;
}

RicResult ric_select(const PayoffTable& table, int s_min, int s_max,
                     const SolveOptions& options) {
  const int p = table.p();
  if (s_min < 1 || s_min > s_max || s_max > p) {
    fail(ErrorKind::kDomain, "RIC range must satisfy 1 <= s_min <= s_max <= p");
  }
  const auto finite = static_cast<long long>(table.size()) - 2;
  if (s_max >= finite) {
    fail(ErrorKind::kDomain,
         "RIC needs residual degrees of freedom: s_max must be below the " +
             std::to_string(finite) + " finite-weight coalitions");
  }

  RicResult r;
  r.s_min = s_min;
  r.s_max = s_max;
  for (int s = s_min; s <= s_max; ++s) {
    SolveOptions o = options;
    o.sparsity = s;
    r.solutions.push_back(solve(table, o));
    r.objectives.push_back(r.solutions.back().objective);
  }
  const double dof = static_cast<double>(finite - s_max);
  const double largest = *std::max_element(r.objectives.begin(), r.objectives.end());
  // A perfect fit at s_max would zero the variance estimate.
  const double floor = std::numeric_limits<double>::epsilon() * largest / dof;
  r.sigma2 = std::max(2.0 * r.objectives.back() / dof, floor);

  const double log_p = std::log(static_cast<double>(p));
  double best = std::numeric_limits<double>::infinity();
  for (int s = s_min; s <= s_max; ++s) {
    const double obj = r.objectives[s - s_min];
    const double score =
        (r.sigma2 > 0.0 ? 2.0 * obj / r.sigma2 : 0.0) + 2.0 * s * log_p;
    r.scores.push_back(score);
    if (score < best) {
      best = score;
      r.selected = s;
    }
  }
  return r;
}

std::vector<int> rank_features(const Eigen::VectorXd& values) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  return idx;
}

AttributionReport conventional_and_calibrated(const PayoffTable& table,
                                              const SolveOptions& options) {
  const PayoffTable adjusted = baseline_adjust(table);
  if (max_abs(adjusted.values()) == 0.0) {
    fail(ErrorKind::kFlatPayoff,
         "all payoffs are equal after baseline adjustment; nothing to attribute");
  }
  AttributionReport report;
  report.shapley = exact_shapley(table);
  report.sisr = solve(table, options);
  report.shapley_rank = rank_features(report.shapley.beta);
  report.sisr_rank = rank_features(report.sisr.gamma.gamma);
  return report;
}

}  // namespace sisr

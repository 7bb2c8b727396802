#include "sisr/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sisr/error.hpp"

namespace sisr {

OrderPlan build_order(const Eigen::VectorXd& nu) {
  const auto n = static_cast<std::size_t>(nu.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(nu[i])) {
      fail(ErrorKind::kData, "NaN payoff at index " + std::to_string(i));
    }
    if (!std::isfinite(nu[i])) {
      fail(ErrorKind::kData, "non-finite payoff at index " + std::to_string(i));
    }
  }
  OrderPlan plan;
  plan.permutation.resize(n);
  std::iota(plan.permutation.begin(), plan.permutation.end(), std::size_t{0});
  std::stable_sort(plan.permutation.begin(), plan.permutation.end(),
                   [&](std::size_t a, std::size_t b) { return nu[a] < nu[b]; });
  plan.group_starts.reserve(n + 1);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || nu[plan.permutation[k]] != nu[plan.permutation[k - 1]]) {
      plan.group_starts.push_back(k);
    }
  }
  plan.group_starts.push_back(n);
  return plan;
}

namespace {

struct Block {
  double weight;
  double weighted_sum;
  std::size_t start;  // offset in sorted order

  double mean() const { return weighted_sum / weight; }
};

}  // namespace

IsotonicFit isotonic_fit(const Eigen::VectorXd& delta,
                         const Eigen::VectorXd& weights, const OrderPlan& plan) {
  const auto n = static_cast<std::size_t>(delta.size());
  if (static_cast<std::size_t>(weights.size()) != n || plan.size() != n ||
      plan.group_starts.empty() || plan.group_starts.back() != n) {
    fail(ErrorKind::kStructural, "isotonic fit: delta, weights and order plan "
                                 "must have equal length");
  }

  std::vector<Block> stack;
  stack.reserve(plan.group_count());
  for (std::size_t g = 0; g < plan.group_count(); ++g) {
    Block b{0.0, 0.0, plan.group_starts[g]};
    for (std::size_t k = plan.group_starts[g]; k < plan.group_starts[g + 1]; ++k) {
      const std::size_t i = plan.permutation[k];
      if (!(weights[i] > 0.0)) {
        fail(ErrorKind::kDomain, "isotonic fit: weight at index " +
                                     std::to_string(i) + " is not positive");
      }
      b.weight += weights[i];
      b.weighted_sum += weights[i] * delta[i];
    }
    stack.push_back(b);
    while (stack.size() > 1 &&
           stack[stack.size() - 2].mean() >= stack.back().mean()) {
      Block top = stack.back();
      stack.pop_back();
      stack.back().weight += top.weight;
      stack.back().weighted_sum += top.weighted_sum;
    }
  }

  IsotonicFit fit;
  fit.t.resize(n);
  fit.block_starts.reserve(stack.size() + 1);
  for (std::size_t b = 0; b < stack.size(); ++b) {
    const std::size_t end = b + 1 < stack.size() ? stack[b + 1].start : n;
    const double level = stack[b].mean();
    for (std::size_t k = stack[b].start; k < end; ++k) {
      fit.t[plan.permutation[k]] = level;
    }
    fit.block_starts.push_back(stack[b].start);
  }
  fit.block_starts.push_back(n);

  double obj = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = fit.t[i] - delta[i];
    obj += weights[i] * r * r;
  }
  fit.objective = 0.5 * obj;
  return fit;
}

}  // namespace sisr

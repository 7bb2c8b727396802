#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace sisr {

/// Total preorder induced by a payoff vector: a stable ascending sort plus
/// the maximal runs of equal values (tie groups), which must share one
/// fitted level.
struct OrderPlan {
  std::vector<std::size_t> permutation;
  /// Start offsets into `permutation` of each tie group, plus a final
  /// sentinel equal to permutation.size().
  std::vector<std::size_t> group_starts;

  std::size_t size() const { return permutation.size(); }
  std::size_t group_count() const { return group_starts.size() - 1; }
};

struct IsotonicFit {
  /// Fitted values in the original (unpermuted) order.
  Eigen::VectorXd t;
  /// 0.5 * sum w (t - delta)^2.
  double objective = 0.0;
  /// Start offsets (into the sorted order) of each fitted level set, plus a
  /// sentinel equal to the problem size.
  std::vector<std::size_t> block_starts;
};

OrderPlan build_order(const Eigen::VectorXd& nu);

/// Weighted least-squares fit of delta that is non-decreasing along `plan`
/// and constant on each tie group. Tie groups are pre-pooled, then a
/// stack-based pool-adjacent-violators pass runs over the groups.
IsotonicFit isotonic_fit(const Eigen::VectorXd& delta,
                         const Eigen::VectorXd& weights, const OrderPlan& plan);

}  // namespace sisr

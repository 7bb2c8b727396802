#include <gtest/gtest.h>

#include "sisr/engine.hpp"
#include "sisr/isotonic.hpp"
#include "sisr/payoff_lab.hpp"
#include "sisr/rng.hpp"

using namespace sisr;

namespace {

PayoffTable additive_table(const Eigen::VectorXd& b, double baseline = 0.0) {
  const auto p = static_cast<int>(b.size());
  std::vector<double> v(std::size_t{1} << p, baseline);
  for (std::uint32_t bits = 0; bits < v.size(); ++bits) {
    for_each_member(bits, [&](int j) { v[bits] += b[j]; });
  }
  return PayoffTable::from_values(p, v);
}

PayoffTable scaled(const PayoffTable& t, double c) {
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = c * t[i].value;
  return PayoffTable::from_values(t.p(), v);
}

SolveOptions with_s(int s) {
  SolveOptions o;
  o.sparsity = s;
  return o;
}

}  // namespace

TEST(Solve, AdditiveNoiseFreeRecovered) {
  Eigen::VectorXd star(6);
  star << 0.1, 0.5, 0.0, 0.3, 0.7, 0.2;
  star /= star.norm();
  const PayoffTable table = additive_table(star, 2.5);
  const SisrSolution sol = solve(table, with_s(5));
  // the exact Shapley values of an additive game are its contributions
  Eigen::VectorXd oracle = exact_shapley(table).beta;
  oracle /= oracle.norm();
  // any gamma that keeps the weak order of the subset sums fits exactly, so
  // the truth is only pinned down up to that cone
  EXPECT_LT(sol.objective, 1e-8);
  EXPECT_GE(affinity(sol.gamma.gamma, oracle), 99.0);
  EXPECT_EQ(rank_features(sol.gamma.gamma), rank_features(oracle));
  EXPECT_EQ(sol.gamma.gamma[2], 0.0);
  EXPECT_EQ(sol.baseline, 2.5);
}

TEST(Solve, ScaleInvariant) {
  Rng rng(4);
  std::vector<double> v(256);
  for (auto& x : v) x = rng.normal();
  const auto t = PayoffTable::from_values(8, v);
  const auto base = solve(t, with_s(4)).gamma.gamma;
  for (double c : {0.1, 1.0, 100.0}) {
    EXPECT_LT((solve(scaled(t, c), with_s(4)).gamma.gamma - base).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Solve, WinnerTakesAllP8) {
  const PayoffTable t = gen_max_payoffs(8, Eigen::VectorXd::LinSpaced(8, 1, 8));
  const SisrSolution sol = solve(t, with_s(8));
  // T_hat(beta*_j) is the fitted level of the singleton {j}, whose payoff is j
  Eigen::VectorXd t_at_beta(8);
  for (int j = 0; j < 8; ++j) t_at_beta[j] = sol.t_hat[1 << j];
  EXPECT_GE(pearson(sol.gamma.gamma, t_at_beta), 0.99);
  for (std::size_t k = 1; k < sol.transform_samples.size(); ++k) {
    const auto& a = sol.transform_samples[k - 1];
    const auto& b = sol.transform_samples[k];
    if (a.nu != b.nu) EXPECT_GT(b.t_hat, a.t_hat);
  }
}

TEST(Solve, FeasibilityAtExit) {
  Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 3 + static_cast<int>(rng.below(6));
    std::vector<double> v(std::size_t{1} << p);
    for (auto& x : v) x = static_cast<double>(rng.below(6));  // ties
    v.back() += 1.0;
    const auto table = PayoffTable::from_values(p, v);
    const int s = 1 + static_cast<int>(rng.below(p));
    SolveOptions o = with_s(s);
    o.record_trace = true;
    const SisrSolution sol = solve(table, o);
    EXPECT_NEAR(sol.gamma.gamma.norm(), 1.0, 1e-10);
    EXPECT_LE(sol.gamma.nonzeros(), s);
    const OrderPlan plan = build_order(baseline_adjust(table).values());
    for (std::size_t k = 1; k < plan.size(); ++k) {
      EXPECT_LE(sol.t_hat[plan.permutation[k - 1]], sol.t_hat[plan.permutation[k]]);
    }
    for (std::size_t g = 0; g < plan.group_count(); ++g) {
      const double level = sol.t_hat[plan.permutation[plan.group_starts[g]]];
      for (std::size_t k = plan.group_starts[g]; k < plan.group_starts[g + 1]; ++k) {
        EXPECT_EQ(sol.t_hat[plan.permutation[k]], level);
      }
    }
    for (std::size_t k = 1; k < sol.objective_trace.size(); ++k) {
      EXPECT_LE(sol.objective_trace[k], sol.objective_trace[k - 1] * (1 + 1e-12) + 1e-15);
    }
    // support and order carried over to beta
    for (int i = 0; i < p; ++i) {
      // zero stays zero; a nonzero may clamp to zero but never flips sign
      if (sol.gamma.gamma[i] == 0.0) EXPECT_EQ(sol.beta[i], 0.0);
      EXPECT_GE(sol.beta[i] * sol.gamma.gamma[i], 0.0);
      for (int j = 0; j < p; ++j) {
        if (sol.gamma.gamma[i] >= sol.gamma.gamma[j]) EXPECT_GE(sol.beta[i], sol.beta[j]);
      }
    }
  }
}

TEST(Solve, PermutationEquivariant) {
  Rng rng(21);
  const int p = 6;
  std::vector<double> v(64);
  for (auto& x : v) x = rng.normal();
  const int perm[p] = {3, 0, 5, 1, 4, 2};  // feature j moves to perm[j]
  std::vector<double> w(64);
  for (std::uint32_t bits = 0; bits < 64; ++bits) {
    std::uint32_t moved = 0;
    for_each_member(bits, [&](int j) { moved |= 1u << perm[j]; });
    w[moved] = v[bits];
  }
  const auto a = solve(PayoffTable::from_values(p, v), with_s(3));
  const auto b = solve(PayoffTable::from_values(p, w), with_s(3));
  for (int j = 0; j < p; ++j) {
    EXPECT_NEAR(b.gamma.gamma[perm[j]], a.gamma.gamma[j], 1e-9);
    EXPECT_NEAR(b.beta[perm[j]], a.beta[j], 1e-9);
  }
}

TEST(Solve, Errors) {
  const auto flat = PayoffTable::from_values(3, std::vector<double>(8, 4.0));
  try {
    solve(flat, with_s(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFlatPayoff);
  }
  const auto one = PayoffTable::from_values(1, std::vector<double>{0, 1});
  EXPECT_THROW(solve(one, with_s(1)), Error);
  const auto t = PayoffTable::from_values(2, std::vector<double>{0, 1, 2, 4});
  EXPECT_THROW(solve(t, with_s(3)), Error);
}

TEST(RecoverBeta, Examples) {
  const std::vector<TransformSample> s{{0, 0}, {2, 4}};
  const Eigen::VectorXd b = recover_beta(Eigen::Vector3d(1, 0, 4), s);
  EXPECT_DOUBLE_EQ(b[0], 0.5);
  EXPECT_EQ(b[1], 0.0);
  EXPECT_DOUBLE_EQ(b[2], 2.0);
  // the inverted pair (t=4 -> nu=2) queried at t=1
  const std::vector<TransformSample> pair{{0, 0}, {4, 2}};
  EXPECT_DOUBLE_EQ(recover_beta(Eigen::VectorXd::Constant(1, 1.0), pair)[0], 2.0);
}

TEST(RecoverBeta, KnotsDuplicatesAndExtension) {
  const std::vector<TransformSample> s{{0, 0}, {1, 1}, {3, 1}, {4, 3}};
  // duplicate t=1 averages nu to 2
  const Eigen::VectorXd b = recover_beta(Eigen::Vector4d(1, 3, 5, 0.5), s);
  EXPECT_DOUBLE_EQ(b[0], 2.0);
  EXPECT_DOUBLE_EQ(b[1], 4.0);
  EXPECT_DOUBLE_EQ(b[2], 6.0);  // last segment (1,2)-(3,4) extended
  EXPECT_DOUBLE_EQ(b[3], 1.0);
}

TEST(RecoverBeta, Errors) {
  const std::vector<TransformSample> flat{{0, 1}, {2, 1}};
  try {
    recover_beta(Eigen::VectorXd::Constant(1, 1.0), flat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNonInvertible);
  }
  EXPECT_THROW(recover_beta(Eigen::VectorXd::Constant(1, 1.0), {}), Error);
}

TEST(Ric, SingletonAndCurve) {
  const auto g = gen_sparse_payoffs(6, three_sparse_gamma(6), cube_root_transform(), 1e-2, 3);
  const RicResult one = ric_select(g.table, 2, 2, SolveOptions{});
  EXPECT_EQ(one.selected, 2);
  const RicResult r = ric_select(g.table, 1, 5, SolveOptions{});
  ASSERT_EQ(r.scores.size(), 5u);
  for (double v : r.scores) EXPECT_TRUE(std::isfinite(v));
  EXPECT_GE(r.selected, 1);
  EXPECT_LE(r.selected, 5);
}

TEST(Ric, ZeroResidualDofRejected) {
  const auto t = PayoffTable::from_values(2, std::vector<double>{0, 1, 2, 4});
  try {
    ric_select(t, 1, 2, SolveOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDomain);
  }
}

TEST(Ric, SelectsTrueSparsity) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g =
        gen_sparse_payoffs(10, three_sparse_gamma(10), cube_root_transform(), 1e-3, seed);
    hits += ric_select(g.table, 1, 6, SolveOptions{}).selected == 3;
  }
  EXPECT_GE(hits, 18);
}

TEST(Report, AdditiveRankingsAgree) {
  Eigen::VectorXd star(5);
  star << 0.2, 0.9, 0.4, 0.1, 0.6;
  star /= star.norm();
  const auto r = conventional_and_calibrated(additive_table(star), with_s(5));
  EXPECT_EQ(r.shapley_rank, r.sisr_rank);
  EXPECT_EQ(r.shapley.beta.size(), 5);
  EXPECT_EQ(r.sisr.beta.size(), 5);
}

TEST(Report, FlatTableErrors) {
  const auto flat = PayoffTable::from_values(3, std::vector<double>(8, 1.0));
  try {
    conventional_and_calibrated(flat, with_s(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFlatPayoff);
  }
}

TEST(RankFeatures, StableTies) {
  EXPECT_EQ(rank_features(Eigen::Vector4d(1, 3, 3, 0)), (std::vector<int>{1, 2, 0, 3}));
}

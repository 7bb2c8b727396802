#include <gtest/gtest.h>

#include <Eigen/QR>

#include <algorithm>

#include "sisr/payoff_lab.hpp"

using namespace sisr;

namespace {

// R^2 of y on [1, X_A] by an independent dense QR route.
double r2_oracle(const RegressionDesign& d, std::uint32_t bits) {
  const Eigen::Index n = d.x.rows();
  std::vector<int> cols;
  for_each_member(bits, [&](int j) { cols.push_back(j); });
  Eigen::MatrixXd a(n, static_cast<Eigen::Index>(cols.size()) + 1);
  a.col(0).setOnes();
  for (std::size_t k = 0; k < cols.size(); ++k) a.col(k + 1) = d.x.col(cols[k]);
  const Eigen::VectorXd fit = a * a.householderQr().solve(d.y);
  const double tss = (d.y.array() - d.y.mean()).square().sum();
  return 1.0 - (d.y - fit).squaredNorm() / tss;
}

template <class Fn>
void for_nested_pairs(int p, Fn&& fn) {
  const std::uint32_t full = CoalitionMask::full_bits(p);
  for (std::uint32_t a = 0; a <= full; ++a) {
    for (int j = 0; j < p; ++j) {
      if (!((a >> j) & 1u)) fn(a, a | (1u << j));
    }
  }
}

}  // namespace

TEST(TransformGen, C0ByHand) {
  const auto g = gen_transform_payoffs(2, TransformScheme::kSquareRoot, 1);
  EXPECT_NEAR(g.truth.c0, std::sqrt(3.0 / 15.0), 1e-15);
  EXPECT_NEAR(g.truth.c0, 0.4472, 1e-4);
}

TEST(TransformGen, TruthInvariants) {
  for (TransformScheme s : all_transform_schemes()) {
    const auto g = gen_transform_payoffs(6, s, 3);
    EXPECT_NEAR(g.truth.gamma_star.norm(), 1.0, 1e-12) << scheme_name(s);
    // the empty coalition carries the smallest payoff
    EXPECT_EQ(g.table.empty_value(), g.table.values().minCoeff()) << scheme_name(s);
    EXPECT_TRUE(g.table.full_enumeration());
    EXPECT_EQ(g.table.size(), 64u);
    // T*(nu) sorted by nu is non-decreasing and sits in [0, c0 (2^p - 1)]
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < g.table.size(); ++i) {
      pts.emplace_back(g.table[i].value, g.truth.forward(g.table[i].value));
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t k = 1; k < pts.size(); ++k) {
      EXPECT_GE(pts[k].second, pts[k - 1].second - 1e-9) << scheme_name(s);
    }
    EXPECT_GE(pts.front().second, -1e-9);
    EXPECT_LE(pts.back().second, g.truth.c0 * 63 * (1 + 1e-9));
  }
}

TEST(TransformGen, SchemeNames) {
  for (TransformScheme s : all_transform_schemes()) {
    EXPECT_EQ(parse_transform_scheme(scheme_name(s)), s);
  }
  try {
    parse_transform_scheme("cubic");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(TransformGen, SquareRootRecovered) {
  const auto g = gen_transform_payoffs(10, TransformScheme::kSquareRoot, 0);
  SolveOptions o;
  o.sparsity = 10;
  const auto sol = solve(g.table, o);
  Eigen::VectorXd t_star(g.table.size());
  for (std::size_t i = 0; i < g.table.size(); ++i) {
    t_star[static_cast<Eigen::Index>(i)] = g.truth.forward(g.table[i].value);
  }
  EXPECT_GE(pearson(sol.t_hat, t_star), 0.99);
}

TEST(SparseGen, NoiselessIsExact) {
  const Eigen::VectorXd star = three_sparse_gamma(7);
  const auto g = gen_sparse_payoffs(7, star, cube_root_transform(), 0.0, 5);
  const MonotoneTransform cube = cube_root_transform();
  for (const auto& e : g.table.entries()) {
    double sum = 0.0;
    for_each_member(e.mask.bits, [&](int j) { sum += star[j]; });
    EXPECT_NEAR(cube.forward(e.value), sum, 1e-12);
  }
  EXPECT_EQ(g.truth.support, (std::vector<int>{0, 1, 2}));
}

TEST(SparseGen, DeterministicAndEndpointsNoiseless) {
  const auto a = gen_sparse_payoffs(8, three_sparse_gamma(8), cube_root_transform(), 0.2, 9);
  const auto b = gen_sparse_payoffs(8, three_sparse_gamma(8), cube_root_transform(), 0.2, 9);
  EXPECT_EQ(a.table.values(), b.table.values());
  EXPECT_EQ(a.table.empty_value(), 0.0);
  EXPECT_NEAR(std::cbrt(a.table.grand_value()), std::sqrt(3.0), 1e-12);
}

TEST(SparseGen, EvenRootClampCounted) {
  // sqrt's inverse has no negative images; large noise forces resampling
  Eigen::VectorXd star = Eigen::VectorXd::Zero(5);
  star[0] = 1.0;
  const auto g = gen_sparse_payoffs(5, star, square_root_transform(), 5.0, 2);
  for (const auto& e : g.table.entries()) EXPECT_GE(e.value, 0.0);
  EXPECT_GE(g.truth.clamped, 0u);
}

TEST(SparseGen, InputErrors) {
  EXPECT_THROW(gen_sparse_payoffs(5, Eigen::VectorXd::Ones(5), cube_root_transform(), 0.1, 1),
               Error);
  EXPECT_THROW(gen_sparse_payoffs(5, three_sparse_gamma(4), cube_root_transform(), 0.1, 1),
               Error);
}

TEST(SparseGen, NoiselessSolveRecoversSupport) {
  const auto g = gen_sparse_payoffs(10, three_sparse_gamma(10), cube_root_transform(), 0.0, 1);
  SolveOptions o;
  o.sparsity = 5;
  const auto sol = solve(g.table, o);
  EXPECT_EQ(support_recovery(sol.gamma.gamma, g.truth.support), 100.0);
  EXPECT_GE(affinity(sol.gamma.gamma, g.truth.gamma_star), 99.99);
}

TEST(MaxGen, Examples) {
  EXPECT_EQ(gen_max_payoffs(2, Eigen::Vector2d(1, 2)).values(), Eigen::Vector4d(0, 1, 2, 2));
  const auto c = gen_max_payoffs(4, Eigen::VectorXd::Constant(4, 2.5));
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_EQ(c[i].value, 2.5);
  EXPECT_EQ(gen_max_payoffs(8, Eigen::VectorXd::LinSpaced(8, 1, 8)).grand_value(), 8.0);
  EXPECT_THROW(gen_max_payoffs(3, Eigen::Vector3d(1, -1, 2)), Error);
}

TEST(Design, DeterministicAndUncorrelatedAtThetaZero) {
  const Eigen::VectorXd alpha = Eigen::VectorXd::Constant(5, 3.0);
  const auto a = gen_gaussian_design(500, 5, 0.0, alpha, RegressionTask::kContinuous, 4);
  const auto b = gen_gaussian_design(500, 5, 0.0, alpha, RegressionTask::kContinuous, 4);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  const Eigen::MatrixXd c = a.x.rowwise() - a.x.colwise().mean();
  const Eigen::MatrixXd cov = c.transpose() * c;
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      EXPECT_LT(std::abs(cov(i, j) / std::sqrt(cov(i, i) * cov(j, j))), 0.2);
    }
  }
}

TEST(Design, ToeplitzCorrelationAtHalf) {
  const auto d = gen_gaussian_design(20000, 3, 0.5, Eigen::Vector3d::Zero(),
                                     RegressionTask::kContinuous, 8);
  const Eigen::MatrixXd c = d.x.rowwise() - d.x.colwise().mean();
  const Eigen::MatrixXd cov = c.transpose() * c / 20000.0;
  EXPECT_NEAR(cov(0, 1), 0.5, 0.03);
  EXPECT_NEAR(cov(0, 2), 0.25, 0.03);
  EXPECT_NEAR(cov(1, 1), 1.0, 0.05);
}

TEST(Design, Errors) {
  EXPECT_THROW(gen_gaussian_design(50, 3, 1.0, Eigen::Vector3d::Ones(),
                                   RegressionTask::kContinuous, 1),
               Error);
  EXPECT_THROW(gen_gaussian_design(4, 3, 0.2, Eigen::Vector3d::Ones(),
                                   RegressionTask::kContinuous, 1),
               Error);
}

TEST(R2Payoffs, MatchOracleAndNest) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto d = gen_gaussian_design(40, 8, 0.5, Eigen::VectorXd::Constant(8, 3.0),
                                       RegressionTask::kContinuous, seed);
    const auto r = r2_payoffs(d, 2);
    EXPECT_EQ(r.table.size(), 256u);
    EXPECT_EQ(r.table.empty_value(), 0.0);
    EXPECT_GT(r.table.grand_value(), 0.9);
    for (std::uint32_t bits : {1u, 6u, 77u, 255u}) {
      EXPECT_NEAR(r.table.value(bits), r2_oracle(d, bits), 1e-10);
    }
    for_nested_pairs(8, [&](std::uint32_t a, std::uint32_t b) {
      EXPECT_LE(r.table.value(a), r.table.value(b));
    });
  }
}

TEST(R2Payoffs, NoiseFreeIsOne) {
  auto d = gen_gaussian_design(30, 4, 0.3, Eigen::Vector4d(1, -2, 0.5, 3),
                               RegressionTask::kContinuous, 2);
  d.y = d.x * d.alpha_star;
  EXPECT_NEAR(r2_payoffs(d, 1).table.grand_value(), 1.0, 1e-12);
}

TEST(R2Payoffs, RankDeficientFlagged) {
  auto d = gen_gaussian_design(20, 3, 0.3, Eigen::Vector3d(1, 1, 1),
                               RegressionTask::kContinuous, 2);
  d.x.col(2) = d.x.col(0);
  const auto r = r2_payoffs(d, 1);
  EXPECT_FALSE(r.flagged.empty());
  EXPECT_NEAR(r.table.value(0b101), r.table.value(0b001), 1e-10);
}

TEST(PseudoR2, RangeAndNesting) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto d = gen_gaussian_design(60, 6, 0.5, Eigen::VectorXd::Constant(6, 1.0),
                                       RegressionTask::kBinary, seed);
    const auto r = pseudo_r2_payoffs(d, 1);
    EXPECT_EQ(r.table.empty_value(), 0.0);
    for (const auto& e : r.table.entries()) {
      EXPECT_GE(e.value, -1e-12);
      EXPECT_LT(e.value, 1.0);
    }
    for_nested_pairs(6, [&](std::uint32_t a, std::uint32_t b) {
      EXPECT_LE(r.table.value(a), r.table.value(b) + 1e-8);
    });
  }
}

TEST(PseudoR2, TaskMismatch) {
  const auto d = gen_gaussian_design(30, 3, 0.5, Eigen::Vector3d::Ones(),
                                     RegressionTask::kContinuous, 1);
  EXPECT_THROW(pseudo_r2_payoffs(d, 1), Error);
}

TEST(Metrics, Affinity) {
  const Eigen::Vector3d e1(1, 0, 0), e2(0, 1, 0);
  EXPECT_DOUBLE_EQ(affinity(e1, e1), 100.0);
  EXPECT_DOUBLE_EQ(affinity(e1, e2), 0.0);
  EXPECT_DOUBLE_EQ(affinity(-e1, e1), -100.0);
  EXPECT_DOUBLE_EQ(affinity(-e1, e1, true), 100.0);
  EXPECT_THROW(affinity(2 * e1, e1), Error);
}

TEST(Metrics, SupportRecovery) {
  EXPECT_EQ(support_recovery(Eigen::Vector4d(1, 1, 1, 0), {0, 1}), 100.0);
  EXPECT_EQ(support_recovery(Eigen::Vector4d(0, 0, 1, 1), {0, 1}), 0.0);
  EXPECT_EQ(support_recovery(Eigen::Vector4d(1, 0, 1, 1), {0, 1}), 50.0);
  EXPECT_THROW(support_recovery(Eigen::Vector4d(1, 0, 0, 0), {}), Error);
}

TEST(Metrics, Pearson) {
  EXPECT_NEAR(pearson(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(2, 4, 6)), 1.0, 1e-15);
  EXPECT_NEAR(pearson(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(3, 2, 1)), -1.0, 1e-15);
}

TEST(Timing, RowsSortedSingleton) {
  const auto g = gen_sparse_payoffs(6, three_sparse_gamma(6), cube_root_transform(), 1e-3, 0);
  const auto one = timing_sweep(g.table, {3}, SolveOptions{}, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].s, 3);
  const auto rows = timing_sweep(g.table, {5, 2, 4, 2}, SolveOptions{}, 1);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end(),
                             [](const TimingRow& a, const TimingRow& b) { return a.s < b.s; }));
}

TEST(Linearity, AdditiveGameIsLinear) {
  Eigen::VectorXd b(5);
  b << 0.1, 0.2, 0.3, 0.4, 0.5;
  std::vector<double> v(32, 0.0);
  for (std::uint32_t bits = 0; bits < 32; ++bits) {
    for_each_member(bits, [&](int j) { v[bits] += b[j]; });
  }
  const auto t = PayoffTable::from_values(5, v);
  SolveOptions o;
  o.sparsity = 5;
  const auto lc = linearity_check(t, solve(t, o));
  EXPECT_LT(lc.monotone_residual, 1e-4);
  EXPECT_LT(lc.linear_residual, 1e-3);
  // a max game is far from linear in nu
  const auto m = gen_max_payoffs(5, Eigen::VectorXd::LinSpaced(5, 1, 5));
  const auto lm = linearity_check(m, solve(m, o));
  EXPECT_GT(lm.linear_residual, 10 * lm.monotone_residual);
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "freqlog/bounds.hpp"
#include "test_support.hpp"

namespace freqlog {
namespace {

using testing::dominant_risky;
using testing::non_dominant_risky;

// Random model that has a dominant asset, by rejection.
ReturnModel random_dominant_model(std::mt19937_64& rng, std::size_t m, std::size_t s,
                                  std::size_t* j) {
  while (true) {
    auto model = testing::random_test_model(rng, m, s);
    const auto dom = find_dominant(model);
    if (dom.dominant_index) {
      *j = *dom.dominant_index;
      return model;
    }
  }
}

// Weight vector with K_j = kj and the rest split at random.
std::vector<double> weight_with(std::mt19937_64& rng, std::size_t m, std::size_t j, double kj) {
  auto rest = testing::random_interior_weight(rng, m - 1);
  std::vector<double> K(m);
  for (std::size_t i = 0, r = 0; i < m; ++i) K[i] = i == j ? kj : (1.0 - kj) * rest[r++];
  return K;
}

TEST(BuyholdGapBounds, FullWeightIsZero) {
  for (int n : {1, 2, 17}) {
    const auto b = buyhold_gap_bounds(1.0, n);
    EXPECT_EQ(b.lower, 0.0);
    EXPECT_EQ(b.upper, 0.0);
    EXPECT_EQ(b.kind, BoundKind::baseline);
  }
}

TEST(BuyholdGapBounds, HalfWeightTenSteps) {
  const auto b = buyhold_gap_bounds(0.5, 10);
  EXPECT_NEAR(b.lower, -0.030685281944005473, 1e-15);
  EXPECT_NEAR(b.upper, 0.06931471805599453, 1e-15);
  EXPECT_EQ(b.tightened_lower, 0.0);
  EXPECT_LE(b.lower, b.upper);
}

TEST(BuyholdGapBounds, MarketPortfolioWithUnequalWeights) {
  const std::size_t m = 5;
  const double eps = 0.1;
  const double kj = market_portfolio_weight(m, eps);
  for (int n : {1, 3, 50}) {
    const auto b = buyhold_gap_bounds(kj, n);
    EXPECT_NEAR(b.upper, std::log((m - 1) / eps) / n, 1e-14);
    EXPECT_NEAR(b.lower, (std::log((m - 1) / eps) + 1 - (m - 1) / eps) / n, 1e-13);
  }
}

TEST(BuyholdGapBounds, Preconditions) {
  EXPECT_THROW(buyhold_gap_bounds(0.0, 1), std::invalid_argument);
  EXPECT_THROW(buyhold_gap_bounds(1.5, 1), std::invalid_argument);
  EXPECT_THROW(buyhold_gap_bounds(0.5, 0), std::invalid_argument);
}

TEST(BuyholdGapBounds, DecayAsOneOverN) {
  for (double kj : {0.05, 0.25, 0.5, 0.9, 0.999}) {
    const double c = baseline_decay_constant(kj);
    for (int n = 1; n <= 200; n += 7) {
      const auto b = buyhold_gap_bounds(kj, n);
      EXPECT_LE(std::fabs(b.lower), c / n * (1 + 1e-15));
      EXPECT_LE(std::fabs(b.upper), c / n * (1 + 1e-15));
    }
  }
}

TEST(ImprovedGapBounds, FullWeightIsZero) {
  const auto b = improved_gap_bounds(dominant_risky(), unit_weight(2, 1), 1, 3);
  EXPECT_EQ(b.kind, BoundKind::improved);
  EXPECT_EQ(b.lower, 0.0);
  EXPECT_NEAR(b.upper, 0.0, 1e-16);
}

TEST(ImprovedGapBounds, QuarterCashTwoSteps) {
  const auto model = dominant_risky();
  const std::vector<double> K{0.25, 0.75};
  const auto b = improved_gap_bounds(model, WeightVector(K), 1, 2);
  EXPECT_EQ(b.expectation_method, Method::exact);
  EXPECT_NEAR(b.expectation, testing::brute_force_share_ratio(model, K, 1, 2), 1e-14);
  EXPECT_LE(b.upper, 0.5 * std::log(1 / 0.75));
  const double gap = elg_exact(model, unit_weight(2, 1), 1).value -
                     elg_exact(model, WeightVector(K), 2).value;
  EXPECT_GE(gap, 0.0);
  EXPECT_LE(gap, b.upper + 1e-15);
}

TEST(ImprovedGapBounds, Preconditions) {
  EXPECT_THROW(improved_gap_bounds(non_dominant_risky(), WeightVector({0.5, 0.5}), 1, 2),
               std::invalid_argument);
  EXPECT_THROW(improved_gap_bounds(dominant_risky(), WeightVector({0.5, 0.5}), 0, 2),
               std::invalid_argument);
  EXPECT_THROW(improved_gap_bounds(dominant_risky(), unit_weight(2, 0), 1, 2),
               std::invalid_argument);
}

TEST(ImprovedGapBounds, MonteCarloFallback) {
  const auto model = dominant_risky();
  const WeightVector K({0.5, 0.5});
  const auto exact = improved_gap_bounds(model, K, 1, 6);
  const auto mc = improved_gap_bounds(model, K, 1, 6, 10, {200'000, 3});
  EXPECT_EQ(mc.expectation_method, Method::monte_carlo);
  EXPECT_GT(mc.expectation_std_error, 0.0);
  EXPECT_LE(std::fabs(mc.expectation - exact.expectation), 4 * mc.expectation_std_error);
}

TEST(RebalanceHorizon, Examples) {
  EXPECT_EQ(rebalance_horizon(0.5, 0.07).n_star, 10);
  EXPECT_EQ(rebalance_horizon(0.9, 0.01).n_star, 11);
  // epsilon = c log(1/k_j) gives ceil(1/c) despite rounding in epsilon.
  for (double kj : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    const double log_inv = std::log(1 / kj);
    EXPECT_EQ(rebalance_horizon(kj, 0.5 * log_inv).n_star, 2);
    EXPECT_EQ(rebalance_horizon(kj, 0.25 * log_inv).n_star, 4);
    EXPECT_EQ(rebalance_horizon(kj, 0.1 * log_inv).n_star, 10);
    EXPECT_EQ(rebalance_horizon(kj, 0.3 * log_inv).n_star, 4);
  }
  EXPECT_THROW(rebalance_horizon(0.5, std::log(2.0)), std::invalid_argument);
  EXPECT_THROW(rebalance_horizon(0.5, 0.0), std::invalid_argument);
  EXPECT_THROW(rebalance_horizon(1.0, 0.01), std::invalid_argument);
  EXPECT_THROW(rebalance_horizon(0.0, 0.01), std::invalid_argument);
}

TEST(SublinearRatioSequence, Examples) {
  const auto r = sublinear_ratio_sequence(0.3, 3);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], 0.5, 1e-15);
  EXPECT_NEAR(r[1], 2.0 / 3.0, 1e-15);

  const auto long_run = sublinear_ratio_sequence(0.7, 1000);
  EXPECT_NEAR(long_run.back(), 0.999, 1e-12);
  for (std::size_t i = 1; i < long_run.size(); ++i) {
    EXPECT_GT(long_run[i], long_run[i - 1]);
    EXPECT_LT(long_run[i], 1.0);
  }
  EXPECT_THROW(sublinear_ratio_sequence(1.0, 5), std::invalid_argument);
  EXPECT_THROW(sublinear_ratio_sequence(0.5, 1), std::invalid_argument);
}

// Property: baseline and improved sandwiches hold on dominant-asset models.
TEST(BoundsProperty, SandwichOnDominantModels) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 12; ++trial) {
    std::size_t j = 0;
    const std::size_t m = 2 + trial % 2;
    const auto model = random_dominant_model(rng, m, 2 + trial % 2, &j);
    const double g1_star = elg_exact(model, unit_weight(m, j), 1).value;
    for (double kj : {0.1, 0.5, 0.9}) {
      const auto K = weight_with(rng, m, j, kj);
      for (int n = 1; n <= 5; ++n) {
        const double gap = g1_star - elg_exact(model, WeightVector(K), n).value;
        const auto base = buyhold_gap_bounds(kj, n);
        const auto improved = improved_gap_bounds(model, WeightVector(K), j, n);
        EXPECT_LE(base.lower, gap + 1e-9);
        EXPECT_LE(gap, base.upper + 1e-9);
        EXPECT_GE(gap, -1e-9);
        EXPECT_LE(gap, improved.upper + 1e-9);
        EXPECT_LE(improved.upper, base.upper + 1e-12);
        EXPECT_GE(improved.upper, 0.0);
      }
    }
  }
}

// Property: past n*, the shortfall is within epsilon.
TEST(BoundsProperty, HorizonContract) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 6; ++trial) {
    std::size_t j = 0;
    const auto model = random_dominant_model(rng, 2, 2, &j);
    const double g1_star = elg_exact(model, unit_weight(2, j), 1).value;
    const double kj = 0.5;
    const auto K = weight_with(rng, 2, j, kj);
    const auto plan = rebalance_horizon(kj, 0.25 * std::log(1 / kj));
    EXPECT_EQ(plan.n_star, 4);  // ceil(1 / 0.25)
    for (auto n = plan.n_star; n <= plan.n_star + 3; ++n) {
      const double gap = g1_star - elg_exact(model, WeightVector(K), static_cast<int>(n)).value;
      EXPECT_LE(gap, plan.epsilon);
    }
  }
}

}  // namespace
}  // namespace freqlog

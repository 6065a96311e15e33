#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "freqlog/model.hpp"
#include "test_support.hpp"

namespace freqlog {
namespace {

ModelData two_asset(std::vector<std::vector<double>> atoms, std::vector<double> probs) {
  return {{"a", "b"}, std::move(atoms), std::move(probs), std::nullopt};
}

std::string violation_of(const ModelData& d) {
  try {
    validate_model(d);
  } catch (const InvariantViolation& e) {
    return e.what();
  }
  return "";
}

TEST(ValidateModel, CashOnlyModelIsValid) {
  ModelData d = two_asset({{0.0, 0.0}}, {1.0});
  d.riskless_index = 0;
  EXPECT_NO_THROW(validate_model(d));
}

TEST(ValidateModel, ReturnOfMinusOneIsRejected) {
  EXPECT_NE(violation_of(two_asset({{0.1, -1.0}}, {1.0})).find("return not > -1"),
            std::string::npos);
}

TEST(ValidateModel, ProbabilitySumIsReported) {
  EXPECT_NE(violation_of(two_asset({{0.1, 0.0}, {0.2, 0.0}}, {0.5, 0.4}))
                .find("probability sum 0.9"),
            std::string::npos);
}

TEST(ValidateModel, OtherInvariants) {
  EXPECT_NE(violation_of(two_asset({{0.1, 0.0}, {0.2, 0.0}}, {1.5, -0.5})).find("negative probability"),
            std::string::npos);
  EXPECT_NE(violation_of({{"a"}, {{0.1}}, {1.0}, std::nullopt}).find("at least 2"),
            std::string::npos);
  EXPECT_NE(violation_of(two_asset({}, {})).find("at least 1 atom"), std::string::npos);
  EXPECT_NE(violation_of(two_asset({{0.1}}, {1.0})).find("entries"), std::string::npos);
  EXPECT_NE(violation_of(two_asset({{0.1, INFINITY}}, {1.0})).find("finite"), std::string::npos);

  ModelData ragged = two_asset({{0.01, 0.1}, {0.02, -0.1}}, {0.5, 0.5});
  ragged.riskless_index = 0;
  EXPECT_NE(violation_of(ragged).find("riskless column"), std::string::npos);

  ModelData negative_rate = two_asset({{-0.01, 0.1}}, {1.0});
  negative_rate.riskless_index = 0;
  EXPECT_NE(violation_of(negative_rate).find("riskless rate"), std::string::npos);
}

TEST(ValidateModel, ToleratesTinyNormalizationError) {
  EXPECT_NO_THROW(validate_model(two_asset({{0.1, 0.0}, {0.2, 0.0}}, {0.5, 0.5 + 5e-13})));
  EXPECT_THROW(validate_model(two_asset({{0.1, 0.0}, {0.2, 0.0}}, {0.5, 0.5 + 5e-12})),
               InvariantViolation);
}

TEST(UnitWeight, Definition) {
  EXPECT_EQ(unit_weight(2, 0), WeightVector({1.0, 0.0}));
  EXPECT_EQ(unit_weight(3, 2), WeightVector({0.0, 0.0, 1.0}));
  EXPECT_THROW(unit_weight(2, 5), std::out_of_range);
}

TEST(WeightVector, RejectsPointsOffTheSimplex) {
  EXPECT_THROW(WeightVector({0.6, 0.6}), InvariantViolation);
  EXPECT_THROW(WeightVector({1.1, -0.1}), InvariantViolation);
  EXPECT_THROW(WeightVector({}), InvariantViolation);
  EXPECT_NO_THROW(WeightVector({0.3, 0.7}));
}

TEST(FrequencyConfig, FrequencyIsReciprocalOfPeriod) {
  const FrequencyConfig f(0.1, 7);
  EXPECT_NEAR(f.frequency() * 7 * 0.1, 1.0, 1e-12);
  EXPECT_THROW(FrequencyConfig(0.0, 1), std::invalid_argument);
  EXPECT_THROW(FrequencyConfig(1.0, 0), std::invalid_argument);
}

TEST(CompoundOutcomes, OneStepReproducesAtoms) {
  const auto model = testing::dominant_risky();
  const auto set = compound_outcomes(model, 1);
  ASSERT_EQ(set.size(), model.atom_count());
  for (std::size_t k = 0; k < set.size(); ++k) {
    EXPECT_EQ(set.probability(k), model.probability(k));
    for (std::size_t i = 0; i < model.asset_count(); ++i) {
      EXPECT_EQ(set.total_return(k)[i], 1.0 + model.ret(k, i));
    }
  }
}

TEST(CompoundOutcomes, TwoAtomsThreeSteps) {
  const auto model = testing::cash_and_risky(0.2, -0.1, 0.3);
  const auto set = compound_outcomes(model, 3);
  ASSERT_EQ(set.size(), 8u);
  // Hand enumeration: sequence index bits (first step most significant),
  // bit 0 = up (p 0.3, 1.2), bit 1 = down (p 0.7, 0.9).
  double sum = 0.0;
  for (std::size_t o = 0; o < 8; ++o) {
    const int downs = ((o >> 2) & 1) + ((o >> 1) & 1) + (o & 1);
    const double p = std::pow(0.3, 3 - downs) * std::pow(0.7, downs);
    const double growth = std::pow(1.2, 3 - downs) * std::pow(0.9, downs);
    EXPECT_NEAR(set.probability(o), p, 1e-15);
    EXPECT_NEAR(set.total_return(o)[1], growth, 1e-15);
    EXPECT_EQ(set.total_return(o)[0], 1.0);
    sum += set.probability(o);
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(CompoundOutcomes, BudgetExceededReportsCount) {
  ModelData d{{"a", "b"}, {}, std::vector<double>(10, 0.1), std::nullopt};
  for (int k = 0; k < 10; ++k) d.atoms.push_back({0.01 * k, -0.01 * k});
  const ReturnModel model(d);
  try {
    compound_outcomes(model, 12, 1'000'000'000);
    FAIL() << "expected BudgetExceeded";
  } catch (const BudgetExceeded& e) {
    EXPECT_NE(std::string(e.what()).find("10^12 = 1000000000000"), std::string::npos) << e.what();
    EXPECT_DOUBLE_EQ(static_cast<double>(e.outcome_count()), 1e12);
    EXPECT_EQ(e.budget(), 1'000'000'000u);
  }
}

TEST(CompoundOutcomes, CountSaturates) {
  EXPECT_EQ(outcome_count(10, 30), std::numeric_limits<std::uint64_t>::max());
  EXPECT_EQ(outcome_count(3, 4), 81u);
  EXPECT_THROW(compound_outcomes(testing::dominant_risky(), 0), std::invalid_argument);
}

// Property: n-step outcome sets carry the i.i.d. product moments, sum to
// one and are produced in the same order every time.
TEST(CompoundOutcomesProperty, ProductMomentsAndDeterminism) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 2 + trial % 3, s = 1 + trial % 4;
    const auto model = testing::random_test_model(rng, m, s);
    const int n = 1 + trial % 5;
    const auto set = compound_outcomes(model, n);
    ASSERT_EQ(set.size(), outcome_count(s, n));
    EXPECT_EQ(set, compound_outcomes(model, n));

    long double psum = 0.0L;
    std::vector<long double> moment(m, 0.0L);
    for (std::size_t o = 0; o < set.size(); ++o) {
      psum += set.probability(o);
      for (std::size_t i = 0; i < m; ++i) {
        EXPECT_GT(set.total_return(o)[i], 0.0);
        moment[i] += set.probability(o) * set.total_return(o)[i];
      }
    }
    EXPECT_NEAR(static_cast<double>(psum), 1.0, kOutcomeProbabilityTolerance);
    for (std::size_t i = 0; i < m; ++i) {
      long double mean = 0.0L;
      for (std::size_t k = 0; k < s; ++k) mean += model.probability(k) * (1.0L + model.ret(k, i));
      const double expected = std::pow(static_cast<double>(mean), n);
      EXPECT_NEAR(static_cast<double>(moment[i]) / expected, 1.0, 1e-9);
    }
  }
}

TEST(ReturnModel, DataRoundTrip) {
  const auto model = testing::dominant_risky();
  EXPECT_EQ(ReturnModel(model.data()), model);
  EXPECT_EQ(model.return_range(1), (std::pair<double, double>{-0.1, 0.2}));
}

}  // namespace
}  // namespace freqlog

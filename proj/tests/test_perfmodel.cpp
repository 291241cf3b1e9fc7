// SPDX-License-Identifier: Apache-2.0
#include "spirk/error.hpp"
#include "spirk/perfmodel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace spirk;

TEST(Predict, ClosedForms)
{
  EXPECT_DOUBLE_EQ(predict_irk({0.0, {1, 1, 1, 1}}), 4.0);
  EXPECT_DOUBLE_EQ(predict_irk({0.5, {1, 2, 3}}), 7.0);
  EXPECT_DOUBLE_EQ(predict_spirk({0.0, {1, 1, 1, 1}}), 1.0);
  EXPECT_DOUBLE_EQ(predict_spirk({0.5, {1, 2, 3}}), 4.0);
}

TEST(Predict, IterationForm)
{
  EXPECT_DOUBLE_EQ(predict_irk(iteration_model(0.0, {5, 5}, {1, 1})), 10.0);
  EXPECT_DOUBLE_EQ(predict_spirk(iteration_model(0.0, {12, 12, 13, 12}, {1, 1, 1, 1})), 13.0);
  EXPECT_DOUBLE_EQ(predict_irk(iteration_model(1.0, {2, 3}, {0.5, 2.0})), 9.0);
  EXPECT_THROW(iteration_model(0.0, {1, 2}, {1}), DimensionError);
}

TEST(Speedup, Examples)
{
  EXPECT_DOUBLE_EQ(speedup_bound({0.0, {2, 2, 2, 2}}), 4.0);
  EXPECT_DOUBLE_EQ(speedup_bound({0.0, {1, 2, 3}}), 2.0);
  EXPECT_DOUBLE_EQ(speedup_bound({0.0, {0, 0}}), 1.0);
}

TEST(Speedup, BoundedByStageCount)
{
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> qd(1, 16);
  std::uniform_real_distribution<double> cost(0.0, 10.0);
  std::bernoulli_distribution zero(0.1);
  for (int trial = 0; trial < 1000; ++trial)
  {
    CostModel m;
    m.t_basis = cost(rng);
    const int q = qd(rng);
    for (int i = 0; i < q; ++i)
      m.t_block.push_back(zero(rng) ? 0.0 : cost(rng));
    const double s = speedup_bound(m);
    EXPECT_GE(s, 1.0);
    EXPECT_LE(s, static_cast<double>(q) * (1.0 + 1e-15));
    EXPECT_GE(predict_irk(m), predict_spirk(m));
  }
}

TEST(Model, Validation)
{
  EXPECT_THROW(CostModel({0.0, {}}).validate(), ConfigError);
  EXPECT_THROW(CostModel({-1.0, {1}}).validate(), ConfigError);
  EXPECT_THROW(CostModel({0.0, {1, -2}}).validate(), ConfigError);
  EXPECT_THROW(CostModel({0.0, {std::numeric_limits<double>::infinity()}}).validate(), ConfigError);
  EXPECT_THROW(predict_irk({0.0, {}}), ConfigError);
}

TEST(Counters, SyntheticSchedule)
{
  const ScheduleRecord r{{10, 10, 20}, 20, 40, 9};
  const auto v = validate_against_counters({r});
  EXPECT_TRUE(v.consistent());
  EXPECT_EQ(v.groups, 3);
  EXPECT_DOUBLE_EQ(v.avg_vcycles_critical, 20.0);
  EXPECT_DOUBLE_EQ(v.predicted_speedup, 2.0);
}

TEST(Counters, UniformEightStageSchedule)
{
  std::vector<ScheduleRecord> steps;
  for (int s = 0; s < 10; ++s)
    steps.push_back({std::vector<double>(8, 12.9), 12.9, 8 * 12.9, 11.9});
  const auto v = validate_against_counters(steps, 103.1);
  EXPECT_NEAR(v.predicted_speedup, 103.1 / 12.9, 1e-12);
  EXPECT_NEAR(v.predicted_speedup, 8.0, 0.01);
  EXPECT_EQ(v.irk_entry, "11.9 (103.1)");
  EXPECT_EQ(v.spirk_entry, "11.9 (12.9)");
  // 8 x 12.9 = 103.2: rounded totals do not add up exactly.
  EXPECT_FALSE(v.consistent());
}

TEST(Counters, SingleStageHasNoSpeedup)
{
  const auto v = validate_against_counters({{{7}, 7, 7, 6}, {{5}, 5, 5, 4}}, 6.0);
  EXPECT_TRUE(v.consistent());
  EXPECT_DOUBLE_EQ(v.predicted_speedup, 1.0);
  EXPECT_DOUBLE_EQ(v.avg_iterations, 5.0);
  EXPECT_EQ(v.steps, 2);
}

TEST(Counters, MismatchesAreListed)
{
  const auto v = validate_against_counters({{{6, 6}, 7, 12, 5}, {{6, 6}, 6, 13, 5}}, 10.0);
  EXPECT_FALSE(v.consistent());
  EXPECT_EQ(v.mismatches.size(), 3u);
  EXPECT_THROW(validate_against_counters({}), ConfigError);
}

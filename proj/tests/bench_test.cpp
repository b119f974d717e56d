#include <gtest/gtest.h>

#include "taguchi/bench.hpp"
#include "test_support.hpp"

namespace taguchi {
namespace {

TEST(GridPoint, MixedRadixFirstFactorMostSignificant) {
  DesignSpace space({Factor::numeric("a", {"1", "2"}), Factor::numeric("b", {"1", "2", "3"})});
  EXPECT_EQ(grid_point(space, 0), (std::vector<LevelIndex>{1, 1}));
  EXPECT_EQ(grid_point(space, 2), (std::vector<LevelIndex>{1, 3}));
  EXPECT_EQ(grid_point(space, 3), (std::vector<LevelIndex>{2, 1}));
  EXPECT_EQ(grid_point(space, 5), (std::vector<LevelIndex>{2, 3}));
}

TEST(Bench, AdditiveFunctionHasZeroTaguchiRegret) {
  const auto space = testing::cifar10_space();
  BenchOptions options;
  options.function = {"additive", 5, 0.0};
  options.trials = 3;
  const auto result = run_bench(space, l16_table(), preset_single_error(), options);
  EXPECT_EQ(result.find("taguchi", 16).max_regret, 0.0);
  EXPECT_EQ(result.find("exhaustive", 1024).max_regret, 0.0);
  EXPECT_EQ(result.find("taguchi", 16).trials, 3u);
}

TEST(Bench, RandomAdditiveZeroRegretAcrossSeeds) {
  const auto space = testing::uniform_space(4, 3);
  BenchOptions options;
  options.function = {"random_additive", 100, 0.0};
  options.trials = 50;
  const auto result = run_bench(space, catalog_lookup(4, 3), preset_single_error(), options);
  EXPECT_EQ(result.find("taguchi", 9).zero_regret_fraction, 1.0);
}

TEST(Bench, FullBudgetRandomSearchHasZeroRegret) {
  const auto space = testing::uniform_space(3, 2);
  BenchOptions options;
  options.function = {"random_additive", 9, 0.0};
  options.trials = 10;
  options.random_budgets = {8};
  const auto result = run_bench(space, catalog_lookup(3, 2), preset_single_error(), options);
  EXPECT_EQ(result.find("random", 8).max_regret, 0.0);
}

TEST(Bench, RegretIsNonNegativeAndSeedsAdvance) {
  const auto space = testing::cifar10_space();
  BenchOptions options;
  options.function = {"cnn_surrogate", 11, 0.004};
  options.trials = 5;
  options.random_budgets = {16, 64};
  const auto result = run_bench(space, l16_table(), preset_error_and_time(0.8), options);
  EXPECT_EQ(result.rows.size(), 5u * 4u);
  for (const auto& row : result.rows) {
    EXPECT_GE(row.regret, 0.0);
    EXPECT_EQ(row.seed, 11u + row.trial);
  }
  EXPECT_EQ(bench_rows_csv(result), bench_rows_csv(run_bench(space, l16_table(), preset_error_and_time(0.8), options)));
  EXPECT_EQ(bench_summary_csv(result).substr(0, 15), "strategy,budget");
}

TEST(Bench, ExhaustiveRefusedAboveCap) {
  const auto space = testing::cifar10_space();
  BenchOptions options;
  options.trials = 1;
  options.exhaustive_cap = 1000;
  try {
    run_bench(space, l16_table(), preset_single_error(), options);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("cap"), std::string::npos);
  }
}

}  // namespace
}  // namespace taguchi

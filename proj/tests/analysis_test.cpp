#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "taguchi/analysis.hpp"
#include "taguchi/bench.hpp"
#include "taguchi/evaluator.hpp"
#include "test_support.hpp"

namespace taguchi {
namespace {

constexpr double kPrinted = 5e-4;  // the tables print 4 decimals

struct Fixture {
  ExperimentPlan experiment = plan(testing::cifar10_space(), l16_table());
  ReplayTable replay = load_replay(testing::fixture("cifar10_table2.csv"), experiment.space);
  std::vector<RunRecord> records = replay_records(replay, experiment);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

// Printed group means, level order 1..4, per factor; lr level 2 holds the
// recomputed value rather than the printed one.
struct Expected {
  std::string factor;
  std::vector<double> obj1;
  std::vector<double> obj2;
};

const std::vector<Expected>& expected_tables() {
  static const std::vector<Expected> tables = {
      {"lr", {0.0366, 0.0306, 0.0182, 0.0127}, {0.0293, 0.0246, 0.0146, 0.0102}},
      {"epochs", {0.0476, 0.0266, 0.0164, 0.0074}, {0.0381, 0.0213, 0.0132, 0.0060}},
      {"sampling", {0.0489, 0.0305, 0.0119, 0.0068}, {0.0391, 0.0245, 0.0096, 0.0055}},
      {"backbone", {0.0360, 0.0248, 0.0224, 0.0148}, {0.0288, 0.0199, 0.0180, 0.0119}},
      {"batch", {0.0257, 0.0169, 0.0206, 0.0348}, {0.0207, 0.0135, 0.0165, 0.0279}},
  };
  return tables;
}

std::vector<GroupTable> train_groups(const NormSpec& norm) {
  return group_means(fixture().experiment, fixture().records, norm, "train");
}

TEST(GroupMeans, MatchPrintedTables) {
  const auto obj1 = train_groups(preset_single_error());
  const auto obj2 = train_groups(preset_error_and_time(0.8));
  for (std::size_t k = 0; k < 5; ++k) {
    const auto& want = expected_tables()[k];
    ASSERT_EQ(obj1[k].factor, want.factor);
    for (std::size_t l = 0; l < 4; ++l) {
      EXPECT_NEAR(obj1[k].levels[l].mean, want.obj1[l], kPrinted) << want.factor << " level " << l + 1;
      EXPECT_NEAR(obj2[k].levels[l].mean, want.obj2[l], kPrinted) << want.factor << " level " << l + 1;
    }
  }
}

// The printed learning-rate table repeats the lr=0.01 row for lr=0.03. The
// mean over runs {1, 4, 5, 14} of the results table disagrees with it.
TEST(GroupMeans, LearningRateRowTypoInPrintedTable) {
  const auto table = testing::printed_table();
  const auto& runs = testing::lr_groups().at(2);
  const double oracle1 = testing::mean_of(table, runs, [](const auto& r) { return r.train_obj1; });
  const double oracle2 = testing::mean_of(table, runs, [](const auto& r) { return r.train_obj2; });
  EXPECT_NEAR(oracle1, 0.0306, kPrinted);
  EXPECT_NEAR(oracle2, 0.0246, kPrinted);

  const auto obj1 = train_groups(preset_single_error());
  const auto obj2 = train_groups(preset_error_and_time(0.8));
  const double computed1 = obj1[0].levels[1].mean;
  const double computed2 = obj2[0].levels[1].mean;
  EXPECT_NEAR(computed1, 0.0306, kPrinted);
  EXPECT_NEAR(computed2, 0.0246, kPrinted);

  const double printed1 = 0.0366;
  const double printed2 = 0.0293;
  EXPECT_GT(std::abs(computed1 - printed1), 5 * kPrinted);
  EXPECT_GT(std::abs(computed2 - printed2), 5 * kPrinted);
  // the printed pair is the lr=0.01 row
  EXPECT_NEAR(obj1[0].levels[0].mean, printed1, kPrinted);
  EXPECT_NEAR(obj2[0].levels[0].mean, printed2, kPrinted);
}

TEST(GroupMeans, MembershipsFollowTheArray) {
  const auto groups = train_groups(preset_single_error());
  for (const auto& [level, runs] : testing::lr_groups()) {
    const auto& members = groups[0].levels[static_cast<std::size_t>(level - 1)].members;
    EXPECT_EQ(members, std::vector<std::size_t>(runs.begin(), runs.end())) << "lr level " << level;
  }
}

TEST(GroupMeans, MatchIndependentMeanOfPrintedObjectives) {
  const auto table = testing::printed_table();
  const auto groups = train_groups(preset_error_and_time(0.8));
  for (const auto& [level, runs] : testing::lr_groups()) {
    const double oracle = testing::mean_of(table, runs, [](const auto& r) { return r.train_obj2; });
    EXPECT_NEAR(groups[0].levels[static_cast<std::size_t>(level - 1)].mean, oracle, kPrinted);
  }
}

TEST(GroupMeans, PartitionAndGrandMean) {
  const auto& f = fixture();
  const auto values = run_performance(f.experiment, f.records, preset_single_error(), "train");
  double grand = 0.0;
  for (double v : values) grand += v;
  grand /= static_cast<double>(values.size());
  for (const auto& table : group_means(f.experiment, values, "train")) {
    std::vector<std::size_t> all;
    double mean_of_means = 0.0;
    for (const auto& group : table.levels) {
      EXPECT_EQ(group.members.size(), 4u);
      all.insert(all.end(), group.members.begin(), group.members.end());
      mean_of_means += group.mean / 4.0;
    }
    std::sort(all.begin(), all.end());
    for (std::size_t r = 0; r < 16; ++r) EXPECT_EQ(all[r], r) << table.factor;
    EXPECT_NEAR(mean_of_means, grand, 1e-15) << table.factor;
  }
}

TEST(Optimum, FixtureHStarForBothObjectives) {
  for (const auto& norm : {preset_single_error(), preset_error_and_time(0.8)}) {
    const auto optimum = select_optimum(train_groups(norm));
    EXPECT_EQ(optimum_indices(optimum), (std::vector<LevelIndex>{4, 4, 4, 4, 2}));
    const auto h = realize(fixture().experiment.space, optimum_indices(optimum));
    EXPECT_EQ(h.at("lr").number, 0.1);
    EXPECT_EQ(h.at("epochs").number, 150.0);
    EXPECT_EQ(h.at("sampling").number, 1.0);
    EXPECT_EQ(h.at("backbone").text, "110");
    EXPECT_EQ(h.at("batch").number, 64.0);
    for (const auto& level : optimum) EXPECT_FALSE(level.tie);
  }
}

TEST(Importance, RangesAndRanksMatchPrintedTable) {
  const std::vector<double> obj1 = {0.0239, 0.0402, 0.0421, 0.0212, 0.0179};
  const std::vector<double> obj2 = {0.0191, 0.0321, 0.0336, 0.0169, 0.0144};
  const std::vector<std::size_t> ranks = {3, 2, 1, 4, 5};
  for (const auto& [norm, want] :
       {std::pair{preset_single_error(), obj1}, std::pair{preset_error_and_time(0.8), obj2}}) {
    const auto importance = variation_ranges(train_groups(norm));
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_NEAR(importance[k].range, want[k], 1e-3) << importance[k].factor;
      EXPECT_EQ(importance[k].rank, ranks[k]) << importance[k].factor;
      EXPECT_FALSE(importance[k].tie);
    }
  }
}

TEST(Importance, ConstantResponseTiesEverywhere) {
  const auto& f = fixture();
  const std::vector<double> flat(16, 0.05);
  const auto tables = group_means(f.experiment, flat, "train");
  for (const auto& level : select_optimum(tables)) {
    EXPECT_EQ(level.level, 1u);
    EXPECT_TRUE(level.tie);
  }
  const auto importance = variation_ranges(tables);
  for (std::size_t k = 0; k < importance.size(); ++k) {
    EXPECT_EQ(importance[k].range, 0.0);
    EXPECT_EQ(importance[k].rank, k + 1);
    EXPECT_TRUE(importance[k].tie);
  }
}

TEST(Analysis, InvariantUnderPositiveAffineMaps) {
  const auto& f = fixture();
  const auto base = run_performance(f.experiment, f.records, preset_error_and_time(0.8), "train");
  const auto base_tables = group_means(f.experiment, base, "train");
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = u(rng);
    const double b = u(rng) - 5.0;
    std::vector<double> mapped;
    for (double v : base) mapped.push_back(a * v + b);
    const auto tables = group_means(f.experiment, mapped, "train");
    EXPECT_EQ(optimum_indices(select_optimum(tables)), optimum_indices(select_optimum(base_tables)));
    const auto ranges = variation_ranges(tables);
    const auto base_ranges = variation_ranges(base_tables);
    for (std::size_t k = 0; k < ranges.size(); ++k) {
      EXPECT_EQ(ranges[k].rank, base_ranges[k].rank);
      EXPECT_NEAR(ranges[k].range, a * base_ranges[k].range, 1e-9 * a);
    }
  }
}

TEST(Analysis, MainEffectsExactForAdditiveResponses) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t levels = std::vector<std::size_t>{2, 3, 4, 5}[rng() % 4];
    const std::size_t max_k = std::min<std::size_t>(levels + 1, 5);
    const std::size_t k = 1 + rng() % max_k;
    const auto space = testing::uniform_space(k, levels);
    // independent effects table
    std::vector<std::vector<double>> effect(k, std::vector<double>(levels));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& row : effect) {
      for (auto& e : row) e = u(rng);
    }
    const auto experiment = plan(space, gf_construct(levels, k));
    std::vector<double> observed;
    for (const auto& run : experiment.runs) {
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) sum += effect[j][run.levels[j] - 1];
      observed.push_back(sum);
    }
    const auto selected = optimum_indices(select_optimum(group_means(experiment, observed, "train")));
    // brute force over the grid
    double best = std::numeric_limits<double>::infinity();
    std::vector<LevelIndex> argmin;
    for (std::uint64_t p = 0; p < grid_size(space); ++p) {
      const auto point = grid_point(space, p);
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) sum += effect[j][point[j] - 1];
      if (sum < best) {
        best = sum;
        argmin = point;
      }
    }
    EXPECT_EQ(selected, argmin) << "L=" << levels << " K=" << k;
  }
}

TEST(Analysis, IncompleteRecordsListMissingIds) {
  const auto& f = fixture();
  auto records = f.records;
  records.erase(records.begin() + 3);
  records.erase(records.begin() + 10);
  try {
    analyze(f.experiment, records, preset_single_error());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::incomplete);
    EXPECT_NE(std::string(e.what()).find("missing run_ids: 3 11"), std::string::npos) << e.what();
  }
  auto extra = f.records;
  extra.push_back(f.records.front());
  extra.back().run_id = 99;
  EXPECT_THROW(analyze(f.experiment, extra, preset_single_error()), Error);
}

TEST(Analysis, ReportCarriesEveryMetricSet) {
  const auto& f = fixture();
  AnalysisOptions options{"obj2", {"train", "test"}, "train"};
  const auto report = analyze(f.experiment, f.records, preset_error_and_time(0.8), options);
  ASSERT_EQ(report.groups.size(), 2u);
  EXPECT_EQ(optimum_indices(report.optimum), (std::vector<LevelIndex>{4, 4, 4, 4, 2}));
  const auto table = testing::printed_table();
  for (std::size_t r = 0; r < 16; ++r) {
    EXPECT_NEAR(report.performance.at("train")[r], table[r].second.train_obj2, kPrinted);
    EXPECT_NEAR(report.performance.at("test")[r], table[r].second.test_obj2, kPrinted);
  }
  const auto text = render_text(report);
  EXPECT_NE(text.find("0.0191"), std::string::npos);
  EXPECT_NE(text.find("sampling"), std::string::npos);
  const auto json = to_json(report);
  EXPECT_EQ(json["objective"], "obj2");
}

TEST(Confirm, FixtureConfirmationDominates) {
  const auto& f = fixture();
  AnalysisOptions options{"obj1", {"train", "test"}, "train"};
  for (const auto& [label, norm] : {std::pair{std::string("obj1"), preset_single_error()},
                                    std::pair{std::string("obj2"), preset_error_and_time(0.8)}}) {
    options.objective = label;
    const auto report = analyze(f.experiment, f.records, norm, options);
    const auto outcomes = confirm(report, f.experiment.space, norm, f.replay.confirmations.at(label));
    ASSERT_EQ(outcomes.size(), 2u);
    for (const auto& outcome : outcomes) {
      EXPECT_TRUE(outcome.beats_all) << label << " " << outcome.metric_set;
      EXPECT_FALSE(outcome.ties_best);
    }
    EXPECT_EQ(outcomes[0].best_run_id, 8u);
  }
}

TEST(Confirm, IdenticalToBestRunIsATie) {
  const auto& f = fixture();
  const auto norm = preset_single_error();
  const auto report = analyze(f.experiment, f.records, norm);
  RunRecord record = f.records[8];
  record.assignment = realize(f.experiment.space, optimum_indices(report.optimum));
  const auto outcomes = confirm(report, f.experiment.space, norm, record);
  EXPECT_TRUE(outcomes[0].ties_best);
  EXPECT_FALSE(outcomes[0].beats_all);
}

TEST(Confirm, WrongAssignmentShowsDiff) {
  const auto& f = fixture();
  const auto norm = preset_single_error();
  const auto report = analyze(f.experiment, f.records, norm);
  try {
    confirm(report, f.experiment.space, norm, f.records[0]);
    FAIL();
  } catch (const Error& e) {
    const std::string message = e.what();
    EXPECT_NE(message.find("lr: expected 0.1, got 0.01"), std::string::npos) << message;
    EXPECT_NE(message.find("batch: expected 64, got 256"), std::string::npos) << message;
    EXPECT_EQ(message.find("epochs"), std::string::npos) << message;
  }
}

}  // namespace
}  // namespace taguchi

#pragma once

// Seeded comparison of Taguchi selection against random search with the same
// number of evaluations and against exhaustive enumeration, on synthetic
// functions whose noise-free value is known everywhere.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "taguchi/analysis.hpp"
#include "taguchi/csv.hpp"
#include "taguchi/design_space.hpp"
#include "taguchi/objective.hpp"
#include "taguchi/orthogonal_array.hpp"
#include "taguchi/synthetic.hpp"

namespace taguchi {

inline constexpr std::uint64_t kDefaultExhaustiveCap = 1'000'000;

/// Mixed-radix decoding of a grid position into 1-based level indices, first
/// factor most significant.
inline std::vector<LevelIndex> grid_point(const DesignSpace& space, std::uint64_t position) {
  std::vector<LevelIndex> levels(space.size());
  for (std::size_t k = space.size(); k-- > 0;) {
    const auto count = space.factor(k).level_count();
    levels[k] = position % count + 1;
    position /= count;
  }
  return levels;
}

/// Noise-free J at every grid point, in grid_point order.
inline std::vector<double> exhaustive_performance(const DesignSpace& space,
                                                  const SyntheticSpec& function,
                                                  const NormSpec& norm,
                                                  const std::string& metric_set,
                                                  std::uint64_t cap = kDefaultExhaustiveCap) {
  const auto size = grid_size(space);
  if (size > cap) {
    fail_validation("exhaustive enumeration of " + std::to_string(size) +
                    " grid points exceeds the cap of " + std::to_string(cap));
  }
  std::vector<double> values(size);
  for (std::uint64_t i = 0; i < size; ++i) {
    const auto levels = grid_point(space, i);
    values[i] = aggregate(norm, synthetic_truth(function, space, levels).at(metric_set));
  }
  return values;
}

/// H* from one orthogonal experiment on noisy synthetic observations.
inline std::vector<LevelIndex> taguchi_select(const ExperimentPlan& plan,
                                              const SyntheticSpec& function, const NormSpec& norm,
                                              const std::string& metric_set) {
  std::vector<double> observed;
  observed.reserve(plan.runs.size());
  for (const auto& run : plan.runs) {
    observed.push_back(aggregate(
        norm, synthetic_observe(function, plan.space, run.levels, run.run_id).at(metric_set)));
  }
  return optimum_indices(select_optimum(group_means(plan, observed, metric_set)));
}

/// Best observed point among `budget` distinct grid points drawn uniformly.
inline std::vector<LevelIndex> random_select(const DesignSpace& space,
                                             const SyntheticSpec& function, const NormSpec& norm,
                                             const std::string& metric_set, std::size_t budget) {
  const auto size = grid_size(space);
  budget = static_cast<std::size_t>(std::min<std::uint64_t>(budget, size));
  std::mt19937_64 rng(mix_seed(function.seed ^ 0x72616e646f6dULL));
  std::vector<std::uint64_t> chosen;
  if (size <= 4 * budget) {
    std::vector<std::uint64_t> all(size);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(budget));
  } else {
    std::uniform_int_distribution<std::uint64_t> pick(0, size - 1);
    while (chosen.size() < budget) {
      auto candidate = pick(rng);
      if (std::find(chosen.begin(), chosen.end(), candidate) == chosen.end()) {
        chosen.push_back(candidate);
      }
    }
  }
  std::vector<LevelIndex> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const auto levels = grid_point(space, chosen[i]);
    const double value =
        aggregate(norm, synthetic_observe(function, space, levels, i).at(metric_set));
    if (value < best_value) {
      best_value = value;
      best = levels;
    }
  }
  return best;
}

struct BenchOptions {
  SyntheticSpec function{"cnn_surrogate", 1, 0.0};  // seed is the base seed
  std::size_t trials = 100;
  std::vector<std::size_t> random_budgets;  // empty: the array's run count
  std::string metric_set = "train";
  std::uint64_t exhaustive_cap = kDefaultExhaustiveCap;
};

struct BenchRow {
  std::size_t trial;
  std::string strategy;
  std::size_t budget;
  std::uint64_t seed;
  std::vector<LevelIndex> selected;
  double true_performance;
  double regret;
};

struct BenchSummary {
  std::string strategy;
  std::size_t budget;
  std::size_t trials;
  double mean_regret;
  double max_regret;
  double zero_regret_fraction;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<BenchSummary> summary;

  const BenchSummary& find(const std::string& strategy, std::size_t budget) const {
    for (const auto& s : summary) {
      if (s.strategy == strategy && s.budget == budget) return s;
    }
    fail_validation("no bench summary for " + strategy + " at budget " + std::to_string(budget));
  }
};

/// Trial t uses seed = base seed + t for both the function (random_additive
/// draws a new function per trial) and the observation noise.
inline BenchResult run_bench(const DesignSpace& space, const OrthogonalArray& array,
                             const NormSpec& norm, const BenchOptions& options) {
  const auto plan_rows = plan(space, array);
  const auto budgets =
      options.random_budgets.empty() ? std::vector<std::size_t>{array.runs()} : options.random_budgets;
  const auto size = grid_size(space);
  const bool seed_changes_function = options.function.function == "random_additive";

  BenchResult result;
  std::vector<double> truth;
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    SyntheticSpec function = options.function;
    function.seed = options.function.seed + trial;
    if (truth.empty() || seed_changes_function) {
      truth = exhaustive_performance(space, function, norm, options.metric_set,
                                     options.exhaustive_cap);
    }
    const auto best = std::min_element(truth.begin(), truth.end());
    const double optimum = *best;

    auto true_value = [&](const std::vector<LevelIndex>& levels) {
      return aggregate(norm, synthetic_truth(function, space, levels).at(options.metric_set));
    };
    auto add = [&](std::string strategy, std::size_t budget, std::vector<LevelIndex> selected) {
      const double value = true_value(selected);
      result.rows.push_back(
          {trial, std::move(strategy), budget, function.seed, std::move(selected), value,
           value - optimum});
    };

    add("taguchi", array.runs(), taguchi_select(plan_rows, function, norm, options.metric_set));
    for (auto budget : budgets) {
      add("random", budget, random_select(space, function, norm, options.metric_set, budget));
    }
    add("exhaustive", static_cast<std::size_t>(size),
        grid_point(space, static_cast<std::uint64_t>(best - truth.begin())));
  }

  std::vector<std::pair<std::string, std::size_t>> keys = {{"taguchi", array.runs()}};
  for (auto budget : budgets) keys.emplace_back("random", budget);
  keys.emplace_back("exhaustive", static_cast<std::size_t>(size));
  for (const auto& [strategy, budget] : keys) {
    BenchSummary s{strategy, budget, 0, 0.0, 0.0, 0.0};
    std::size_t zero = 0;
    for (const auto& row : result.rows) {
      if (row.strategy != strategy || row.budget != budget) continue;
      ++s.trials;
      s.mean_regret += row.regret;
      s.max_regret = std::max(s.max_regret, row.regret);
      if (row.regret == 0.0) ++zero;
    }
    if (s.trials) {
      s.mean_regret /= static_cast<double>(s.trials);
      s.zero_regret_fraction = static_cast<double>(zero) / static_cast<double>(s.trials);
    }
    result.summary.push_back(s);
  }
  return result;
}

inline std::string bench_rows_csv(const BenchResult& result) {
  std::string out = "trial,strategy,budget,seed,selected,true_j,regret\n";
  for (const auto& row : result.rows) {
    std::string selected;
    for (auto level : row.selected) selected += (selected.empty() ? "" : " ") + std::to_string(level);
    out += csv::format_row({std::to_string(row.trial), row.strategy, std::to_string(row.budget),
                            std::to_string(row.seed), selected,
                            csv::format_number(row.true_performance),
                            csv::format_number(row.regret)}) +
           "\n";
  }
  return out;
}

inline std::string bench_summary_csv(const BenchResult& result) {
  std::string out = "strategy,budget,trials,mean_regret,max_regret,zero_regret_fraction\n";
  for (const auto& s : result.summary) {
    out += csv::format_row({s.strategy, std::to_string(s.budget), std::to_string(s.trials),
                            csv::format_number(s.mean_regret), csv::format_number(s.max_regret),
                            csv::format_number(s.zero_regret_fraction)}) +
           "\n";
  }
  return out;
}

}  // namespace taguchi

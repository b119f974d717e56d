#pragma once

// Main-effects analysis of a completed orthogonal experiment: per-factor
// per-level group means of J, level selection, variation-range importance
// ranking and the confirmation-run comparison.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "taguchi/design_space.hpp"
#include "taguchi/error.hpp"
#include "taguchi/objective.hpp"
#include "taguchi/orthogonal_array.hpp"

namespace taguchi {

/// Relative tolerance under which two group means (or two ranges) count as tied.
inline constexpr double kTieTolerance = 1e-12;

inline bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= kTieTolerance * std::max(std::abs(a), std::abs(b));
}

struct LevelGroup {
  LevelIndex level;
  LevelValue value;
  std::vector<std::size_t> members;  // run ids
  double mean = 0.0;
};

struct GroupTable {
  std::string factor;
  std::string metric_set;
  std::vector<LevelGroup> levels;
};

struct OptimumLevel {
  std::string factor;
  LevelIndex level;
  LevelValue value;
  bool tie = false;
};

struct FactorImportance {
  std::string factor;
  double range = 0.0;
  std::size_t rank = 0;  // 1 = largest range
  bool tie = false;
};

/// Records in plan order. Throws ErrorKind::incomplete when any plan run is
/// missing or duplicated, and a validation error when a record belongs to no
/// plan run or disagrees with the plan's assignment.
inline std::vector<const RunRecord*> match_records(const ExperimentPlan& plan,
                                                   const std::vector<RunRecord>& records) {
  std::map<std::size_t, std::vector<const RunRecord*>> by_id;
  for (const auto& record : records) by_id[record.run_id].push_back(&record);

  std::vector<std::size_t> missing;
  std::vector<std::size_t> duplicated;
  std::vector<const RunRecord*> ordered;
  std::set<std::size_t> planned;
  for (const auto& run : plan.runs) {
    planned.insert(run.run_id);
    auto it = by_id.find(run.run_id);
    if (it == by_id.end()) {
      missing.push_back(run.run_id);
      continue;
    }
    if (it->second.size() > 1) duplicated.push_back(run.run_id);
    const RunRecord* record = it->second.front();
    if (!(record->assignment == run.assignment)) {
      fail_validation("record for run " + std::to_string(run.run_id) +
                      " does not match the planned assignment");
    }
    ordered.push_back(record);
  }
  for (const auto& [id, list] : by_id) {
    if (!planned.count(id)) {
      fail_validation("record for run " + std::to_string(id) + " is not part of the plan");
    }
  }
  if (!missing.empty() || !duplicated.empty()) {
    auto join = [](const std::vector<std::size_t>& ids) {
      std::string text;
      for (auto id : ids) text += (text.empty() ? "" : " ") + std::to_string(id);
      return text;
    };
    std::string message = "incomplete run records";
    if (!missing.empty()) message += "; missing run_ids: " + join(missing);
    if (!duplicated.empty()) message += "; duplicated run_ids: " + join(duplicated);
    throw Error(ErrorKind::incomplete, message);
  }
  return ordered;
}

/// J per plan run (plan order) on one metric set.
inline std::vector<double> run_performance(const ExperimentPlan& plan,
                                           const std::vector<RunRecord>& records,
                                           const NormSpec& norm, const std::string& metric_set) {
  std::vector<double> values;
  for (const auto* record : match_records(plan, records)) {
    values.push_back(performance(norm, *record, metric_set));
  }
  return values;
}

/// Group means from precomputed J values, one entry per plan run in plan order.
inline std::vector<GroupTable> group_means(const ExperimentPlan& plan,
                                           const std::vector<double>& performance_by_run,
                                           const std::string& metric_set) {
  if (performance_by_run.size() != plan.runs.size()) {
    fail_validation("expected " + std::to_string(plan.runs.size()) + " performance values, got " +
                    std::to_string(performance_by_run.size()));
  }
  std::vector<GroupTable> tables;
  for (std::size_t k = 0; k < plan.space.size(); ++k) {
    const auto& factor = plan.space.factor(k);
    GroupTable table{factor.name(), metric_set, {}};
    for (LevelIndex l = 1; l <= factor.level_count(); ++l) {
      LevelGroup group{l, factor.level(l), {}, 0.0};
      double sum = 0.0;
      for (std::size_t r = 0; r < plan.runs.size(); ++r) {
        if (plan.level(r, k) == l) {
          group.members.push_back(plan.runs[r].run_id);
          sum += performance_by_run[r];
        }
      }
      if (group.members.empty()) {
        fail_validation("level " + std::to_string(l) + " of factor '" + factor.name() +
                        "' never occurs in the plan");
      }
      group.mean = sum / static_cast<double>(group.members.size());
      table.levels.push_back(std::move(group));
    }
    tables.push_back(std::move(table));
  }
  return tables;
}

inline std::vector<GroupTable> group_means(const ExperimentPlan& plan,
                                           const std::vector<RunRecord>& records,
                                           const NormSpec& norm, const std::string& metric_set) {
  return group_means(plan, run_performance(plan, records, norm, metric_set), metric_set);
}

/// Per factor, the level with the smallest group mean. Ties go to the lowest
/// level index and are flagged.
inline std::vector<OptimumLevel> select_optimum(const std::vector<GroupTable>& tables) {
  std::vector<OptimumLevel> optimum;
  for (const auto& table : tables) {
    const LevelGroup* best = &table.levels.front();
    for (const auto& group : table.levels) {
      if (group.mean < best->mean && !nearly_equal(group.mean, best->mean)) best = &group;
    }
    bool tie = false;
    for (const auto& group : table.levels) {
      if (&group != best && nearly_equal(group.mean, best->mean)) tie = true;
    }
    optimum.push_back({table.factor, best->level, best->value, tie});
  }
  return optimum;
}

inline std::vector<LevelIndex> optimum_indices(const std::vector<OptimumLevel>& optimum) {
  std::vector<LevelIndex> indices;
  for (const auto& level : optimum) indices.push_back(level.level);
  return indices;
}

/// range = max - min of a factor's group means; rank 1 goes to the largest
/// range, equal ranges keep factor order and are flagged.
inline std::vector<FactorImportance> variation_ranges(const std::vector<GroupTable>& tables) {
  std::vector<FactorImportance> result;
  for (const auto& table : tables) {
    auto [lo, hi] = std::minmax_element(
        table.levels.begin(), table.levels.end(),
        [](const LevelGroup& a, const LevelGroup& b) { return a.mean < b.mean; });
    result.push_back({table.factor, hi->mean - lo->mean, 0, false});
  }
  std::vector<std::size_t> order(result.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result[a].range > result[b].range && !nearly_equal(result[a].range, result[b].range);
  });
  for (std::size_t position = 0; position < order.size(); ++position) {
    result[order[position]].rank = position + 1;
  }
  for (std::size_t a = 0; a < result.size(); ++a) {
    for (std::size_t b = 0; b < result.size(); ++b) {
      if (a != b && nearly_equal(result[a].range, result[b].range)) result[a].tie = true;
    }
  }
  return result;
}

// Reports --------------------------------------------------------------------

struct ConfirmationOutcome {
  std::string metric_set;
  double confirmed = 0.0;      // J(H*)
  double best_run = 0.0;       // smallest J among the orthogonal runs
  std::size_t best_run_id = 0;
  bool beats_all = false;      // strictly better than every run
  bool ties_best = false;
};

struct AnalysisReport {
  std::string objective;
  nlohmann::ordered_json norm;
  std::string selection_metric_set;
  std::vector<std::string> metric_sets;
  std::vector<std::size_t> run_ids;
  std::map<std::string, std::vector<double>> performance;  // per metric set, plan order
  std::map<std::string, std::vector<GroupTable>> groups;   // per metric set
  std::vector<OptimumLevel> optimum;
  std::vector<FactorImportance> importance;
  std::vector<ConfirmationOutcome> confirmation;

  const std::vector<GroupTable>& selection_groups() const {
    return groups.at(selection_metric_set);
  }
};

struct AnalysisOptions {
  std::string objective = "objective";
  std::vector<std::string> metric_sets = {"train"};
  std::string selection_metric_set = "train";
};

/// Group tables for every metric set; H* and importance from the selection set.
inline AnalysisReport analyze(const ExperimentPlan& plan, const std::vector<RunRecord>& records,
                              const NormSpec& norm, const AnalysisOptions& options = {}) {
  AnalysisReport report;
  report.objective = options.objective;
  report.norm = to_json(norm);
  report.selection_metric_set = options.selection_metric_set;
  report.metric_sets = options.metric_sets;
  if (std::find(report.metric_sets.begin(), report.metric_sets.end(),
                options.selection_metric_set) == report.metric_sets.end()) {
    report.metric_sets.insert(report.metric_sets.begin(), options.selection_metric_set);
  }
  match_records(plan, records);
  for (const auto& run : plan.runs) report.run_ids.push_back(run.run_id);
  for (const auto& set : report.metric_sets) {
    auto values = run_performance(plan, records, norm, set);
    report.groups[set] = group_means(plan, values, set);
    report.performance[set] = std::move(values);
  }
  report.optimum = select_optimum(report.selection_groups());
  report.importance = variation_ranges(report.selection_groups());
  return report;
}

/// Compares the confirmation run at H* against every orthogonal run, per
/// metric set. The record's assignment must be H*.
inline std::vector<ConfirmationOutcome> confirm(const AnalysisReport& report,
                                                const DesignSpace& space, const NormSpec& norm,
                                                const RunRecord& confirmation) {
  const auto expected = realize(space, optimum_indices(report.optimum));
  if (!(confirmation.assignment == expected)) {
    std::string diff;
    for (const auto& factor : space.factors()) {
      const auto& want = expected.at(factor.name());
      const auto* got = confirmation.assignment.find(factor.name());
      if (!got || !(*got == want)) {
        diff += "\n  " + factor.name() + ": expected " + want.text + ", got " +
                (got ? got->text : std::string("<missing>"));
      }
    }
    if (diff.empty()) diff = "\n  unexpected extra factors in the confirmation assignment";
    fail_validation("confirmation assignment differs from H*:" + diff);
  }
  std::vector<ConfirmationOutcome> outcomes;
  for (const auto& set : report.metric_sets) {
    const auto& values = report.performance.at(set);
    auto best = std::min_element(values.begin(), values.end());
    ConfirmationOutcome outcome;
    outcome.metric_set = set;
    outcome.confirmed = performance(norm, confirmation, set);
    outcome.best_run = *best;
    outcome.best_run_id = report.run_ids[static_cast<std::size_t>(best - values.begin())];
    outcome.ties_best = nearly_equal(outcome.confirmed, outcome.best_run);
    outcome.beats_all = outcome.confirmed < outcome.best_run && !outcome.ties_best;
    outcomes.push_back(outcome);
  }
  return outcomes;
}

// Rendering ------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const AnalysisReport& report) {
  auto groups = nlohmann::ordered_json::object();
  for (const auto& set : report.metric_sets) {
    auto tables = nlohmann::ordered_json::array();
    for (const auto& table : report.groups.at(set)) {
      auto levels = nlohmann::ordered_json::array();
      for (const auto& group : table.levels) {
        levels.push_back({{"level", group.level},
                          {"value", group.value.text},
                          {"members", group.members},
                          {"mean", group.mean}});
      }
      tables.push_back({{"factor", table.factor}, {"levels", std::move(levels)}});
    }
    groups[set] = std::move(tables);
  }
  auto performance = nlohmann::ordered_json::object();
  for (const auto& set : report.metric_sets) performance[set] = report.performance.at(set);

  auto optimum = nlohmann::ordered_json::array();
  for (const auto& level : report.optimum) {
    optimum.push_back({{"factor", level.factor},
                       {"level", level.level},
                       {"value", level.value.text},
                       {"tie", level.tie}});
  }
  auto importance = nlohmann::ordered_json::array();
  for (const auto& item : report.importance) {
    importance.push_back(
        {{"factor", item.factor}, {"range", item.range}, {"rank", item.rank}, {"tie", item.tie}});
  }
  nlohmann::ordered_json document = {{"objective", report.objective},
                                     {"norm", report.norm},
                                     {"selection_metric_set", report.selection_metric_set},
                                     {"metric_sets", report.metric_sets},
                                     {"run_ids", report.run_ids},
                                     {"performance", std::move(performance)},
                                     {"groups", std::move(groups)},
                                     {"optimum", std::move(optimum)},
                                     {"importance", std::move(importance)}};
  if (!report.confirmation.empty()) {
    auto confirmation = nlohmann::ordered_json::array();
    for (const auto& outcome : report.confirmation) {
      confirmation.push_back({{"metric_set", outcome.metric_set},
                              {"confirmed", outcome.confirmed},
                              {"best_run", outcome.best_run},
                              {"best_run_id", outcome.best_run_id},
                              {"beats_all", outcome.beats_all},
                              {"ties_best", outcome.ties_best}});
    }
    document["confirmation"] = std::move(confirmation);
  }
  return document;
}

inline std::string fixed4(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", value);
  return buffer;
}

namespace detail {

inline std::string pad(const std::string& text, std::size_t width) {
  return text.size() >= width ? text : text + std::string(width - text.size(), ' ');
}

/// Left-aligned columns separated by two spaces.
inline std::string render_columns(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line += i + 1 == row.size() ? row[i] : pad(row[i], widths[i] + 2);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace detail

/// Human-readable report: one group table per factor (runs listed by level,
/// group averages on each level's first row), then H* and the range/rank table.
inline std::string render_text(const AnalysisReport& report) {
  std::string out = "Objective: " + report.objective + " (selection on " +
                    report.selection_metric_set + ")\n";
  std::map<std::size_t, std::size_t> position;
  for (std::size_t i = 0; i < report.run_ids.size(); ++i) position[report.run_ids[i]] = i;

  const auto& selection = report.selection_groups();
  for (std::size_t k = 0; k < selection.size(); ++k) {
    out += "\nFactor " + std::to_string(k + 1) + ": " + selection[k].factor + "\n";
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header = {"run", selection[k].factor};
    for (const auto& set : report.metric_sets) header.push_back("J(" + set + ")");
    for (const auto& set : report.metric_sets) header.push_back("avg J(" + set + ")");
    rows.push_back(header);
    for (std::size_t l = 0; l < selection[k].levels.size(); ++l) {
      const auto& group = selection[k].levels[l];
      for (std::size_t m = 0; m < group.members.size(); ++m) {
        std::vector<std::string> row = {std::to_string(group.members[m]), group.value.text};
        for (const auto& set : report.metric_sets) {
          row.push_back(fixed4(report.performance.at(set)[position[group.members[m]]]));
        }
        for (const auto& set : report.metric_sets) {
          row.push_back(m == 0 ? fixed4(report.groups.at(set)[k].levels[l].mean) : "");
        }
        rows.push_back(std::move(row));
      }
    }
    out += detail::render_columns(rows);
  }

  out += "\nSuggested optimum H*:\n";
  std::vector<std::vector<std::string>> optimum_rows = {{"factor", "level", "value", "tie"}};
  for (const auto& level : report.optimum) {
    optimum_rows.push_back(
        {level.factor, std::to_string(level.level), level.value.text, level.tie ? "yes" : ""});
  }
  out += detail::render_columns(optimum_rows);

  out += "\nImportance (variation range of group means, " + report.selection_metric_set + "):\n";
  std::vector<std::vector<std::string>> rank_rows = {{"factor", "range", "rank", "tie"}};
  for (const auto& item : report.importance) {
    rank_rows.push_back(
        {item.factor, fixed4(item.range), std::to_string(item.rank), item.tie ? "yes" : ""});
  }
  out += detail::render_columns(rank_rows);

  if (!report.confirmation.empty()) {
    out += "\nConfirmation at H*:\n";
    std::vector<std::vector<std::string>> rows = {
        {"metric_set", "J(H*)", "best run", "best J", "verdict"}};
    for (const auto& outcome : report.confirmation) {
      rows.push_back({outcome.metric_set, fixed4(outcome.confirmed),
                      std::to_string(outcome.best_run_id), fixed4(outcome.best_run),
                      outcome.beats_all ? "beats all runs"
                                        : (outcome.ties_best ? "ties best run" : "does not beat all runs")});
    }
    out += detail::render_columns(rows);
  }
  return out;
}

}  // namespace taguchi

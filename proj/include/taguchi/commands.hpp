#pragma once

// Implementations of the command-line subcommands. Each returns the process
// exit code; validation problems surface as taguchi::Error.
//
// Output directory layout:
//   plan.csv, plan.json
//   records/<run_id>.json, records.csv
//   confirmations/<label>.json
//   analysis/<objective>.json, analysis/<objective>.txt
//   analysis/<objective>.confirm.json, analysis/<objective>.confirm.txt

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "taguchi/analysis.hpp"
#include "taguchi/bench.hpp"
#include "taguchi/config.hpp"
#include "taguchi/csv.hpp"
#include "taguchi/design_space.hpp"
#include "taguchi/evaluator.hpp"
#include "taguchi/objective.hpp"
#include "taguchi/orthogonal_array.hpp"

namespace taguchi::cli {

namespace fs = std::filesystem;

inline void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_validation("cannot write '" + path.string() + "'");
  out << content;
}

inline std::string dump(const nlohmann::ordered_json& document) { return document.dump(2) + "\n"; }

inline fs::path plan_path(const ProjectConfig& config) { return fs::path(config.output_dir) / "plan.json"; }
inline fs::path records_dir(const ProjectConfig& config) { return fs::path(config.output_dir) / "records"; }
inline fs::path record_path(const ProjectConfig& config, std::size_t run_id) {
  return records_dir(config) / (std::to_string(run_id) + ".json");
}
inline fs::path confirmation_path(const ProjectConfig& config, const std::string& label) {
  return fs::path(config.output_dir) / "confirmations" / (label + ".json");
}
inline fs::path analysis_path(const ProjectConfig& config, const std::string& objective,
                              const std::string& suffix) {
  return fs::path(config.output_dir) / "analysis" / (objective + suffix);
}

inline ExperimentPlan load_plan(const ProjectConfig& config) {
  const auto path = plan_path(config);
  if (!fs::exists(path)) fail_validation("no plan at '" + path.string() + "'; run `plan` first");
  try {
    return plan_from_json(nlohmann::json::parse(csv::read_file(path.string())));
  } catch (const nlohmann::json::exception& e) {
    fail_validation("plan '" + path.string() + "': " + e.what());
  }
}

inline RunRecord load_record(const fs::path& path, const DesignSpace& space) {
  try {
    return record_from_json(nlohmann::json::parse(csv::read_file(path.string())), space);
  } catch (const nlohmann::json::exception& e) {
    fail_validation("record '" + path.string() + "': " + e.what());
  }
}

/// Records present on disk for the plan's runs.
inline std::vector<RunRecord> load_records(const ProjectConfig& config, const ExperimentPlan& plan) {
  std::vector<RunRecord> records;
  for (const auto& run : plan.runs) {
    const auto path = record_path(config, run.run_id);
    if (fs::exists(path)) records.push_back(load_record(path, plan.space));
  }
  return records;
}

inline std::string records_csv(const ExperimentPlan& plan, const std::vector<RunRecord>& records) {
  std::set<std::pair<std::string, std::string>> columns;
  for (const auto& record : records) {
    for (const auto& [set, values] : record.measurements) {
      for (const auto& [name, value] : values) columns.emplace(set, name);
    }
  }
  csv::Row header{"run_id"};
  for (const auto& factor : plan.space.factors()) header.push_back(factor.name());
  for (const auto& [set, name] : columns) header.push_back(set + "." + name);
  std::string out = csv::format_row(header) + "\n";
  for (const auto& record : records) {
    csv::Row row{std::to_string(record.run_id)};
    for (const auto& factor : plan.space.factors()) {
      row.push_back(record.assignment.at(factor.name()).text);
    }
    for (const auto& [set, name] : columns) {
      auto s = record.measurements.find(set);
      if (s == record.measurements.end() || !s->second.count(name)) {
        row.emplace_back();
      } else {
        row.push_back(csv::format_number(s->second.at(name)));
      }
    }
    out += csv::format_row(row) + "\n";
  }
  return out;
}

// plan -----------------------------------------------------------------------

inline int cmd_plan(const ProjectConfig& config, std::ostream& out) {
  const auto space = load_design_space(config.space_path);
  const auto array = select_array(config.array, space);
  const auto experiment = plan(space, array);
  write_file(fs::path(config.output_dir) / "plan.csv", plan_to_csv(experiment));
  write_file(plan_path(config), dump(to_json(experiment)));
  const auto runs = experiment.runs.size();
  const auto grid = grid_size(space);
  out << "array " << array.name() << " (" << array.runs() << " runs, " << array.columns()
      << " columns, " << array.levels() << " levels)\n";
  out << "R=" << runs << ", N=" << grid << ", saved=" << (grid > runs ? grid - runs : 0) << "\n";
  out << "min_runs=" << min_runs(space) << "\n";
  return 0;
}

// run ------------------------------------------------------------------------

inline int cmd_run(const ProjectConfig& config, bool force, std::ostream& out) {
  const auto experiment = load_plan(config);
  if (experiment.runs.empty()) fail_validation("the plan has no runs");
  if (!config.evaluator) fail_validation("config has no evaluator");

  ExperimentPlan pending{experiment.space, experiment.array_name, experiment.array_levels, {}};
  std::size_t skipped = 0;
  for (const auto& run : experiment.runs) {
    if (!force && fs::exists(record_path(config, run.run_id))) {
      ++skipped;
    } else {
      pending.runs.push_back(run);
    }
  }

  EvaluationResult result;
  if (const auto* replay = std::get_if<ReplaySpec>(&*config.evaluator)) {
    const auto table = load_replay(replay->path, experiment.space);
    const auto all = replay_records(table, experiment);
    for (const auto& run : pending.runs) result.records.push_back(all.at(run.run_id));
    for (const auto& [label, record] : table.confirmations) {
      RunRecord confirmation = record;
      confirmation.run_id = experiment.runs.size();
      const auto path = confirmation_path(config, label);
      if (force || !fs::exists(path)) write_file(path, dump(to_json(confirmation)));
    }
    if (!table.confirmations.empty()) {
      out << "confirmation records: " << table.confirmations.size() << "\n";
    }
  } else if (!pending.runs.empty()) {
    result = parallel_evaluate(*config.evaluator, pending, config.max_in_flight);
  }

  for (const auto& record : result.records) {
    write_file(record_path(config, record.run_id), dump(to_json(record)));
  }
  const auto records = load_records(config, experiment);
  write_file(fs::path(config.output_dir) / "records.csv", records_csv(experiment, records));

  out << "evaluated " << result.records.size() << ", skipped " << skipped << ", failed "
      << result.failures.size() << "\n";
  for (const auto& failure : result.failures) {
    out << "  run " << failure.run_id << ": " << failure.reason << "\n";
  }
  if (!result.failures.empty()) return static_cast<int>(ErrorKind::evaluator);
  if (records.size() != experiment.runs.size()) return static_cast<int>(ErrorKind::incomplete);
  return 0;
}

// analyze --------------------------------------------------------------------

inline AnalysisReport analyze_objective(const ProjectConfig& config, const ExperimentPlan& plan,
                                        const std::vector<RunRecord>& records,
                                        const NamedObjective& objective) {
  return analyze(plan, records, objective.norm,
                 {objective.name, config.metric_sets, config.selection_metric_set});
}

inline int cmd_analyze(const ProjectConfig& config, std::ostream& out) {
  const auto experiment = load_plan(config);
  const auto records = load_records(config, experiment);
  for (const auto& objective : config.objectives) {
    const auto report = analyze_objective(config, experiment, records, objective);
    const auto text = render_text(report);
    write_file(analysis_path(config, objective.name, ".json"), dump(to_json(report)));
    write_file(analysis_path(config, objective.name, ".txt"), text);
    out << text << "\n";
  }
  return 0;
}

// confirm --------------------------------------------------------------------

inline int cmd_confirm(const ProjectConfig& config, const std::optional<std::string>& record_file,
                       std::ostream& out) {
  const auto experiment = load_plan(config);
  const auto records = load_records(config, experiment);
  bool all_dominate = true;
  for (const auto& objective : config.objectives) {
    if (!fs::exists(analysis_path(config, objective.name, ".json"))) {
      fail_validation("no analysis for objective '" + objective.name + "'; run `analyze` first");
    }
    auto report = analyze_objective(config, experiment, records, objective);
    const auto optimum = optimum_indices(report.optimum);

    RunRecord confirmation;
    const auto stored = confirmation_path(config, objective.name);
    if (record_file) {
      confirmation = load_record(*record_file, experiment.space);
    } else if (fs::exists(stored)) {
      confirmation = load_record(stored, experiment.space);
    } else if (config.evaluator && !std::holds_alternative<ReplaySpec>(*config.evaluator)) {
      auto outcome = evaluate_one(*config.evaluator, experiment.space, experiment.runs.size(), optimum);
      if (auto* failure = std::get_if<RunFailure>(&outcome)) {
        out << objective.name << ": confirmation run failed: " << failure->reason << "\n";
        return static_cast<int>(ErrorKind::evaluator);
      }
      confirmation = std::get<RunRecord>(outcome);
      write_file(stored, dump(to_json(confirmation)));
    } else {
      fail_validation("no confirmation record for objective '" + objective.name +
                      "'; pass --record or configure a non-replay evaluator");
    }

    report.confirmation = confirm(report, experiment.space, objective.norm, confirmation);
    write_file(analysis_path(config, objective.name, ".confirm.json"), dump(to_json(report)));
    std::string text;
    for (const auto& outcome : report.confirmation) {
      std::string verdict = outcome.beats_all ? "beats all runs"
                            : outcome.ties_best ? "ties best run"
                                                : "does not beat all runs";
      text += objective.name + " " + outcome.metric_set + ": J(H*)=" + fixed4(outcome.confirmed) +
              ", best run " + std::to_string(outcome.best_run_id) + " J=" +
              fixed4(outcome.best_run) + " -> " + verdict + "\n";
      all_dominate = all_dominate && outcome.beats_all;
    }
    write_file(analysis_path(config, objective.name, ".confirm.txt"), text);
    out << text;
  }
  out << (all_dominate ? "H* dominates every orthogonal run\n"
                       : "H* does not dominate every orthogonal run\n");
  return 0;
}

// bench ----------------------------------------------------------------------

struct BenchCommand {
  std::string space_path;
  std::string array = "auto";
  std::string objective = "single_error";
  std::optional<double> alpha_error;
  BenchOptions options;
  std::string output;  // rows CSV; summary goes next to it as <stem>_summary.csv
};

inline int cmd_bench(const BenchCommand& command, std::ostream& out) {
  const auto space = load_design_space(command.space_path);
  const auto array = select_array(command.array, space);
  const auto norm = preset(command.objective, command.alpha_error);
  const auto result = run_bench(space, array, norm, command.options);
  const auto summary = bench_summary_csv(result);
  if (!command.output.empty()) {
    const fs::path rows_path(command.output);
    write_file(rows_path, bench_rows_csv(result));
    auto summary_path = rows_path;
    summary_path.replace_filename(rows_path.stem().string() + "_summary.csv");
    write_file(summary_path, summary);
  }
  out << summary;
  return 0;
}

// arrays dump ----------------------------------------------------------------

inline int cmd_arrays_dump(const std::optional<std::string>& name, bool as_json, std::ostream& out) {
  std::vector<OrthogonalArray> arrays;
  if (name) {
    auto entry = catalog_entry(*name);
    if (!entry) fail_validation("no catalog array named '" + *name + "'");
    arrays.push_back(*entry);
  } else {
    arrays = catalog();
  }
  if (as_json) {
    auto document = nlohmann::ordered_json::array();
    for (const auto& array : arrays) document.push_back(to_json(array));
    out << dump(document);
    return 0;
  }
  for (const auto& array : arrays) {
    out << array.name() << ": " << array.runs() << " runs, " << array.columns() << " columns, "
        << array.levels() << " levels, strength 2 " << (validate(array).passed ? "ok" : "FAILED")
        << "\n";
    for (const auto& row : array.rows()) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? " " : "  ") << row[c];
      out << "\n";
    }
  }
  return 0;
}

}  // namespace taguchi::cli

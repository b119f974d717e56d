#pragma once

// Producers of run records for plan rows: replay of a results table,
// synthetic analytic functions, and an external command per run.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"
#include "taguchi/csv.hpp"
#include "taguchi/design_space.hpp"
#include "taguchi/error.hpp"
#include "taguchi/objective.hpp"
#include "taguchi/orthogonal_array.hpp"
#include "taguchi/subprocess.hpp"
#include "taguchi/synthetic.hpp"

namespace taguchi {

struct SubprocessSpec {
  /// Shell command with {factor_name} and {run_id} placeholders.
  std::string command;
  /// Where the command leaves its result document, relative to work_dir.
  std::string result_path = "{run_id}.json";
  std::string work_dir = ".";
  double timeout_seconds = 0.0;  // <= 0: no timeout
};

struct ReplaySpec {
  std::string path;
};

using EvaluatorSpec = std::variant<SubprocessSpec, ReplaySpec, SyntheticSpec>;

struct RunFailure {
  std::size_t run_id;
  std::string reason;
};

struct EvaluationResult {
  std::vector<RunRecord> records;  // sorted by run_id
  std::vector<RunFailure> failures;

  bool complete() const { return failures.empty(); }
};

// Templates ------------------------------------------------------------------

/// Names inside {...} placeholders, in order of appearance.
inline std::vector<std::string> placeholders(const std::string& text) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string::npos) {
    const auto close = text.find('}', pos);
    if (close == std::string::npos) fail_validation("unterminated placeholder in '" + text + "'");
    names.push_back(text.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return names;
}

inline void check_template(const std::string& text, const DesignSpace& space) {
  for (const auto& name : placeholders(text)) {
    if (name != "run_id" && !space.position(name)) {
      fail_validation("template placeholder {" + name + "} is neither a factor nor run_id");
    }
  }
}

inline std::string substitute(const std::string& text, const Assignment& assignment,
                              std::size_t run_id) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find('{', pos);
    if (open == std::string::npos) break;
    const auto close = text.find('}', open);
    if (close == std::string::npos) break;
    out.append(text, pos, open - pos);
    const auto name = text.substr(open + 1, close - open - 1);
    out += name == "run_id" ? std::to_string(run_id) : assignment.at(name).text;
    pos = close + 1;
  }
  out.append(text, pos, std::string::npos);
  return out;
}

// Replay ---------------------------------------------------------------------

/// A results table: run rows keyed by run_id plus labelled confirmation rows.
struct ReplayTable {
  std::map<std::size_t, RunRecord> runs;
  std::map<std::string, RunRecord> confirmations;
};

/// Columns: run_id, optional confirm, optional factor columns, and
/// <metric_set>.<objective> measurement columns. Rows with a non-empty
/// confirm cell are confirmation rows keyed by that label.
inline ReplayTable parse_replay(const csv::Table& table, const DesignSpace& space) {
  const int id_column = table.column("run_id");
  if (id_column < 0) fail_validation("replay table needs a run_id column");
  const int confirm_column = table.column("confirm");

  struct Measure {
    std::size_t column;
    std::string set;
    std::string objective;
  };
  std::vector<Measure> measures;
  std::vector<std::pair<std::size_t, std::size_t>> factor_columns;  // column, factor position
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const auto& name = table.header[c];
    if (static_cast<int>(c) == id_column || static_cast<int>(c) == confirm_column) continue;
    if (auto k = space.position(name)) {
      factor_columns.emplace_back(c, *k);
    } else if (auto dot = name.find('.'); dot != std::string::npos && dot > 0 &&
                                          dot + 1 < name.size()) {
      measures.push_back({c, name.substr(0, dot), name.substr(dot + 1)});
    } else {
      fail_validation("replay column '" + name +
                      "' is neither a factor nor a <metric_set>.<objective> measurement");
    }
  }

  ReplayTable replay;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    RunRecord record;
    for (const auto& m : measures) {
      if (!row[m.column].empty()) {
        record.measurements[m.set][m.objective] =
            csv::parse_number(row[m.column], m.set + "." + m.objective);
      }
    }
    for (const auto& [column, k] : factor_columns) {
      const auto& factor = space.factor(k);
      record.assignment.set(factor.name(), factor.kind() == FactorKind::numeric
                                               ? LevelValue::numeric(row[column])
                                               : LevelValue::label(row[column]));
    }
    if (confirm_column >= 0 && !row[confirm_column].empty()) {
      const auto& label = row[confirm_column];
      record.metadata.notes = "confirmation " + label;
      if (!replay.confirmations.emplace(label, std::move(record)).second) {
        fail_validation("replay table repeats confirmation '" + label + "'");
      }
      continue;
    }
    const double id = csv::parse_number(row[id_column], "run_id");
    if (id < 0 || id != static_cast<double>(static_cast<std::size_t>(id))) {
      fail_validation("replay run_id '" + row[id_column] + "' is not a non-negative integer");
    }
    record.run_id = static_cast<std::size_t>(id);
    if (!replay.runs.emplace(record.run_id, std::move(record)).second) {
      fail_validation("replay table repeats run_id " + row[id_column]);
    }
  }
  return replay;
}

inline ReplayTable load_replay(const std::string& path, const DesignSpace& space) {
  return parse_replay(csv::read(path), space);
}

/// Records for every plan run, taken from the table. The table must cover
/// each plan run exactly once; factor columns, when present, must agree
/// with the plan.
inline std::vector<RunRecord> replay_records(const ReplayTable& table, const ExperimentPlan& plan) {
  std::vector<RunRecord> records;
  std::set<std::size_t> planned;
  for (const auto& run : plan.runs) {
    planned.insert(run.run_id);
    auto it = table.runs.find(run.run_id);
    if (it == table.runs.end()) {
      fail_validation("replay table has no row for run " + std::to_string(run.run_id));
    }
    RunRecord record = it->second;
    if (record.assignment.size() > 0) {
      for (const auto& [name, value] : record.assignment.entries()) {
        if (!(run.assignment.at(name) == value)) {
          fail_validation("replay row " + std::to_string(run.run_id) + " has " + name + "=" +
                          value.text + " but the plan says " + run.assignment.at(name).text);
        }
      }
    }
    record.assignment = run.assignment;
    records.push_back(std::move(record));
  }
  for (const auto& [id, record] : table.runs) {
    if (!planned.count(id)) {
      fail_validation("replay table row " + std::to_string(id) + " is not part of the plan");
    }
  }
  return records;
}

// Single runs ----------------------------------------------------------------

using RunOutcome = std::variant<RunRecord, RunFailure>;

inline RunOutcome run_subprocess(const SubprocessSpec& spec, std::size_t run_id,
                                 const Assignment& assignment) {
  const auto command = substitute(spec.command, assignment, run_id);
  const auto result_file =
      std::filesystem::path(spec.work_dir) / substitute(spec.result_path, assignment, run_id);
  std::error_code ignored;
  std::filesystem::remove(result_file, ignored);

  const auto process = run_shell(command, spec.work_dir, spec.timeout_seconds);
  if (!process.started) return RunFailure{run_id, "could not start command"};
  if (process.timed_out) {
    return RunFailure{run_id, "timed out after " + std::to_string(spec.timeout_seconds) + " s"};
  }
  if (!process.exit_status) {
    return RunFailure{run_id, "killed by signal " + std::to_string(process.signal.value_or(0))};
  }
  if (*process.exit_status != 0) {
    return RunFailure{run_id, "exit status " + std::to_string(*process.exit_status)};
  }
  RunRecord record;
  record.run_id = run_id;
  record.assignment = assignment;
  record.metadata.wall_time_seconds = process.wall_seconds;
  record.metadata.exit_status = 0;
  try {
    record.measurements =
        measurements_from_json(nlohmann::json::parse(csv::read_file(result_file.string())));
  } catch (const std::exception& e) {
    return RunFailure{run_id, std::string("unparsable result ") + result_file.string() + ": " +
                                  e.what()};
  }
  return record;
}

/// Evaluates one assignment with a non-replay evaluator.
inline RunOutcome evaluate_one(const EvaluatorSpec& spec, const DesignSpace& space,
                               std::size_t run_id, const std::vector<LevelIndex>& levels) {
  const auto assignment = realize(space, levels);
  if (const auto* synthetic = std::get_if<SyntheticSpec>(&spec)) {
    RunRecord record;
    record.run_id = run_id;
    record.assignment = assignment;
    try {
      record.measurements = synthetic_observe(*synthetic, space, levels, run_id);
    } catch (const Error& e) {
      return RunFailure{run_id, e.what()};
    }
    return record;
  }
  if (const auto* subprocess = std::get_if<SubprocessSpec>(&spec)) {
    return run_subprocess(*subprocess, run_id, assignment);
  }
  fail_validation("replay evaluators cannot evaluate new assignments");
}

inline void check_evaluator(const EvaluatorSpec& spec, const DesignSpace& space) {
  if (const auto* subprocess = std::get_if<SubprocessSpec>(&spec)) {
    if (subprocess->command.empty()) fail_validation("subprocess evaluator needs a command");
    check_template(subprocess->command, space);
    check_template(subprocess->result_path, space);
  } else if (const auto* synthetic = std::get_if<SyntheticSpec>(&spec)) {
    const auto& ids = synthetic_functions();
    if (std::find(ids.begin(), ids.end(), synthetic->function) == ids.end()) {
      fail_validation("unknown synthetic function '" + synthetic->function + "'");
    }
    if (synthetic->noise < 0.0) fail_validation("synthetic noise must be non-negative");
  }
}

// Plans ----------------------------------------------------------------------

/// Evaluates up to `max_in_flight` runs concurrently. The result does not
/// depend on `max_in_flight`: every run draws from its own seed and results
/// are sorted by run_id. Replay ignores `max_in_flight`.
inline EvaluationResult parallel_evaluate(const EvaluatorSpec& spec, const ExperimentPlan& plan,
                                          std::size_t max_in_flight) {
  if (max_in_flight == 0) fail_validation("max_in_flight must be positive");
  check_evaluator(spec, plan.space);
  EvaluationResult result;
  if (const auto* replay = std::get_if<ReplaySpec>(&spec)) {
    result.records = replay_records(load_replay(replay->path, plan.space), plan);
  } else {
    std::vector<std::optional<RunOutcome>> outcomes(plan.runs.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= plan.runs.size()) return;
        try {
          outcomes[i] = evaluate_one(spec, plan.space, plan.runs[i].run_id, plan.runs[i].levels);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    };
    const std::size_t workers = std::min(max_in_flight, plan.runs.size());
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::jthread> threads;
      for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    for (auto& outcome : outcomes) {
      if (auto* record = std::get_if<RunRecord>(&*outcome)) {
        result.records.push_back(std::move(*record));
      } else {
        result.failures.push_back(std::get<RunFailure>(*outcome));
      }
    }
  }
  std::sort(result.records.begin(), result.records.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.run_id < b.run_id; });
  std::sort(result.failures.begin(), result.failures.end(),
            [](const RunFailure& a, const RunFailure& b) { return a.run_id < b.run_id; });
  return result;
}

inline EvaluationResult evaluate(const EvaluatorSpec& spec, const ExperimentPlan& plan) {
  return parallel_evaluate(spec, plan, 1);
}

// JSON -----------------------------------------------------------------------

/// {"type": "replay"|"synthetic"|"subprocess", ...}; relative paths resolve
/// against `base_dir`.
inline EvaluatorSpec evaluator_from_json(const nlohmann::json& document,
                                         const std::filesystem::path& base_dir = {}) {
  auto resolve = [&](const std::string& path) {
    std::filesystem::path p(path);
    return (p.is_absolute() || base_dir.empty() ? p : base_dir / p).lexically_normal().string();
  };
  try {
    const std::string type = document.at("type").get<std::string>();
    if (type == "replay") return ReplaySpec{resolve(document.at("path").get<std::string>())};
    if (type == "synthetic") {
      return SyntheticSpec{document.value("function", "additive"),
                           document.value("seed", std::uint64_t{0}),
                           document.value("noise", 0.0)};
    }
    if (type == "subprocess") {
      return SubprocessSpec{document.at("command").get<std::string>(),
                            document.value("result_path", "{run_id}.json"),
                            resolve(document.value("work_dir", ".")),
                            document.value("timeout_seconds", 0.0)};
    }
    fail_validation("unknown evaluator type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("malformed evaluator spec: ") + e.what());
  }
}

}  // namespace taguchi

#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "taguchi/csv.hpp"
#include "taguchi/design_space.hpp"
#include "taguchi/error.hpp"
#include "taguchi/evaluator.hpp"
#include "taguchi/objective.hpp"
#include "taguchi/orthogonal_array.hpp"

namespace taguchi {

struct NamedObjective {
  std::string name;
  NormSpec norm;
};

/// Everything one experiment needs. Paths are already resolved.
struct ProjectConfig {
  std::string space_path;
  std::string array = "auto";  // "auto", "gf", a catalog name, or a file path
  std::vector<NamedObjective> objectives;
  std::vector<std::string> metric_sets = {"train"};
  std::string selection_metric_set = "train";
  std::optional<EvaluatorSpec> evaluator;
  std::string output_dir = "out";
  std::size_t max_in_flight = 1;
};

/// TAGUCHI_SEED, when set, replaces `seed`.
inline std::uint64_t seed_from_env(std::uint64_t seed) {
  if (const char* text = std::getenv("TAGUCHI_SEED"); text && *text) {
    try {
      std::size_t consumed = 0;
      const auto value = std::stoull(text, &consumed);
      if (consumed == std::string(text).size()) return value;
    } catch (const std::exception&) {
    }
    fail_validation(std::string("TAGUCHI_SEED is not an unsigned integer: '") + text + "'");
  }
  return seed;
}

inline NamedObjective objective_from_json(const nlohmann::json& entry,
                                          const std::filesystem::path& base_dir) {
  const std::string name = entry.value("name", entry.value("preset", std::string("objective")));
  if (entry.contains("preset")) {
    std::optional<double> alpha;
    if (entry.contains("alpha_e")) alpha = entry["alpha_e"].get<double>();
    return {name, preset(entry["preset"].get<std::string>(), alpha)};
  }
  if (entry.contains("path")) {
    const auto path = base_dir / entry["path"].get<std::string>();
    nlohmann::json document;
    try {
      document = nlohmann::json::parse(csv::read_file(path.string()));
    } catch (const nlohmann::json::exception& e) {
      fail_validation("norm spec '" + path.string() + "': " + e.what());
    }
    return {name, norm_spec_from_json(document)};
  }
  if (entry.contains("objectives")) return {name, norm_spec_from_json(entry)};
  fail_validation("objective '" + name + "' needs a preset, a path, or inline objectives");
}

inline ProjectConfig config_from_json(const nlohmann::json& document,
                                      const std::filesystem::path& base_dir) {
  auto resolve = [&](const std::string& path) {
    std::filesystem::path p(path);
    return (p.is_absolute() ? p : base_dir / p).lexically_normal().string();
  };
  ProjectConfig config;
  try {
    config.space_path = resolve(document.at("space").get<std::string>());
    if (!std::filesystem::exists(config.space_path)) {
      fail_validation("design space file '" + config.space_path + "' does not exist");
    }
    config.array = document.value("array", "auto");
    if (config.array != "auto" && config.array != "gf" && !catalog_entry(config.array)) {
      config.array = resolve(config.array);
      if (!std::filesystem::exists(config.array)) {
        fail_validation("array '" + config.array + "' is neither a catalog name nor a file");
      }
    }
    if (document.contains("objectives")) {
      for (const auto& entry : document["objectives"]) {
        config.objectives.push_back(objective_from_json(entry, base_dir));
      }
    } else {
      config.objectives.push_back({"obj1", preset_single_error()});
    }
    if (document.contains("metric_sets")) {
      config.metric_sets = document["metric_sets"].get<std::vector<std::string>>();
    }
    config.selection_metric_set = document.value("selection_metric_set", "train");
    if (document.contains("evaluator")) {
      auto evaluator = evaluator_from_json(document["evaluator"], base_dir);
      if (auto* synthetic = std::get_if<SyntheticSpec>(&evaluator)) {
        synthetic->seed = seed_from_env(synthetic->seed);
      }
      config.evaluator = std::move(evaluator);
    }
    config.output_dir = resolve(document.value("output_dir", "out"));
    config.max_in_flight = document.value("max_in_flight", std::size_t{1});
  } catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("malformed config: ") + e.what());
  }
  if (config.metric_sets.empty()) fail_validation("config lists no metric sets");
  if (std::find(config.metric_sets.begin(), config.metric_sets.end(),
                config.selection_metric_set) == config.metric_sets.end()) {
    fail_validation("selection metric set '" + config.selection_metric_set +
                    "' is not among the configured metric sets");
  }
  if (config.max_in_flight == 0) fail_validation("max_in_flight must be positive");
  return config;
}

inline ProjectConfig load_config(const std::string& path) {
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(csv::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail_validation("config '" + path + "': " + e.what());
  }
  return config_from_json(document, std::filesystem::path(path).parent_path());
}

/// Resolves the array selection for a space. "auto" takes the smallest
/// catalog array with enough columns and L = max L_k; "gf" uses the
/// Galois-field construction.
inline OrthogonalArray select_array(const std::string& selection, const DesignSpace& space) {
  if (selection == "auto") return catalog_lookup(space.size(), space.max_levels());
  if (selection == "gf") return gf_construct(space.max_levels(), space.size());
  OrthogonalArray array = [&] {
    if (auto entry = catalog_entry(selection)) return *entry;
    return array_from_text(csv::read_file(selection),
                           std::filesystem::path(selection).filename().string());
  }();
  if (array.columns() > space.size()) array = array.first_columns(space.size());
  const auto report = validate(array);
  if (!report.passed) {
    fail_validation("array '" + array.name() + "' is not a strength-2 orthogonal array");
  }
  return array;
}

}  // namespace taguchi

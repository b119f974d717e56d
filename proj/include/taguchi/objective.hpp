#pragma once

// Scalarization of a run's measurements into the performance index J: each
// objective value is scaled, weighted, and the weighted vector is collapsed
// by a norm. Every objective is minimized.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "taguchi/design_space.hpp"
#include "taguchi/error.hpp"

namespace taguchi {

// Scalers --------------------------------------------------------------------

struct IdentityScaler {};

/// log10(raw) / divisor.
struct Log10Scaler {
  double divisor = 1000.0;
};

/// a * raw + b.
struct AffineScaler {
  double a = 1.0;
  double b = 0.0;
};

/// (raw - lo) / (hi - lo), clamped to [0, 1].
struct MinMaxScaler {
  double lo = 0.0;
  double hi = 1.0;
};

using ScalerSpec = std::variant<IdentityScaler, Log10Scaler, AffineScaler, MinMaxScaler>;

inline void check_scaler(const ScalerSpec& spec) {
  if (const auto* log = std::get_if<Log10Scaler>(&spec)) {
    if (!(log->divisor > 0.0)) fail_validation("log10_scaled divisor must be positive");
  } else if (const auto* minmax = std::get_if<MinMaxScaler>(&spec)) {
    if (!(minmax->lo < minmax->hi)) fail_validation("minmax scaler needs lo < hi");
  }
}

inline double scale(const ScalerSpec& spec, double raw) {
  check_scaler(spec);
  if (!std::isfinite(raw)) fail_validation("cannot scale non-finite value");
  double scaled = std::visit(
      [raw](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, IdentityScaler>) {
          return raw;
        } else if constexpr (std::is_same_v<S, Log10Scaler>) {
          if (!(raw > 0.0)) {
            fail_validation("log10_scaled needs a positive input, got " + std::to_string(raw));
          }
          return std::log10(raw) / s.divisor;
        } else if constexpr (std::is_same_v<S, AffineScaler>) {
          return s.a * raw + s.b;
        } else {
          return std::clamp((raw - s.lo) / (s.hi - s.lo), 0.0, 1.0);
        }
      },
      spec);
  if (scaled < 0.0) {
    fail_validation("scaled value " + std::to_string(scaled) + " is negative");
  }
  return scaled;
}

// Specs ----------------------------------------------------------------------

struct ObjectiveSpec {
  std::string name;
  ScalerSpec scaler;
  double weight = 1.0;
};

struct PNorm {
  double p = 2.0;
};
struct MaxNorm {};
using NormKind = std::variant<PNorm, MaxNorm>;

inline constexpr double kWeightSumTolerance = 1e-12;

class NormSpec {
 public:
  NormSpec(std::vector<ObjectiveSpec> objectives, NormKind norm = PNorm{2.0})
      : objectives_(std::move(objectives)), norm_(norm) {
    if (objectives_.empty()) fail_validation("a norm spec needs at least one objective");
    double sum = 0.0;
    for (const auto& objective : objectives_) {
      if (objective.name.empty()) fail_validation("objective name must not be empty");
      if (!(objective.weight > 0.0 && objective.weight <= 1.0)) {
        fail_validation("objective '" + objective.name + "' weight must lie in (0, 1]");
      }
      check_scaler(objective.scaler);
      sum += objective.weight;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
      fail_validation("objective weights sum to " + std::to_string(sum) + ", expected 1");
    }
    if (const auto* p = std::get_if<PNorm>(&norm_); p && !(p->p >= 1.0)) {
      fail_validation("p-norm needs p >= 1");
    }
  }

  const std::vector<ObjectiveSpec>& objectives() const { return objectives_; }
  const NormKind& norm() const { return norm_; }

 private:
  std::vector<ObjectiveSpec> objectives_;
  NormKind norm_;
};

/// Objective name -> raw measured value.
using ObjectiveValues = std::map<std::string, double>;

/// || (w_j * s_j(p_j))_j ||. Weights are applied inside the norm.
inline double aggregate(const NormSpec& spec, const ObjectiveValues& raw) {
  std::vector<double> components;
  components.reserve(spec.objectives().size());
  for (const auto& objective : spec.objectives()) {
    auto it = raw.find(objective.name);
    if (it == raw.end()) fail_validation("missing value for objective '" + objective.name + "'");
    components.push_back(objective.weight * scale(objective.scaler, it->second));
  }
  if (components.size() == 1) return components.front();
  return std::visit(
      [&](const auto& norm) -> double {
        using N = std::decay_t<decltype(norm)>;
        if constexpr (std::is_same_v<N, MaxNorm>) {
          return *std::max_element(components.begin(), components.end());
        } else {
          if (norm.p == 1.0) {
            double sum = 0.0;
            for (double c : components) sum += c;
            return sum;
          }
          if (norm.p == 2.0) {
            double sum = 0.0;
            for (double c : components) sum += c * c;
            return std::sqrt(sum);
          }
          double sum = 0.0;
          for (double c : components) sum += std::pow(c, norm.p);
          return std::pow(sum, 1.0 / norm.p);
        }
      },
      spec.norm());
}

/// Error rate alone, identity-scaled: J = e.
inline NormSpec preset_single_error() {
  return NormSpec({{"error", IdentityScaler{}, 1.0}}, PNorm{2.0});
}

/// 2-norm of (alpha_e * e, (1 - alpha_e) * log10(t) / 1000).
inline NormSpec preset_error_and_time(double alpha_error = 0.8) {
  if (!(alpha_error > 0.0 && alpha_error < 1.0)) {
    fail_validation("error_and_time needs alpha_e in (0, 1), got " + std::to_string(alpha_error));
  }
  return NormSpec({{"error", IdentityScaler{}, alpha_error},
                   {"time", Log10Scaler{1000.0}, 1.0 - alpha_error}},
                  PNorm{2.0});
}

inline NormSpec preset(const std::string& name, std::optional<double> alpha_error = std::nullopt) {
  if (name == "single_error") return preset_single_error();
  if (name == "error_and_time") return preset_error_and_time(alpha_error.value_or(0.8));
  fail_validation("unknown objective preset '" + name + "'");
}

// Run records ----------------------------------------------------------------

/// Metric set name ("train", "test", ...) -> objective values.
using Measurements = std::map<std::string, ObjectiveValues>;

struct RunMetadata {
  std::optional<double> wall_time_seconds;
  std::optional<int> exit_status;
  std::string notes;

  friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

struct RunRecord {
  std::size_t run_id = 0;
  Assignment assignment;
  Measurements measurements;
  RunMetadata metadata;
};

inline const ObjectiveValues& metric_set(const RunRecord& record, const std::string& name) {
  auto it = record.measurements.find(name);
  if (it == record.measurements.end()) {
    fail_validation("run " + std::to_string(record.run_id) + " has no metric set '" + name + "'");
  }
  return it->second;
}

/// J of one record on one metric set.
inline double performance(const NormSpec& spec, const RunRecord& record,
                          const std::string& metric_set_name) {
  return aggregate(spec, metric_set(record, metric_set_name));
}

// JSON -----------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const ScalerSpec& spec) {
  return std::visit(
      [](const auto& s) -> nlohmann::ordered_json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, IdentityScaler>) {
          return {{"type", "identity"}};
        } else if constexpr (std::is_same_v<S, Log10Scaler>) {
          return {{"type", "log10_scaled"}, {"divisor", s.divisor}};
        } else if constexpr (std::is_same_v<S, AffineScaler>) {
          return {{"type", "affine"}, {"a", s.a}, {"b", s.b}};
        } else {
          return {{"type", "minmax"}, {"lo", s.lo}, {"hi", s.hi}};
        }
      },
      spec);
}

inline nlohmann::ordered_json to_json(const NormSpec& spec) {
  auto objectives = nlohmann::ordered_json::array();
  for (const auto& objective : spec.objectives()) {
    objectives.push_back({{"name", objective.name},
                          {"scaler", to_json(objective.scaler)},
                          {"weight", objective.weight}});
  }
  nlohmann::ordered_json norm;
  if (const auto* p = std::get_if<PNorm>(&spec.norm())) {
    norm = {{"p", p->p}};
  } else {
    norm = {{"type", "max"}};
  }
  return {{"objectives", std::move(objectives)}, {"norm", std::move(norm)}};
}

inline ScalerSpec scaler_from_json(const nlohmann::json& document) {
  const std::string type = document.value("type", "identity");
  ScalerSpec spec;
  if (type == "identity") {
    spec = IdentityScaler{};
  } else if (type == "log10_scaled") {
    spec = Log10Scaler{document.value("divisor", 1000.0)};
  } else if (type == "affine") {
    spec = AffineScaler{document.value("a", 1.0), document.value("b", 0.0)};
  } else if (type == "minmax") {
    spec = MinMaxScaler{document.at("lo").get<double>(), document.at("hi").get<double>()};
  } else {
    fail_validation("unknown scaler type '" + type + "'");
  }
  check_scaler(spec);
  return spec;
}

inline NormSpec norm_spec_from_json(const nlohmann::json& document) {
  try {
    std::vector<ObjectiveSpec> objectives;
    for (const auto& entry : document.at("objectives")) {
      objectives.push_back({entry.at("name").get<std::string>(),
                            scaler_from_json(entry.value("scaler", nlohmann::json::object())),
                            entry.at("weight").get<double>()});
    }
    NormKind norm = PNorm{2.0};
    if (document.contains("norm")) {
      const auto& n = document["norm"];
      if (n.value("type", "p") == "max") {
        norm = MaxNorm{};
      } else {
        norm = PNorm{n.value("p", 2.0)};
      }
    }
    return NormSpec(std::move(objectives), norm);
  } catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("malformed norm spec: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const RunRecord& record) {
  auto measurements = nlohmann::ordered_json::object();
  for (const auto& [set, values] : record.measurements) {
    auto object = nlohmann::ordered_json::object();
    for (const auto& [name, value] : values) object[name] = value;
    measurements[set] = std::move(object);
  }
  auto metadata = nlohmann::ordered_json::object();
  if (record.metadata.wall_time_seconds) {
    metadata["wall_time_seconds"] = *record.metadata.wall_time_seconds;
  }
  if (record.metadata.exit_status) metadata["exit_status"] = *record.metadata.exit_status;
  if (!record.metadata.notes.empty()) metadata["notes"] = record.metadata.notes;
  return {{"run_id", record.run_id},
          {"assignment", to_json(record.assignment)},
          {"measurements", std::move(measurements)},
          {"metadata", std::move(metadata)}};
}

/// Measurements document {metric_set: {objective: value}}.
inline Measurements measurements_from_json(const nlohmann::json& document) {
  if (!document.is_object()) fail_validation("measurements must be a JSON object");
  Measurements measurements;
  for (const auto& [set, values] : document.items()) {
    if (!values.is_object()) fail_validation("metric set '" + set + "' must be an object");
    for (const auto& [name, value] : values.items()) {
      if (!value.is_number()) {
        fail_validation("measurement " + set + "." + name + " is not a number");
      }
      measurements[set][name] = value.get<double>();
    }
  }
  return measurements;
}

/// Reads a record written by to_json. Assignment values are taken verbatim as
/// text and resolved against `space` so numeric levels compare numerically.
inline RunRecord record_from_json(const nlohmann::json& document, const DesignSpace& space) {
  try {
    RunRecord record;
    record.run_id = document.at("run_id").get<std::size_t>();
    for (const auto& factor : space.factors()) {
      const auto& value = document.at("assignment").at(factor.name());
      std::string text = value.is_string() ? value.get<std::string>() : value.dump();
      record.assignment.set(factor.name(), factor.kind() == FactorKind::numeric
                                               ? LevelValue::numeric(std::move(text))
                                               : LevelValue::label(std::move(text)));
    }
    record.measurements = measurements_from_json(document.at("measurements"));
    if (document.contains("metadata")) {
      const auto& m = document["metadata"];
      if (m.contains("wall_time_seconds")) {
        record.metadata.wall_time_seconds = m["wall_time_seconds"].get<double>();
      }
      if (m.contains("exit_status")) record.metadata.exit_status = m["exit_status"].get<int>();
      record.metadata.notes = m.value("notes", "");
    }
    return record;
  } catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("malformed run record: ") + e.what());
  }
}

}  // namespace taguchi

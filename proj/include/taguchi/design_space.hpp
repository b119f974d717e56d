#pragma once

// Generalized hyperparameter space: named factors, each with an ordered grid
// of discrete levels. Levels are addressed by 1-based index everywhere in the
// library; numeric and categorical factors only differ in how level values
// compare and print.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "taguchi/csv.hpp"
#include "taguchi/error.hpp"

namespace taguchi {

using LevelIndex = std::size_t;  // 1-based

enum class FactorKind { numeric, categorical };

inline const char* to_string(FactorKind kind) {
  return kind == FactorKind::numeric ? "numeric" : "categorical";
}

/// A single level value. `text` is the value exactly as it was given; numeric
/// levels also carry the parsed number, which is what comparisons use.
struct LevelValue {
  std::string text;
  std::optional<double> number;

  static LevelValue numeric(std::string text) {
    double parsed = csv::parse_number(text, "numeric level");
    return LevelValue{std::move(text), parsed};
  }
  static LevelValue label(std::string text) {
    return LevelValue{std::move(text), std::nullopt};
  }

  /// Numeric reading of the value, also for categorical labels that happen to
  /// look like numbers ("110"). Empty when the text is not a number.
  std::optional<double> as_number() const {
    if (number) return number;
    try {
      std::size_t consumed = 0;
      double value = std::stod(text, &consumed);
      if (consumed == text.size()) return value;
    } catch (const std::exception&) {
    }
    return std::nullopt;
  }

  friend bool operator==(const LevelValue& a, const LevelValue& b) {
    if (a.number && b.number) return *a.number == *b.number;
    return a.text == b.text;
  }
};

class Factor {
 public:
  Factor(std::string name, FactorKind kind, std::vector<LevelValue> levels)
      : name_(std::move(name)), kind_(kind), levels_(std::move(levels)) {
    if (name_.empty()) fail_validation("factor name must not be empty");
    if (levels_.empty()) {
      fail_validation("factor '" + name_ + "' has no levels");
    }
    std::set<double> numbers;
    std::set<std::string> labels;
    for (auto& level : levels_) {
      if (kind_ == FactorKind::numeric && !level.number) level = LevelValue::numeric(level.text);
      if (kind_ == FactorKind::categorical) level.number.reset();
      const bool fresh = level.number ? numbers.insert(*level.number).second
                                      : labels.insert(level.text).second;
      if (!fresh) fail_validation("factor '" + name_ + "' repeats level '" + level.text + "'");
    }
  }

  /// Convenience for numeric factors given as decimal strings.
  static Factor numeric(std::string name, std::vector<std::string> levels) {
    std::vector<LevelValue> values;
    for (auto& text : levels) values.push_back(LevelValue::numeric(std::move(text)));
    return Factor(std::move(name), FactorKind::numeric, std::move(values));
  }
  static Factor categorical(std::string name, std::vector<std::string> levels) {
    std::vector<LevelValue> values;
    for (auto& text : levels) values.push_back(LevelValue::label(std::move(text)));
    return Factor(std::move(name), FactorKind::categorical, std::move(values));
  }

  const std::string& name() const { return name_; }
  FactorKind kind() const { return kind_; }
  std::size_t level_count() const { return levels_.size(); }
  const std::vector<LevelValue>& levels() const { return levels_; }

  const LevelValue& level(LevelIndex index) const {
    if (index < 1 || index > levels_.size()) {
      fail_validation("level index " + std::to_string(index) +
                      " out of range 1.." + std::to_string(levels_.size()) +
                      " for factor '" + name_ + "'");
    }
    return levels_[index - 1];
  }

  std::optional<LevelIndex> find(const LevelValue& value) const {
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      if (levels_[i] == value) return i + 1;
    }
    return std::nullopt;
  }

 private:
  std::string name_;
  FactorKind kind_;
  std::vector<LevelValue> levels_;
};

/// Factor name -> level value, kept in factor order.
class Assignment {
 public:
  using Entry = std::pair<std::string, LevelValue>;

  Assignment() = default;
  explicit Assignment(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  void set(const std::string& name, LevelValue value) {
    for (auto& [key, existing] : entries_) {
      if (key == name) {
        existing = std::move(value);
        return;
      }
    }
    entries_.emplace_back(name, std::move(value));
  }

  const LevelValue* find(const std::string& name) const {
    for (const auto& [key, value] : entries_) {
      if (key == name) return &value;
    }
    return nullptr;
  }

  const LevelValue& at(const std::string& name) const {
    if (const auto* value = find(name)) return *value;
    fail_validation("assignment has no factor '" + name + "'");
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Order-insensitive equality.
  friend bool operator==(const Assignment& a, const Assignment& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [name, value] : a.entries_) {
      const auto* other = b.find(name);
      if (!other || !(*other == value)) return false;
    }
    return true;
  }

 private:
  std::vector<Entry> entries_;
};

class DesignSpace {
 public:
  explicit DesignSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) fail_validation("design space needs at least one factor");
    std::set<std::string> names;
    for (const auto& factor : factors_) {
      if (!names.insert(factor.name()).second) {
        fail_validation("duplicate factor name '" + factor.name() + "'");
      }
    }
  }

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }
  const Factor& factor(std::size_t position) const { return factors_.at(position); }

  std::optional<std::size_t> position(const std::string& name) const {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (factors_[i].name() == name) return i;
    }
    return std::nullopt;
  }

  std::size_t max_levels() const {
    std::size_t result = 0;
    for (const auto& factor : factors_) result = std::max(result, factor.level_count());
    return result;
  }

  bool uniform_levels() const {
    for (const auto& factor : factors_) {
      if (factor.level_count() != factors_.front().level_count()) return false;
    }
    return true;
  }

 private:
  std::vector<Factor> factors_;
};

/// Number of points in the full factorial grid, the product of all level
/// counts. Throws instead of wrapping when the product leaves uint64 range.
inline std::uint64_t grid_size(const DesignSpace& space) {
  std::uint64_t product = 1;
  for (const auto& factor : space.factors()) {
    const std::uint64_t levels = factor.level_count();
    if (product > std::numeric_limits<std::uint64_t>::max() / levels) {
      fail_validation("grid size overflows 64 bits at factor '" + factor.name() + "'");
    }
    product *= levels;
  }
  return product;
}

/// Minimum number of runs for estimating every main effect:
/// 1 + sum over factors of (L_k - 1).
inline std::uint64_t min_runs(const DesignSpace& space) {
  std::uint64_t runs = 1;
  for (const auto& factor : space.factors()) runs += factor.level_count() - 1;
  return runs;
}

inline Assignment realize(const DesignSpace& space, std::span<const LevelIndex> indices) {
  if (indices.size() != space.size()) {
    fail_validation("expected " + std::to_string(space.size()) + " level indices, got " +
                    std::to_string(indices.size()));
  }
  Assignment assignment;
  for (std::size_t k = 0; k < space.size(); ++k) {
    const auto& factor = space.factor(k);
    assignment.set(factor.name(), factor.level(indices[k]));
  }
  return assignment;
}

/// Inverse of realize.
inline std::vector<LevelIndex> level_indices(const DesignSpace& space,
                                             const Assignment& assignment) {
  if (assignment.size() != space.size()) {
    fail_validation("assignment has " + std::to_string(assignment.size()) +
                    " factors, space has " + std::to_string(space.size()));
  }
  std::vector<LevelIndex> indices;
  for (const auto& factor : space.factors()) {
    const auto& value = assignment.at(factor.name());
    auto index = factor.find(value);
    if (!index) {
      fail_validation("value '" + value.text + "' is not a level of factor '" +
                      factor.name() + "'");
    }
    indices.push_back(*index);
  }
  return indices;
}

// JSON ---------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const LevelValue& value) {
  if (value.number) return nlohmann::ordered_json::parse(value.text);
  return value.text;
}

/// Factor name -> level text, in factor order.
inline nlohmann::ordered_json to_json(const Assignment& assignment) {
  auto object = nlohmann::ordered_json::object();
  for (const auto& [name, value] : assignment.entries()) object[name] = value.text;
  return object;
}

inline nlohmann::ordered_json to_json(const DesignSpace& space) {
  auto factors = nlohmann::ordered_json::array();
  for (const auto& factor : space.factors()) {
    auto levels = nlohmann::ordered_json::array();
    for (const auto& level : factor.levels()) {
      levels.push_back(to_json(level));
    }
    factors.push_back({{"name", factor.name()},
                       {"kind", to_string(factor.kind())},
                       {"levels", std::move(levels)}});
  }
  return {{"factors", std::move(factors)}};
}

inline DesignSpace design_space_from_json(const nlohmann::json& document) {
  if (!document.is_object() || !document.contains("factors") ||
      !document["factors"].is_array()) {
    fail_validation("design space document needs a \"factors\" array");
  }
  std::vector<Factor> factors;
  for (const auto& entry : document["factors"]) {
    if (!entry.contains("name") || !entry["name"].is_string()) {
      fail_validation("factor entry without a string \"name\"");
    }
    const std::string name = entry["name"];
    const std::string kind_text = entry.value("kind", "numeric");
    FactorKind kind;
    if (kind_text == "numeric") {
      kind = FactorKind::numeric;
    } else if (kind_text == "categorical") {
      kind = FactorKind::categorical;
    } else {
      fail_validation("factor '" + name + "' has unknown kind '" + kind_text + "'");
    }
    if (!entry.contains("levels") || !entry["levels"].is_array()) {
      fail_validation("factor '" + name + "' needs a \"levels\" array");
    }
    std::vector<LevelValue> levels;
    for (const auto& level : entry["levels"]) {
      std::string text;
      if (level.is_string()) {
        text = level.get<std::string>();
      } else if (level.is_number()) {
        text = level.dump();
      } else {
        fail_validation("factor '" + name + "' has a level that is neither string nor number");
      }
      levels.push_back(kind == FactorKind::numeric ? LevelValue::numeric(std::move(text))
                                                   : LevelValue::label(std::move(text)));
    }
    factors.emplace_back(name, kind, std::move(levels));
  }
  return DesignSpace(std::move(factors));
}

inline DesignSpace load_design_space(const std::string& path) {
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(csv::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail_validation("design space '" + path + "': " + e.what());
  }
  return design_space_from_json(document);
}

}  // namespace taguchi

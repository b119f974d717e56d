#pragma once

// Strength-2 orthogonal arrays: the built-in catalog, Galois-field
// constructions, the validator, and realization of an array into an
// experiment plan over a design space.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "taguchi/csv.hpp"
#include "taguchi/design_space.hpp"
#include "taguchi/error.hpp"
#include "taguchi/galois_field.hpp"

namespace taguchi {

/// R x K matrix of 1-based level indices over L symbols.
class OrthogonalArray {
 public:
  using Row = std::vector<LevelIndex>;

  OrthogonalArray(std::string name, std::size_t levels, std::vector<Row> rows)
      : name_(std::move(name)), levels_(levels), rows_(std::move(rows)) {
    if (levels_ == 0) fail_validation("array '" + name_ + "' needs at least one level");
    if (rows_.empty()) fail_validation("array '" + name_ + "' has no rows");
    columns_ = rows_.front().size();
    if (columns_ == 0) fail_validation("array '" + name_ + "' has no columns");
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (rows_[r].size() != columns_) {
        fail_validation("array '" + name_ + "' row " + std::to_string(r) + " has " +
                        std::to_string(rows_[r].size()) + " columns, expected " +
                        std::to_string(columns_));
      }
      for (LevelIndex value : rows_[r]) {
        if (value < 1 || value > levels_) {
          fail_validation("array '" + name_ + "' row " + std::to_string(r) +
                          " holds level " + std::to_string(value) + " outside 1.." +
                          std::to_string(levels_));
        }
      }
    }
  }

  const std::string& name() const { return name_; }
  std::size_t runs() const { return rows_.size(); }
  std::size_t columns() const { return columns_; }
  std::size_t levels() const { return levels_; }
  const std::vector<Row>& rows() const { return rows_; }
  LevelIndex at(std::size_t run, std::size_t column) const { return rows_[run][column]; }

  /// Leading `count` columns; the rest are dropped from the right.
  OrthogonalArray first_columns(std::size_t count) const {
    if (count == 0 || count > columns_) {
      fail_validation("cannot take " + std::to_string(count) + " columns of array '" +
                      name_ + "' with " + std::to_string(columns_));
    }
    std::vector<Row> rows;
    rows.reserve(rows_.size());
    for (const auto& row : rows_) rows.emplace_back(row.begin(), row.begin() + count);
    return OrthogonalArray(name_, levels_, std::move(rows));
  }

  friend bool operator==(const OrthogonalArray&, const OrthogonalArray&) = default;

 private:
  std::string name_;
  std::size_t levels_;
  std::size_t columns_ = 0;
  std::vector<Row> rows_;
};

// Validation -----------------------------------------------------------------

struct PairHistogram {
  std::size_t first_column;   // 0-based
  std::size_t second_column;  // 0-based
  /// counts[(a - 1) * L + (b - 1)] = rows holding level a in the first column
  /// and level b in the second.
  std::vector<std::size_t> counts;
};

struct PairViolation {
  std::size_t first_column;
  std::size_t second_column;
  LevelIndex first_level;
  LevelIndex second_level;
  std::size_t count;
};

struct BalanceViolation {
  std::size_t column;
  LevelIndex level;
  std::size_t count;
};

struct ValidationReport {
  bool passed = true;
  std::size_t expected_level_count = 0;  // R / L
  std::size_t expected_pair_count = 0;   // R / L^2
  std::vector<std::string> problems;
  std::vector<BalanceViolation> unbalanced;
  std::vector<PairHistogram> histograms;
  std::vector<PairViolation> offending_pairs;
};

inline ValidationReport validate(const OrthogonalArray& array) {
  ValidationReport report;
  const std::size_t runs = array.runs();
  const std::size_t levels = array.levels();
  const std::size_t columns = array.columns();

  if (runs % levels != 0) {
    report.passed = false;
    report.problems.push_back(std::to_string(runs) + " runs are not divisible by " +
                              std::to_string(levels) + " levels");
  }
  const bool pairs_divisible = runs % (levels * levels) == 0;
  if (columns > 1 && !pairs_divisible) {
    report.passed = false;
    report.problems.push_back(std::to_string(runs) + " runs are not divisible by L^2 = " +
                              std::to_string(levels * levels));
  }
  report.expected_level_count = runs / levels;
  report.expected_pair_count = runs / (levels * levels);

  for (std::size_t c = 0; c < columns; ++c) {
    std::vector<std::size_t> counts(levels, 0);
    for (std::size_t r = 0; r < runs; ++r) ++counts[array.at(r, c) - 1];
    for (std::size_t l = 0; l < levels; ++l) {
      if (counts[l] * levels != runs) {
        report.passed = false;
        report.unbalanced.push_back({c, l + 1, counts[l]});
      }
    }
  }

  for (std::size_t a = 0; a < columns; ++a) {
    for (std::size_t b = a + 1; b < columns; ++b) {
      PairHistogram histogram{a, b, std::vector<std::size_t>(levels * levels, 0)};
      for (std::size_t r = 0; r < runs; ++r) {
        ++histogram.counts[(array.at(r, a) - 1) * levels + (array.at(r, b) - 1)];
      }
      for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
        if (histogram.counts[i] * levels * levels != runs) {
          report.passed = false;
          report.offending_pairs.push_back(
              {a, b, i / levels + 1, i % levels + 1, histogram.counts[i]});
        }
      }
      report.histograms.push_back(std::move(histogram));
    }
  }
  return report;
}

// Constructions --------------------------------------------------------------

/// OA(L^2, K, L, 2) for prime-power L and K <= L + 1. Row (a, b) is run
/// a * L + b; column j < L holds a + c_j * b for field element c_j = j, and
/// column L holds b.
inline OrthogonalArray gf_construct(std::size_t levels, std::size_t columns) {
  if (!factor_prime_power(static_cast<unsigned>(levels))) {
    fail_validation("gf_construct needs a prime-power level count, got " +
                    std::to_string(levels));
  }
  if (columns < 1 || columns > levels + 1) {
    fail_validation("gf_construct over " + std::to_string(levels) +
                    " levels supports 1.." + std::to_string(levels + 1) +
                    " columns (at most L + 1), got " + std::to_string(columns));
  }
  const GaloisField field(static_cast<unsigned>(levels));
  const auto q = static_cast<unsigned>(levels);
  std::vector<OrthogonalArray::Row> rows;
  rows.reserve(levels * levels);
  for (unsigned a = 0; a < q; ++a) {
    for (unsigned b = 0; b < q; ++b) {
      OrthogonalArray::Row row;
      row.reserve(columns);
      for (std::size_t j = 0; j < columns; ++j) {
        const unsigned symbol =
            j < levels ? field.add(a, field.mul(static_cast<unsigned>(j), b)) : b;
        row.push_back(symbol + 1);
      }
      rows.push_back(std::move(row));
    }
  }
  return OrthogonalArray("constructed", levels, std::move(rows));
}

/// Rao-Hamming OA(q^n, (q^n - 1)/(q - 1), q, 2). Runs enumerate GF(q)^n with
/// the first coordinate most significant; columns are the nonzero vectors
/// whose last nonzero coordinate is 1, in ascending encoding. For q = 2,
/// n = 3 this reproduces the classic L8(2^7) column order.
inline OrthogonalArray rao_hamming(std::size_t levels, unsigned dimension, std::string name) {
  const GaloisField field(static_cast<unsigned>(levels));
  const auto q = static_cast<unsigned>(levels);
  std::size_t run_count = 1;
  for (unsigned i = 0; i < dimension; ++i) run_count *= q;

  auto coordinates = [&](std::size_t code) {
    std::vector<unsigned> digits(dimension, 0);
    for (unsigned i = 0; i < dimension; ++i) {
      digits[i] = static_cast<unsigned>(code % q);
      code /= q;
    }
    return digits;  // digits[0] least significant
  };

  // Direction codes ascend, so column order is 1, 2, 1+2, 3, 1+3, 2+3, ...
  // in terms of the run coordinates.
  std::vector<std::vector<unsigned>> directions;
  for (std::size_t code = 1; code < run_count; ++code) {
    auto v = coordinates(code);
    std::size_t last = dimension - 1;
    while (v[last] == 0) --last;
    if (v[last] == 1) directions.push_back(std::move(v));
  }

  std::vector<OrthogonalArray::Row> rows;
  for (std::size_t code = 0; code < run_count; ++code) {
    auto digits = coordinates(code);
    std::reverse(digits.begin(), digits.end());  // digits[0] most significant
    OrthogonalArray::Row row;
    for (const auto& direction : directions) {
      unsigned symbol = 0;
      for (unsigned i = 0; i < dimension; ++i) {
        symbol = field.add(symbol, field.mul(digits[i], direction[i]));
      }
      row.push_back(symbol + 1);
    }
    rows.push_back(std::move(row));
  }
  return OrthogonalArray(std::move(name), levels, std::move(rows));
}

// Catalog --------------------------------------------------------------------

/// The 16-run, five-column, four-level table used for the CIFAR-10 study,
/// in its published row order (rows are experiments 0..15).
inline OrthogonalArray l16_table() {
  return OrthogonalArray("L16(4^5)", 4,
                         {{1, 4, 4, 4, 4},
                          {2, 3, 4, 1, 2},
                          {4, 1, 4, 2, 3},
                          {1, 1, 1, 1, 1},
                          {2, 4, 3, 2, 1},
                          {2, 1, 2, 3, 4},
                          {4, 3, 2, 4, 1},
                          {4, 2, 3, 1, 4},
                          {3, 2, 4, 3, 1},
                          {3, 1, 3, 4, 2},
                          {1, 3, 3, 3, 3},
                          {4, 4, 1, 3, 2},
                          {3, 3, 1, 2, 4},
                          {1, 2, 2, 2, 2},
                          {2, 2, 1, 4, 3},
                          {3, 4, 2, 1, 3}});
}

inline OrthogonalArray renamed(OrthogonalArray array, std::string name) {
  auto rows = array.rows();
  return OrthogonalArray(std::move(name), array.levels(), std::move(rows));
}

/// L4(2^3), L8(2^7), L9(3^4), L16(4^5) and L25(5^6). Every entry except
/// L16 comes from the standard finite-field constructions.
inline const std::vector<OrthogonalArray>& catalog() {
  static const std::vector<OrthogonalArray> entries = {
      renamed(gf_construct(2, 3), "L4(2^3)"),
      rao_hamming(2, 3, "L8(2^7)"),
      renamed(gf_construct(3, 4), "L9(3^4)"),
      l16_table(),
      renamed(gf_construct(5, 6), "L25(5^6)"),
  };
  return entries;
}

/// Catalog entry by name, accepting the short form "L16" as well as "L16(4^5)".
inline std::optional<OrthogonalArray> catalog_entry(const std::string& name) {
  for (const auto& entry : catalog()) {
    const auto& full = entry.name();
    if (full == name || full.substr(0, full.find('(')) == name) return entry;
  }
  return std::nullopt;
}

/// Smallest catalog array with `levels` symbols and at least `columns`
/// columns, trimmed to `columns`. A single factor gets the L-run full
/// factorial column.
inline OrthogonalArray catalog_lookup(std::size_t columns, std::size_t levels) {
  if (columns == 0 || levels == 0) fail_validation("catalog_lookup needs K >= 1 and L >= 1");
  if (columns == 1) {
    std::vector<OrthogonalArray::Row> rows;
    for (LevelIndex l = 1; l <= levels; ++l) rows.push_back({l});
    return OrthogonalArray("L" + std::to_string(levels) + "(" + std::to_string(levels) + "^1)",
                           levels, std::move(rows));
  }
  const OrthogonalArray* best = nullptr;
  for (const auto& entry : catalog()) {
    if (entry.levels() == levels && entry.columns() >= columns &&
        (!best || entry.runs() < best->runs())) {
      best = &entry;
    }
  }
  if (best) return best->first_columns(columns);

  std::string message = "no catalog array with " + std::to_string(levels) +
                        " levels and at least " + std::to_string(columns) + " columns";
  if (factor_prime_power(static_cast<unsigned>(levels)) && columns <= levels + 1) {
    message += "; " + std::to_string(levels) +
               " is a prime power, use the Galois-field construction (array \"gf\")";
  }
  fail_validation(message);
}

// Plans ----------------------------------------------------------------------

struct PlannedRun {
  std::size_t run_id;
  std::vector<LevelIndex> levels;
  Assignment assignment;
};

struct ExperimentPlan {
  DesignSpace space;
  std::string array_name;
  std::size_t array_levels = 0;
  std::vector<PlannedRun> runs;

  /// Array column k as a level index per run.
  LevelIndex level(std::size_t run, std::size_t factor) const {
    return runs.at(run).levels.at(factor);
  }
};

inline ExperimentPlan plan(const DesignSpace& space, const OrthogonalArray& array) {
  if (array.columns() != space.size()) {
    fail_validation("array '" + array.name() + "' has " + std::to_string(array.columns()) +
                    " columns but the space has " + std::to_string(space.size()) + " factors");
  }
  for (const auto& factor : space.factors()) {
    if (factor.level_count() != array.levels()) {
      fail_validation("factor '" + factor.name() + "' has " +
                      std::to_string(factor.level_count()) + " levels but array '" +
                      array.name() + "' uses " + std::to_string(array.levels()) +
                      "; mixed-level designs are not supported");
    }
  }
  ExperimentPlan result{space, array.name(), array.levels(), {}};
  result.runs.reserve(array.runs());
  for (std::size_t r = 0; r < array.runs(); ++r) {
    const auto& row = array.rows()[r];
    result.runs.push_back({r, row, realize(space, row)});
  }
  return result;
}

inline std::string plan_to_csv(const ExperimentPlan& plan) {
  csv::Row header{"run_id"};
  for (const auto& factor : plan.space.factors()) header.push_back(factor.name());
  std::string out = csv::format_row(header) + "\n";
  for (const auto& run : plan.runs) {
    csv::Row row{std::to_string(run.run_id)};
    for (const auto& [name, value] : run.assignment.entries()) row.push_back(value.text);
    out += csv::format_row(row) + "\n";
  }
  return out;
}

inline nlohmann::ordered_json to_json(const ExperimentPlan& plan) {
  auto runs = nlohmann::ordered_json::array();
  for (const auto& run : plan.runs) {
    runs.push_back({{"run_id", run.run_id},
                    {"levels", run.levels},
                    {"assignment", to_json(run.assignment)}});
  }
  return {{"array", plan.array_name},
          {"levels", plan.array_levels},
          {"space", to_json(plan.space)},
          {"runs", std::move(runs)}};
}

inline ExperimentPlan plan_from_json(const nlohmann::json& document) {
  try {
    auto space = design_space_from_json(document.at("space"));
    ExperimentPlan result{space, document.at("array").get<std::string>(),
                          document.at("levels").get<std::size_t>(), {}};
    for (const auto& run : document.at("runs")) {
      auto levels = run.at("levels").get<std::vector<LevelIndex>>();
      result.runs.push_back({run.at("run_id").get<std::size_t>(), levels,
                             realize(space, levels)});
    }
    return result;
  } catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("malformed plan document: ") + e.what());
  }
}

inline nlohmann::ordered_json to_json(const OrthogonalArray& array) {
  return {{"name", array.name()},
          {"runs", array.runs()},
          {"columns", array.columns()},
          {"levels", array.levels()},
          {"matrix", array.rows()}};
}

/// Reads an array from JSON ({"name", "levels", "matrix"}) or from a CSV/whitespace
/// matrix of level indices, one run per line.
inline OrthogonalArray array_from_text(const std::string& text, const std::string& name) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      auto document = nlohmann::json::parse(text);
      return OrthogonalArray(document.value("name", name),
                             document.at("levels").get<std::size_t>(),
                             document.at("matrix").get<std::vector<OrthogonalArray::Row>>());
    } catch (const nlohmann::json::exception& e) {
      fail_validation("malformed array document '" + name + "': " + e.what());
    }
  }
  std::vector<OrthogonalArray::Row> rows;
  std::istringstream lines(text);
  std::string line;
  LevelIndex max_level = 0;
  while (std::getline(lines, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream cells(line);
    OrthogonalArray::Row row;
    std::string cell;
    while (cells >> cell) {
      const double value = csv::parse_number(cell, "array entry");
      if (value < 1 || value != static_cast<double>(static_cast<LevelIndex>(value))) {
        fail_validation("array '" + name + "' entry '" + cell + "' is not a level index");
      }
      row.push_back(static_cast<LevelIndex>(value));
      max_level = std::max(max_level, row.back());
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return OrthogonalArray(name, max_level, std::move(rows));
}

}  // namespace taguchi

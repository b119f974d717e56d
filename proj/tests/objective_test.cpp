#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "taguchi/objective.hpp"
#include "test_support.hpp"

namespace taguchi {
namespace {

constexpr int kCases = 1000;

TEST(Scale, LogOfTrainingTime) {
  const double scaled = scale(Log10Scaler{1000.0}, 3284.64);
  EXPECT_NEAR(scaled, 0.0035165, 1e-7);  // log10(3284.64) = 3.51649
  EXPECT_NEAR(scaled, 0.0035, 5e-5);
  // natural log would print 0.0081
  EXPECT_GT(std::abs(std::log(3284.64) / 1000.0 - 0.0035), 1e-3);
}

TEST(Scale, VariantsAndDomain) {
  EXPECT_EQ(scale(IdentityScaler{}, 0.0023), 0.0023);
  EXPECT_EQ(scale(Log10Scaler{1000.0}, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(scale(AffineScaler{2.0, 0.5}, 1.0), 2.5);
  EXPECT_DOUBLE_EQ(scale(MinMaxScaler{10.0, 20.0}, 15.0), 0.5);
  EXPECT_EQ(scale(MinMaxScaler{10.0, 20.0}, 25.0), 1.0);
  EXPECT_EQ(scale(MinMaxScaler{10.0, 20.0}, 5.0), 0.0);
  EXPECT_THROW(scale(Log10Scaler{1000.0}, 0.0), Error);
  EXPECT_THROW(scale(Log10Scaler{1000.0}, -3.0), Error);
  EXPECT_THROW(scale(Log10Scaler{0.0}, 10.0), Error);
  EXPECT_THROW(scale(MinMaxScaler{1.0, 1.0}, 1.0), Error);
  EXPECT_THROW(scale(IdentityScaler{}, -0.1), Error);
  EXPECT_THROW(scale(Log10Scaler{1000.0}, 0.5), Error);  // negative result
}

TEST(Aggregate, BiObjectiveWorkedExample) {
  const auto spec = preset_error_and_time(0.8);
  const double j = aggregate(spec, {{"error", 0.0023}, {"time", 3284.64}});
  EXPECT_NEAR(j, 0.001970, 5e-7);
  EXPECT_NEAR(j, 0.0020, 5e-5);
}

TEST(Aggregate, SingleObjectiveIsExact) {
  const auto spec = preset_single_error();
  EXPECT_EQ(aggregate(spec, {{"error", 0.0144}}), 0.0144);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < kCases; ++i) {
    const double e = u(rng);
    EXPECT_EQ(aggregate(spec, {{"error", e}}), e);
  }
}

TEST(Aggregate, ZeroVector) {
  EXPECT_EQ(aggregate(preset_error_and_time(0.8), {{"error", 0.0}, {"time", 1.0}}), 0.0);
}

TEST(Aggregate, MissingObjectiveIsNamed) {
  try {
    aggregate(preset_error_and_time(0.8), {{"error", 0.1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'time'"), std::string::npos);
  }
}

TEST(Aggregate, OtherNorms) {
  const std::vector<ObjectiveSpec> halves = {{"a", IdentityScaler{}, 0.5}, {"b", IdentityScaler{}, 0.5}};
  const ObjectiveValues raw = {{"a", 0.2}, {"b", 0.6}};
  EXPECT_DOUBLE_EQ(aggregate(NormSpec(halves, PNorm{1.0}), raw), 0.4);
  EXPECT_DOUBLE_EQ(aggregate(NormSpec(halves, MaxNorm{}), raw), 0.3);
  EXPECT_NEAR(aggregate(NormSpec(halves, PNorm{3.0}), raw), std::cbrt(0.001 + 0.027), 1e-15);
  EXPECT_THROW(NormSpec(halves, PNorm{0.5}), Error);
}

TEST(Presets, Weights) {
  const auto bi = preset("error_and_time", 0.8);
  ASSERT_EQ(bi.objectives().size(), 2u);
  EXPECT_EQ(bi.objectives()[0].weight, 0.8);
  EXPECT_NEAR(bi.objectives()[1].weight, 0.2, 1e-15);
  EXPECT_TRUE(std::holds_alternative<Log10Scaler>(bi.objectives()[1].scaler));
  const auto single = preset("single_error");
  ASSERT_EQ(single.objectives().size(), 1u);
  EXPECT_EQ(single.objectives()[0].weight, 1.0);
  const auto even = preset_error_and_time(0.5);
  EXPECT_EQ(even.objectives()[0].weight, 0.5);
  EXPECT_EQ(even.objectives()[1].weight, 0.5);
  EXPECT_THROW(preset_error_and_time(0.0), Error);
  EXPECT_THROW(preset_error_and_time(1.0), Error);
  EXPECT_THROW(preset_error_and_time(1.5), Error);
  EXPECT_THROW(preset("accuracy"), Error);
}

TEST(NormSpecJson, RoundTrip) {
  const auto spec = preset_error_and_time(0.7);
  const auto again = norm_spec_from_json(nlohmann::json::parse(to_json(spec).dump()));
  EXPECT_EQ(to_json(again).dump(), to_json(spec).dump());
  const auto parsed = norm_spec_from_json(nlohmann::json::parse(
      R"({"objectives":[{"name":"error","weight":1}],"norm":{"p":2}})"));
  EXPECT_EQ(aggregate(parsed, {{"error", 0.25}}), 0.25);
  EXPECT_THROW(norm_spec_from_json(nlohmann::json::parse(
                   R"({"objectives":[{"name":"e","weight":0.5,"scaler":{"type":"cube"}}]})")),
               Error);
}

// Properties -------------------------------------------------------------------

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> raw(m);
  for (auto& w : raw) w = u(rng);
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  for (auto& w : raw) w /= total;
  // absorb rounding in the last weight so the sum is 1 to within an ulp or two
  raw.back() = 1.0 - std::accumulate(raw.begin(), raw.end() - 1, 0.0);
  return raw;
}

ScalerSpec random_monotone_scaler(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0: return IdentityScaler{};
    case 1: return Log10Scaler{1.0 + static_cast<double>(rng() % 1000)};
    case 2: return AffineScaler{0.1 + static_cast<double>(rng() % 50) / 10.0, static_cast<double>(rng() % 5)};
    default: return MinMaxScaler{0.0, 5.0 + static_cast<double>(rng() % 20)};
  }
}

TEST(ObjectiveProperties, WeightSumValidation) {
  std::mt19937_64 rng(17);
  const double offsets[] = {0.0, 0.0, 1e-10, -1e-10, 1e-6, -1e-6, 0.01, -0.01};
  int accepted = 0;
  int rejected = 0;
  for (int i = 0; i < kCases; ++i) {
    const std::size_t m = 2 + rng() % 5;
    auto weights = random_weights(rng, m);
    const double offset = offsets[rng() % std::size(offsets)];
    weights.back() += offset;
    std::vector<ObjectiveSpec> objectives;
    for (std::size_t j = 0; j < m; ++j) {
      objectives.push_back({"o" + std::to_string(j), IdentityScaler{}, weights[j]});
    }
    if (offset == 0.0) {
      EXPECT_NO_THROW(NormSpec(objectives, PNorm{2.0}));
      ++accepted;
    } else {
      EXPECT_THROW(NormSpec(objectives, PNorm{2.0}), Error) << "offset " << offset;
      ++rejected;
    }
  }
  EXPECT_GT(accepted, 100);
  EXPECT_GT(rejected, 100);
}

TEST(ObjectiveProperties, Monotone) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(1.0, 100.0);
  std::uniform_real_distribution<double> bump(0.0, 50.0);
  for (int i = 0; i < kCases; ++i) {
    const std::size_t m = 1 + rng() % 4;
    const auto weights = random_weights(rng, m);
    std::vector<ObjectiveSpec> objectives;
    ObjectiveValues raw;
    for (std::size_t j = 0; j < m; ++j) {
      const std::string name = "o" + std::to_string(j);
      objectives.push_back({name, random_monotone_scaler(rng), weights[j]});
      raw[name] = u(rng);
    }
    const NormKind norm = rng() % 3 == 0 ? NormKind{MaxNorm{}} : NormKind{PNorm{1.0 + static_cast<double>(rng() % 3)}};
    const NormSpec spec(objectives, norm);
    const double before = aggregate(spec, raw);
    auto raised = raw;
    raised["o" + std::to_string(rng() % m)] += bump(rng);
    EXPECT_GE(aggregate(spec, raised), before);
  }
}

TEST(ObjectiveProperties, TwoNormHomogeneity) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_real_distribution<double> factor(0.01, 100.0);
  for (int i = 0; i < kCases; ++i) {
    const std::size_t m = 1 + rng() % 5;
    const auto weights = random_weights(rng, m);
    std::vector<ObjectiveSpec> objectives;
    ObjectiveValues raw;
    ObjectiveValues scaled;
    const double c = factor(rng);
    for (std::size_t j = 0; j < m; ++j) {
      const std::string name = "o" + std::to_string(j);
      objectives.push_back({name, IdentityScaler{}, weights[j]});
      raw[name] = u(rng);
      scaled[name] = c * raw[name];
    }
    const NormSpec spec(objectives, PNorm{2.0});
    const double j0 = aggregate(spec, raw);
    EXPECT_NEAR(aggregate(spec, scaled), c * j0, 1e-12 * std::max(1.0, c * j0));
  }
}

// Ranks runs by J under pre-normalization weights u (normalized here).
std::vector<std::size_t> order_by_j(const std::vector<ObjectiveValues>& runs,
                                    const std::vector<double>& unnormalized,
                                    const std::vector<ScalerSpec>& scalers) {
  const double total = std::accumulate(unnormalized.begin(), unnormalized.end(), 0.0);
  std::vector<ObjectiveSpec> objectives;
  double used = 0.0;
  for (std::size_t j = 0; j < unnormalized.size(); ++j) {
    double w = j + 1 == unnormalized.size() ? 1.0 - used : unnormalized[j] / total;
    used += w;
    objectives.push_back({"o" + std::to_string(j), scalers[j], w});
  }
  const NormSpec spec(objectives, PNorm{2.0});
  std::vector<double> js;
  for (const auto& run : runs) js.push_back(aggregate(spec, run));
  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return js[a] < js[b]; });
  return order;
}

TEST(ObjectiveProperties, ArgminInvariantUnderCommonWeightScale) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> scale_by(0.1, 10.0);
  for (int i = 0; i < kCases; ++i) {
    const std::size_t m = 1 + rng() % 3;
    std::vector<double> weights(m);
    for (auto& w : weights) w = 0.1 + u(rng);
    std::vector<ScalerSpec> scalers(m, IdentityScaler{});
    std::vector<ObjectiveValues> runs(8);
    for (auto& run : runs) {
      for (std::size_t j = 0; j < m; ++j) run["o" + std::to_string(j)] = u(rng);
    }
    const double c = scale_by(rng);
    auto scaled = weights;
    for (auto& w : scaled) w *= c;
    const auto base = order_by_j(runs, weights, scalers);
    EXPECT_EQ(order_by_j(runs, scaled, scalers).front(), base.front());
  }
}

TEST(ObjectiveProperties, ArgminInvariantUnderPositiveAffineMap) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < kCases; ++i) {
    std::vector<double> js(16);
    for (auto& j : js) j = u(rng);
    const double a = 0.01 + 10.0 * u(rng);
    const double b = u(rng) - 0.5;
    std::vector<double> mapped;
    for (double j : js) mapped.push_back(a * j + b);
    EXPECT_EQ(std::min_element(mapped.begin(), mapped.end()) - mapped.begin(),
              std::min_element(js.begin(), js.end()) - js.begin());
  }
}

TEST(ObjectiveProperties, FixtureOrderingSurvivesWeightScale) {
  const auto table = testing::printed_table();
  std::vector<ObjectiveValues> runs;
  for (std::size_t r = 0; r < 16; ++r) {
    runs.push_back({{"o0", table[r].second.train_error}, {"o1", table[r].second.train_time}});
  }
  const std::vector<ScalerSpec> scalers = {IdentityScaler{}, Log10Scaler{1000.0}};
  const auto base = order_by_j(runs, {0.8, 0.2}, scalers);
  for (double c : {0.001, 0.5, 3.0, 1000.0}) {
    EXPECT_EQ(order_by_j(runs, {0.8 * c, 0.2 * c}, scalers), base) << "c=" << c;
  }
  // best training run under either objective is run 8
  EXPECT_EQ(base.front(), 8u);
}

}  // namespace
}  // namespace taguchi

#pragma once

// Analytic stand-ins for an expensive training run. Each function maps a full
// assignment to train/test measurements of "error" and "time"; observations
// add seeded Gaussian noise to the error only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "taguchi/design_space.hpp"
#include "taguchi/error.hpp"
#include "taguchi/objective.hpp"

namespace taguchi {

struct SyntheticSpec {
  std::string function = "additive";
  std::uint64_t seed = 0;
  double noise = 0.0;  // standard deviation of the additive error noise
};

inline const std::vector<std::string>& synthetic_functions() {
  static const std::vector<std::string> ids = {"additive", "random_additive", "constant",
                                               "cnn_surrogate"};
  return ids;
}

/// splitmix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Per-run seed; depends only on the global seed and the run id.
inline std::uint64_t run_seed(std::uint64_t global_seed, std::size_t run_id) {
  return mix_seed(mix_seed(global_seed) ^ static_cast<std::uint64_t>(run_id));
}

namespace detail {

inline double level_number(const DesignSpace& space, std::size_t k, LevelIndex level) {
  if (auto number = space.factor(k).level(level).as_number()) return *number;
  return static_cast<double>(level);
}

/// Value of the named factor, or `fallback` when the space has no such factor
/// or its level is not numeric.
inline double named(const DesignSpace& space, std::span<const LevelIndex> levels,
                    const std::string& name, double fallback) {
  auto k = space.position(name);
  if (!k) return fallback;
  if (auto number = space.factor(*k).level(levels[*k]).as_number()) return *number;
  return fallback;
}

inline Measurements error_and_time(double train_error, double test_error, double time) {
  return {{"train", {{"error", train_error}, {"time", time}}},
          {"test", {{"error", test_error}, {"time", time}}}};
}

}  // namespace detail

/// Effect of level `level` of factor `k` in the random additive function:
/// uniform in [0, 1), fixed by the seed.
inline double random_additive_effect(std::uint64_t seed, std::size_t k, LevelIndex level) {
  std::mt19937_64 rng(mix_seed(seed ^ mix_seed(k * 1000003ULL + level)));
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Noise-free measurements of a synthetic function.
///
///  - additive: error = sum of the numeric level values (level index for labels)
///  - random_additive: error = sum of per-level uniform effects drawn from the seed
///  - constant: error = 0.05 everywhere
///  - cnn_surrogate: error falls with effective passes (epochs x sampling) and
///    depth with diminishing returns, is quadratic in log learning rate and
///    log batch size around an interior optimum; time grows with the work done.
///    Test error adds a generalization gap. Missing factors take mid-range defaults.
///
/// Every function reports time >= 1 so log-scaled time stays non-negative.
inline Measurements synthetic_truth(const SyntheticSpec& spec, const DesignSpace& space,
                                    std::span<const LevelIndex> levels) {
  if (levels.size() != space.size()) fail_validation("synthetic: level count mismatch");
  if (spec.function == "additive") {
    double sum = 0.0;
    for (std::size_t k = 0; k < space.size(); ++k) sum += detail::level_number(space, k, levels[k]);
    return detail::error_and_time(sum, sum, 1.0);
  }
  if (spec.function == "random_additive") {
    double sum = 0.0;
    for (std::size_t k = 0; k < space.size(); ++k) {
      sum += random_additive_effect(spec.seed, k, levels[k]);
    }
    return detail::error_and_time(sum, sum, 1.0);
  }
  if (spec.function == "constant") return detail::error_and_time(0.05, 0.05, 1.0);
  if (spec.function == "cnn_surrogate") {
    const double lr = detail::named(space, levels, "lr", 0.05);
    const double epochs = detail::named(space, levels, "epochs", 120.0);
    const double sampling = detail::named(space, levels, "sampling", 1.0);
    const double depth = detail::named(space, levels, "backbone", 56.0);
    const double batch = detail::named(space, levels, "batch", 64.0);
    if (lr <= 0 || epochs <= 0 || sampling <= 0 || depth <= 0 || batch <= 0) {
      fail_validation("cnn_surrogate needs positive lr, epochs, sampling, backbone and batch");
    }
    const double passes = epochs * sampling;
    const double fit = 0.25 * std::exp(-passes / 45.0);
    const double lr_term = 0.01 * std::pow(std::log10(lr / 0.08), 2.0);
    const double depth_term = 0.012 * std::sqrt(20.0 / depth);
    const double batch_term = 0.002 * std::pow(std::log2(batch / 64.0), 2.0);
    const double train_error = 0.001 + fit + lr_term + depth_term + batch_term;
    const double test_error =
        train_error + 0.05 + 0.02 * std::sqrt(20.0 / depth) + 0.01 * (1.0 - std::min(sampling, 1.0));
    const double time =
        std::max(1.0, 0.3 * epochs * sampling * depth * std::pow(128.0 / batch, 0.3));
    return detail::error_and_time(train_error, test_error, time);
  }
  fail_validation("unknown synthetic function '" + spec.function + "'");
}

/// One noisy observation; the noise stream is seeded by (spec.seed, run_id).
inline Measurements synthetic_observe(const SyntheticSpec& spec, const DesignSpace& space,
                                      std::span<const LevelIndex> levels, std::size_t run_id) {
  auto measurements = synthetic_truth(spec, space, levels);
  if (spec.noise > 0.0) {
    std::mt19937_64 rng(run_seed(spec.seed, run_id));
    std::normal_distribution<double> gaussian(0.0, spec.noise);
    for (auto& [set, values] : measurements) {
      values["error"] = std::max(0.0, values["error"] + gaussian(rng));
    }
  }
  return measurements;
}

}  // namespace taguchi

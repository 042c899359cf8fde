#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "asanakit/classifiers/model.hpp"
#include "asanakit/dataset.hpp"

namespace asanakit::ml {

struct IntRange {
  std::int64_t lo;
  std::int64_t hi;  // inclusive
};

struct RealRange {
  double lo;
  double hi;
  bool log_scale = false;
};

struct Choice {
  std::vector<ParamValue> values;
};

using ParamDistribution = std::variant<IntRange, RealRange, Choice>;

enum class Scoring { Accuracy };

struct SearchSpec {
  Family base_family = Family::GBDT;
  Hyperparams fixed;  // applied to every trial before sampling
  std::map<std::string, ParamDistribution> param_distributions;
  std::size_t n_iter = 10;
  std::size_t cv_folds = 5;
  std::uint64_t seed = 42;
  Scoring scoring = Scoring::Accuracy;
};

struct SearchTrial {
  ModelSpec spec;
  double accuracy = 0.0;

  bool operator==(const SearchTrial&) const = default;
};

struct SearchResult {
  ModelSpec best_spec;
  double best_cv_accuracy = 0.0;
  std::vector<SearchTrial> trials;
};

inline ParamValue sample(const ParamDistribution& dist, std::mt19937_64& rng) {
  return std::visit(
      [&](const auto& d) -> ParamValue {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, IntRange>) {
          return std::uniform_int_distribution<std::int64_t>(d.lo, d.hi)(rng);
        } else if constexpr (std::is_same_v<T, RealRange>) {
          if (d.log_scale)
            return std::exp(std::uniform_real_distribution<double>(std::log(d.lo), std::log(d.hi))(rng));
          return std::uniform_real_distribution<double>(d.lo, d.hi)(rng);
        } else {
          if (d.values.empty()) throw Error(ErrorCode::InvalidHyperparam, "empty choice set");
          return d.values[std::uniform_int_distribution<std::size_t>(0, d.values.size() - 1)(rng)];
        }
      },
      dist);
}

/// Mean accuracy of `spec` over stratified folds.
inline double cross_val_accuracy(const ModelSpec& spec, const Dataset& data,
                                 const std::vector<std::size_t>& folds, std::size_t k) {
  double total = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < data.size(); ++i) (folds[i] == f ? test_idx : train_idx).push_back(i);
    const auto model = train(spec, data.subset(train_idx));
    std::size_t correct = 0;
    for (auto i : test_idx)
      if (predict(model, data.samples[i].features).label == data.samples[i].label) ++correct;
    total += static_cast<double>(correct) / static_cast<double>(test_idx.size());
  }
  return total / static_cast<double>(k);
}

/// Random hyperparameter search scored by stratified k-fold accuracy. Trials
/// are sampled up front in parameter-name order; the first best trial wins.
inline SearchResult random_search_cv(const SearchSpec& search, const Dataset& data) {
  if (search.n_iter < 1) throw Error(ErrorCode::InvalidHyperparam, "n_iter must be >= 1");
  const auto folds = stratified_folds(data, search.cv_folds, search.seed);
  std::mt19937_64 rng(search.seed);

  SearchResult result;
  for (std::size_t it = 0; it < search.n_iter; ++it) {
    ModelSpec spec;
    spec.family = search.base_family;
    spec.seed = search.seed;
    spec.hyperparams = search.fixed;
    for (const auto& [name, dist] : search.param_distributions) spec.hyperparams[name] = sample(dist, rng);
    validate(spec);
    result.trials.push_back({std::move(spec), 0.0});
  }
  for (auto& trial : result.trials) trial.accuracy = cross_val_accuracy(trial.spec, data, folds, search.cv_folds);

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.trials.size(); ++i)
    if (result.trials[i].accuracy > result.trials[best].accuracy) best = i;
  result.best_spec = result.trials[best].spec;
  result.best_cv_accuracy = result.trials[best].accuracy;
  return result;
}

}  // namespace asanakit::ml

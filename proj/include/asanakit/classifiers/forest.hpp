#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "asanakit/classifiers/tree.hpp"

namespace asanakit::ml {

/// Bagged CART trees with sqrt-feature subsampling; hard majority vote.
struct ForestModel {
  std::vector<DecisionTree> trees;
  std::size_t num_classes = 0;

  static ForestModel fit(const TrainingData& data, std::size_t n_estimators, TreeGrowth growth,
                         bool bootstrap, std::uint64_t seed) {
    ForestModel m;
    m.num_classes = data.num_classes;
    growth.max_features =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(data.x.cols))));
    GiniCriterion crit{data.y, data.num_classes, growth.min_samples_leaf};
    std::mt19937_64 master(seed);
    const std::size_t n = data.x.rows;
    for (std::size_t t = 0; t < n_estimators; ++t) {
      std::mt19937_64 rng(master());
      std::vector<std::size_t> rows(n);
      if (bootstrap) {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (auto& r : rows) r = pick(rng);
      } else {
        rows = all_rows(n);
      }
      m.trees.push_back(grow_tree(data.x, rows, crit, growth, &rng));
    }
    return m;
  }

  std::vector<double> scores(std::span<const double> x) const {
    std::vector<double> votes(num_classes, 0.0);
    for (const auto& t : trees) votes[argmax(t.leaf_value(x))] += 1.0;
    for (auto& v : votes) v /= static_cast<double>(trees.size());
    return votes;
  }
};

}  // namespace asanakit::ml

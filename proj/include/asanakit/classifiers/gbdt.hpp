#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "asanakit/classifiers/tree.hpp"

namespace asanakit::ml {

struct GbdtParams {
  std::size_t n_rounds = 100;
  std::size_t max_depth = 6;
  double learning_rate = 0.3;
  double subsample = 1.0;
  double lambda = 1.0;
  double min_child_weight = 1.0;
};

/// Multi-class gradient boosting: each round fits one regression tree per
/// class to the softmax cross-entropy gradients, with Newton leaf weights.
/// A round whose step would raise the training loss is shrunk by halving
/// until it does not (or dropped), so the loss history never increases.
struct GbdtModel {
  std::size_t num_classes = 0;
  std::vector<std::vector<DecisionTree>> rounds;  // leaf values already scaled
  std::vector<double> loss_history;                // [0] is the loss of the zero model

  static double mean_softmax_loss(const std::vector<double>& margins, std::size_t c_count,
                                  std::span<const std::size_t> y) {
    const std::size_t n = y.size();
    std::vector<double> z(c_count);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(margins.begin() + static_cast<std::ptrdiff_t>(i * c_count), c_count, z.begin());
      const double m = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (double v : z) sum += std::exp(v - m);
      loss += std::log(sum) + m - z[y[i]];
    }
    return loss / static_cast<double>(n);
  }

  static GbdtModel fit(const TrainingData& data, const GbdtParams& params, std::uint64_t seed) {
    const std::size_t n = data.x.rows, c_count = data.num_classes;
    GbdtModel m;
    m.num_classes = c_count;
    std::vector<double> margins(n * c_count, 0.0);
    double loss = mean_softmax_loss(margins, c_count, data.y);
    m.loss_history.push_back(loss);

    std::mt19937_64 rng(seed);
    std::vector<double> grad(n), hess(n), prob(c_count);
    std::vector<std::vector<double>> outputs(c_count, std::vector<double>(n));
    TreeGrowth growth;
    growth.max_depth = params.max_depth;
    growth.min_samples_split = 2;
    const auto all = all_rows(n);
    const auto sample_size =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(params.subsample * n)));

    for (std::size_t r = 0; r < params.n_rounds; ++r) {
      std::vector<std::size_t> rows = all;
      if (sample_size < n) {
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(sample_size);
        std::sort(rows.begin(), rows.end());
      }
      // Gradients for all classes come from the same pre-round margins.
      std::vector<std::vector<double>> g_all(c_count, std::vector<double>(n)),
          h_all(c_count, std::vector<double>(n));
      for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(margins.begin() + static_cast<std::ptrdiff_t>(i * c_count), c_count,
                    prob.begin());
        softmax_inplace(prob);
        for (std::size_t c = 0; c < c_count; ++c) {
          g_all[c][i] = prob[c] - (data.y[i] == c ? 1.0 : 0.0);
          h_all[c][i] = std::max(prob[c] * (1.0 - prob[c]), 1e-16);
        }
      }
      std::vector<DecisionTree> trees;
      for (std::size_t c = 0; c < c_count; ++c) {
        GradientCriterion crit{g_all[c], h_all[c], params.lambda, params.min_child_weight};
        trees.push_back(grow_tree(data.x, rows, crit, growth));
        for (std::size_t i = 0; i < n; ++i) outputs[c][i] = trees.back().leaf_value(data.x.row(i))[0];
      }

      double step = params.learning_rate;
      std::vector<double> candidate(margins.size());
      double next = loss;
      bool accepted = false;
      for (int halvings = 0; halvings <= 30; ++halvings, step *= 0.5) {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t c = 0; c < c_count; ++c)
            candidate[i * c_count + c] = margins[i * c_count + c] + step * outputs[c][i];
        next = mean_softmax_loss(candidate, c_count, data.y);
        if (next <= loss) {
          accepted = true;
          break;
        }
      }
      if (accepted) {
        for (auto& t : trees)
          for (auto& node : t.nodes) node.value[0] *= step;
        margins.swap(candidate);
        loss = next;
        m.rounds.push_back(std::move(trees));
      } else {
        m.rounds.emplace_back();
      }
      m.loss_history.push_back(loss);
    }
    return m;
  }

  std::vector<double> margin(std::span<const double> x) const {
    std::vector<double> z(num_classes, 0.0);
    for (const auto& round : rounds)
      for (std::size_t c = 0; c < round.size(); ++c) z[c] += round[c].leaf_value(x)[0];
    return z;
  }

  std::vector<double> scores(std::span<const double> x) const {
    auto z = margin(x);
    softmax_inplace(z);
    return z;
  }
};

}  // namespace asanakit::ml

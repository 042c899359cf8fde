#pragma once

#include <cmath>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "asanakit/classifiers/common.hpp"

namespace asanakit::ml {

/// Brute-force k-nearest-neighbours with uniform voting under a Minkowski
/// metric. Distance ties go to the lower training index, vote ties to the
/// lower class index.
struct KnnModel {
  std::size_t k = 5;
  double p = 2.0;
  FeatureMatrix x;
  std::vector<std::size_t> y;
  std::size_t num_classes = 0;

  static KnnModel fit(const TrainingData& data, std::size_t k, double p) {
    return {k, p, data.x, data.y, data.num_classes};
  }

  // Monotone in the true distance; the 1/p root is skipped.
  double powered_distance(std::span<const double> a, std::span<const double> b) const {
    double s = 0.0;
    if (p == 2.0) {
      for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
      }
    } else if (p == 1.0) {
      for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
    } else {
      for (std::size_t j = 0; j < a.size(); ++j) s += std::pow(std::abs(a[j] - b[j]), p);
    }
    return s;
  }

  std::vector<std::size_t> neighbors(std::span<const double> query) const {
    const std::size_t kk = std::min(k, x.rows);
    // Max-heap on (distance, index): the top is the worst of the kept set.
    std::priority_queue<std::pair<double, std::size_t>> heap;
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double d = powered_distance(query, x.row(i));
      if (heap.size() < kk) {
        heap.emplace(d, i);
      } else if (std::make_pair(d, i) < heap.top()) {
        heap.pop();
        heap.emplace(d, i);
      }
    }
    std::vector<std::size_t> out(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = heap.top().second;
      heap.pop();
    }
    return out;
  }

  std::vector<double> scores(std::span<const double> query) const {
    std::vector<double> votes(num_classes, 0.0);
    const auto nn = neighbors(query);
    for (auto i : nn) votes[y[i]] += 1.0;
    for (auto& v : votes) v /= static_cast<double>(nn.size());
    return votes;
  }
};

}  // namespace asanakit::ml

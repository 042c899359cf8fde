#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "asanakit/dataset.hpp"
#include "asanakit/error.hpp"

namespace asanakit::ml {

/// Dense row-major sample matrix.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
};

struct TrainingData {
  FeatureMatrix x;
  std::vector<std::size_t> y;
  std::size_t num_classes = 0;
};

inline void require_finite(std::span<const double> values) {
  for (double v : values)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, "feature value is not finite");
}

inline TrainingData to_training_data(const Dataset& d) {
  if (d.empty()) throw Error(ErrorCode::SingleClassDataset, "training set is empty");
  TrainingData t;
  t.num_classes = d.num_classes();
  const std::size_t cols = d.samples.front().features.size();
  t.x = FeatureMatrix(d.size(), cols);
  t.y.reserve(d.size());
  std::vector<char> seen(t.num_classes, 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& s = d.samples[i];
    if (s.features.size() != cols)
      throw Error(ErrorCode::LengthMismatch, "samples disagree on feature length");
    require_finite(s.features.values);
    std::copy(s.features.values.begin(), s.features.values.end(), t.x.row(i).begin());
    t.y.push_back(s.label);
    seen.at(s.label) = 1;
  }
  if (std::count(seen.begin(), seen.end(), 1) < 2)
    throw Error(ErrorCode::SingleClassDataset, "need at least two classes with samples");
  return t;
}

/// First index of the maximum; NaN never wins.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

inline void softmax_inplace(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

/// Zero-mean unit-variance scaling fitted on the training split.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const FeatureMatrix& x) {
    Standardizer s;
    s.mean.assign(x.cols, 0.0);
    s.scale.assign(x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i)
      for (std::size_t j = 0; j < x.cols; ++j) s.mean[j] += x(i, j);
    for (auto& m : s.mean) m /= static_cast<double>(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
      for (std::size_t j = 0; j < x.cols; ++j) {
        const double d = x(i, j) - s.mean[j];
        s.scale[j] += d * d;
      }
    for (auto& v : s.scale) {
      v = std::sqrt(v / static_cast<double>(x.rows));
      if (v < 1e-12) v = 1.0;
    }
    return s;
  }

  void apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - mean[j]) / scale[j];
  }

  FeatureMatrix transform(const FeatureMatrix& x) const {
    FeatureMatrix out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.rows; ++i) apply(x.row(i), out.row(i));
    return out;
  }
};

}  // namespace asanakit::ml

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "asanakit/classifiers/common.hpp"

namespace asanakit::ml {

struct GaussianNbModel {
  std::vector<double> log_prior;  // -inf for classes absent from training
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> var;

  static GaussianNbModel fit(const TrainingData& data, double var_floor) {
    const std::size_t c_count = data.num_classes, f_count = data.x.cols;
    GaussianNbModel m;
    m.mean.assign(c_count, std::vector<double>(f_count, 0.0));
    m.var.assign(c_count, std::vector<double>(f_count, 0.0));
    std::vector<double> n(c_count, 0.0);
    for (std::size_t i = 0; i < data.x.rows; ++i) {
      n[data.y[i]] += 1.0;
      for (std::size_t j = 0; j < f_count; ++j) m.mean[data.y[i]][j] += data.x(i, j);
    }
    for (std::size_t c = 0; c < c_count; ++c)
      if (n[c] > 0)
        for (auto& v : m.mean[c]) v /= n[c];
    for (std::size_t i = 0; i < data.x.rows; ++i) {
      const auto c = data.y[i];
      for (std::size_t j = 0; j < f_count; ++j) {
        const double d = data.x(i, j) - m.mean[c][j];
        m.var[c][j] += d * d;
      }
    }
    m.log_prior.resize(c_count);
    const double total = static_cast<double>(data.x.rows);
    for (std::size_t c = 0; c < c_count; ++c) {
      for (auto& v : m.var[c]) v = std::max(n[c] > 0 ? v / n[c] : 0.0, var_floor);
      m.log_prior[c] = n[c] > 0 ? std::log(n[c] / total) : -std::numeric_limits<double>::infinity();
    }
    return m;
  }

  std::vector<double> log_joint(std::span<const double> x) const {
    std::vector<double> lj(log_prior.size());
    for (std::size_t c = 0; c < lj.size(); ++c) {
      double s = log_prior[c];
      if (std::isinf(s)) {
        lj[c] = s;
        continue;
      }
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - mean[c][j];
        s -= 0.5 * std::log(2.0 * std::numbers::pi * var[c][j]) + d * d / (2.0 * var[c][j]);
      }
      lj[c] = s;
    }
    return lj;
  }

  std::vector<double> scores(std::span<const double> x) const {
    auto lj = log_joint(x);
    softmax_inplace(lj);
    return lj;
  }
};

}  // namespace asanakit::ml

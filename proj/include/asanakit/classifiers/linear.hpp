#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "asanakit/classifiers/common.hpp"

namespace asanakit::ml {

/// Multinomial logistic regression on standardized inputs, fitted by
/// full-batch gradient descent. Parameters are laid out as the C x F weight
/// matrix (row-major) followed by the C biases.
struct LogisticModel {
  Standardizer scaler;
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::vector<double> params;
  std::size_t iterations = 0;

  /// Mean cross-entropy plus 0.5 * l2 * |W|^2; fills `grad` when given.
  static double loss_and_gradient(std::span<const double> params, const FeatureMatrix& xs,
                                  std::span<const std::size_t> y, std::size_t num_classes,
                                  double l2, std::vector<double>* grad) {
    const std::size_t f_count = xs.cols, c_count = num_classes;
    const std::size_t n = xs.rows;
    if (grad) grad->assign(params.size(), 0.0);
    std::vector<double> z(c_count);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = xs.row(i);
      for (std::size_t c = 0; c < c_count; ++c) {
        double s = params[c_count * f_count + c];
        for (std::size_t j = 0; j < f_count; ++j) s += params[c * f_count + j] * xi[j];
        z[c] = s;
      }
      softmax_inplace(z);
      loss -= std::log(std::max(z[y[i]], 1e-300));
      if (grad) {
        for (std::size_t c = 0; c < c_count; ++c) {
          const double d = z[c] - (c == y[i] ? 1.0 : 0.0);
          for (std::size_t j = 0; j < f_count; ++j) (*grad)[c * f_count + j] += d * xi[j];
          (*grad)[c_count * f_count + c] += d;
        }
      }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    double reg = 0.0;
    for (std::size_t k = 0; k < c_count * f_count; ++k) reg += params[k] * params[k];
    loss += 0.5 * l2 * reg;
    if (grad) {
      for (auto& g : *grad) g *= inv_n;
      for (std::size_t k = 0; k < c_count * f_count; ++k) (*grad)[k] += l2 * params[k];
    }
    return loss;
  }

  static LogisticModel fit(const TrainingData& data, std::size_t max_iter, double learning_rate,
                           double tol, double l2) {
    LogisticModel m;
    m.scaler = Standardizer::fit(data.x);
    m.num_classes = data.num_classes;
    m.num_features = data.x.cols;
    m.params.assign(m.num_classes * m.num_features + m.num_classes, 0.0);
    const FeatureMatrix xs = m.scaler.transform(data.x);
    std::vector<double> grad;
    double prev = loss_and_gradient(m.params, xs, data.y, m.num_classes, l2, &grad);
    for (m.iterations = 0; m.iterations < max_iter;) {
      for (std::size_t k = 0; k < m.params.size(); ++k) m.params[k] -= learning_rate * grad[k];
      ++m.iterations;
      const double cur = loss_and_gradient(m.params, xs, data.y, m.num_classes, l2, &grad);
      const bool converged = std::abs(prev - cur) < tol;
      prev = cur;
      if (converged) break;
    }
    return m;
  }

  std::vector<double> decision(std::span<const double> x) const {
    std::vector<double> xs(x.size());
    scaler.apply(x, xs);
    std::vector<double> z(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
      double s = params[num_classes * num_features + c];
      for (std::size_t j = 0; j < num_features; ++j) s += params[c * num_features + j] * xs[j];
      z[c] = s;
    }
    return z;
  }

  std::vector<double> scores(std::span<const double> x) const {
    auto z = decision(x);
    softmax_inplace(z);
    return z;
  }
};

/// One-vs-rest linear SVMs (hinge loss, L2 penalty) trained by seeded
/// stochastic subgradient descent with a decaying step size.
struct LinearSvmModel {
  Standardizer scaler;
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::vector<double> params;  // C x F weights, then C biases

  static LinearSvmModel fit(const TrainingData& data, std::size_t epochs, double lambda,
                            double eta0, std::uint64_t seed) {
    LinearSvmModel m;
    m.scaler = Standardizer::fit(data.x);
    m.num_classes = data.num_classes;
    m.num_features = data.x.cols;
    const std::size_t f_count = m.num_features;
    m.params.assign(m.num_classes * f_count + m.num_classes, 0.0);
    const FeatureMatrix xs = m.scaler.transform(data.x);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order = std::vector<std::size_t>(xs.rows);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t c = 0; c < m.num_classes; ++c) {
      double* w = m.params.data() + c * f_count;
      double& b = m.params[m.num_classes * f_count + c];
      std::size_t t = 0;
      for (std::size_t e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto i : order) {
          const double eta = eta0 / (1.0 + lambda * eta0 * static_cast<double>(t++));
          const double yi = data.y[i] == c ? 1.0 : -1.0;
          const auto xi = xs.row(i);
          double margin = b;
          for (std::size_t j = 0; j < f_count; ++j) margin += w[j] * xi[j];
          margin *= yi;
          const double shrink = 1.0 - eta * lambda;
          for (std::size_t j = 0; j < f_count; ++j) w[j] *= shrink;
          if (margin < 1.0) {
            for (std::size_t j = 0; j < f_count; ++j) w[j] += eta * yi * xi[j];
            b += eta * yi;
          }
        }
      }
    }
    return m;
  }

  std::vector<double> scores(std::span<const double> x) const {
    std::vector<double> xs(x.size());
    scaler.apply(x, xs);
    std::vector<double> z(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
      double s = params[num_classes * num_features + c];
      for (std::size_t j = 0; j < num_features; ++j) s += params[c * num_features + j] * xs[j];
      z[c] = s;
    }
    return z;
  }
};

}  // namespace asanakit::ml

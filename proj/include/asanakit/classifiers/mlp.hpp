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

/// One hidden ReLU layer with a softmax output. Flat parameter layout:
/// W1 (H x F), b1 (H), W2 (C x H), b2 (C).
struct MlpModel {
  Standardizer scaler;
  std::size_t num_features = 0;
  std::size_t hidden = 0;
  std::size_t num_classes = 0;
  std::vector<double> params;

  struct Shape {
    std::size_t f, h, c;
    std::size_t w1() const { return 0; }
    std::size_t b1() const { return h * f; }
    std::size_t w2() const { return h * f + h; }
    std::size_t b2() const { return h * f + h + c * h; }
    std::size_t size() const { return h * f + h + c * h + c; }
  };

  /// Mean cross-entropy over `rows` plus 0.5 * l2 * (|W1|^2 + |W2|^2).
  static double loss_and_gradient(std::span<const double> p, const Shape& s, const FeatureMatrix& xs,
                                  std::span<const std::size_t> rows, std::span<const std::size_t> y,
                                  double l2, std::vector<double>* grad) {
    if (grad) grad->assign(p.size(), 0.0);
    std::vector<double> hid(s.h), out(s.c), d_hid(s.h);
    double loss = 0.0;
    for (auto i : rows) {
      const auto xi = xs.row(i);
      for (std::size_t k = 0; k < s.h; ++k) {
        double a = p[s.b1() + k];
        const double* w = p.data() + s.w1() + k * s.f;
        for (std::size_t j = 0; j < s.f; ++j) a += w[j] * xi[j];
        hid[k] = a > 0.0 ? a : 0.0;
      }
      for (std::size_t c = 0; c < s.c; ++c) {
        double a = p[s.b2() + c];
        const double* w = p.data() + s.w2() + c * s.h;
        for (std::size_t k = 0; k < s.h; ++k) a += w[k] * hid[k];
        out[c] = a;
      }
      softmax_inplace(out);
      loss -= std::log(std::max(out[y[i]], 1e-300));
      if (!grad) continue;
      auto& g = *grad;
      std::fill(d_hid.begin(), d_hid.end(), 0.0);
      for (std::size_t c = 0; c < s.c; ++c) {
        const double d = out[c] - (c == y[i] ? 1.0 : 0.0);
        g[s.b2() + c] += d;
        double* gw = g.data() + s.w2() + c * s.h;
        const double* w = p.data() + s.w2() + c * s.h;
        for (std::size_t k = 0; k < s.h; ++k) {
          gw[k] += d * hid[k];
          d_hid[k] += d * w[k];
        }
      }
      for (std::size_t k = 0; k < s.h; ++k) {
        if (hid[k] <= 0.0) continue;
        g[s.b1() + k] += d_hid[k];
        double* gw = g.data() + s.w1() + k * s.f;
        for (std::size_t j = 0; j < s.f; ++j) gw[j] += d_hid[k] * xi[j];
      }
    }
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    loss *= inv_n;
    double reg = 0.0;
    for (std::size_t k = s.w1(); k < s.b1(); ++k) reg += p[k] * p[k];
    for (std::size_t k = s.w2(); k < s.b2(); ++k) reg += p[k] * p[k];
    loss += 0.5 * l2 * reg;
    if (grad) {
      auto& g = *grad;
      for (auto& v : g) v *= inv_n;
      for (std::size_t k = s.w1(); k < s.b1(); ++k) g[k] += l2 * p[k];
      for (std::size_t k = s.w2(); k < s.b2(); ++k) g[k] += l2 * p[k];
    }
    return loss;
  }

  static std::vector<double> init_params(const Shape& s, std::mt19937_64& rng) {
    std::vector<double> p(s.size(), 0.0);
    std::normal_distribution<double> w1(0.0, std::sqrt(2.0 / static_cast<double>(s.f)));
    std::normal_distribution<double> w2(0.0, std::sqrt(1.0 / static_cast<double>(s.h)));
    for (std::size_t k = s.w1(); k < s.b1(); ++k) p[k] = w1(rng);
    for (std::size_t k = s.w2(); k < s.b2(); ++k) p[k] = w2(rng);
    return p;
  }

  /// Mini-batch gradient descent with classical momentum.
  static MlpModel fit(const TrainingData& data, std::size_t hidden, std::size_t epochs,
                      std::size_t batch_size, double learning_rate, double momentum, double l2,
                      std::uint64_t seed) {
    MlpModel m;
    m.scaler = Standardizer::fit(data.x);
    m.num_features = data.x.cols;
    m.hidden = hidden;
    m.num_classes = data.num_classes;
    const Shape s = m.shape();
    std::mt19937_64 rng(seed);
    m.params = init_params(s, rng);
    const FeatureMatrix xs = m.scaler.transform(data.x);
    std::vector<std::size_t> order(xs.rows);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad, velocity(m.params.size(), 0.0);
    for (std::size_t e = 0; e < epochs; ++e) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::span<const std::size_t> batch(order.data() + start,
                                                 std::min(batch_size, order.size() - start));
        loss_and_gradient(m.params, s, xs, batch, data.y, l2, &grad);
        for (std::size_t k = 0; k < m.params.size(); ++k) {
          velocity[k] = momentum * velocity[k] - learning_rate * grad[k];
          m.params[k] += velocity[k];
        }
      }
    }
    return m;
  }

  Shape shape() const { return {num_features, hidden, num_classes}; }

  std::vector<double> scores(std::span<const double> x) const {
    const Shape s = shape();
    std::vector<double> xs(x.size()), hid(s.h), out(s.c);
    scaler.apply(x, xs);
    for (std::size_t k = 0; k < s.h; ++k) {
      double a = params[s.b1() + k];
      const double* w = params.data() + s.w1() + k * s.f;
      for (std::size_t j = 0; j < s.f; ++j) a += w[j] * xs[j];
      hid[k] = a > 0.0 ? a : 0.0;
    }
    for (std::size_t c = 0; c < s.c; ++c) {
      double a = params[s.b2() + c];
      const double* w = params.data() + s.w2() + c * s.h;
      for (std::size_t k = 0; k < s.h; ++k) a += w[k] * hid[k];
      out[c] = a;
    }
    softmax_inplace(out);
    return out;
  }
};

}  // namespace asanakit::ml

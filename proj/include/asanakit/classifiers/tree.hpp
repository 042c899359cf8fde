#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "asanakit/classifiers/common.hpp"

namespace asanakit::ml {

/// Binary tree stored as a flat node array. Samples with x[feature] <=
/// threshold go left. Leaves carry either a class distribution or a single
/// regression value.
struct DecisionTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> value;

    bool is_leaf() const { return feature < 0; }
  };

  std::vector<Node> nodes;

  const std::vector<double>& leaf_value(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                          : n.right);
    }
    return nodes[i].value;
  }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (!nodes[i].is_leaf()) {
        stack.emplace_back(static_cast<std::size_t>(nodes[i].left), d + 1);
        stack.emplace_back(static_cast<std::size_t>(nodes[i].right), d + 1);
      }
    }
    return best;
  }
};

struct TreeGrowth {
  std::size_t max_depth = 0;  // 0: unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // 0: all features at every split
};

/// Gini criterion over class counts.
struct GiniCriterion {
  using Acc = std::vector<double>;

  std::span<const std::size_t> labels;
  std::size_t num_classes;
  std::size_t min_samples_leaf;

  Acc empty() const { return Acc(num_classes, 0.0); }
  void add(Acc& a, std::size_t row) const { a[labels[row]] += 1.0; }
  void sub(Acc& a, std::size_t row) const { a[labels[row]] -= 1.0; }

  // sum_c n_c^2 / n; the weighted Gini decrease of a split equals the
  // children's sum minus the parent's.
  double score(const Acc& a, std::size_t n) const {
    double s = 0.0;
    for (double c : a) s += c * c;
    return s / static_cast<double>(n);
  }
  bool child_ok(const Acc&, std::size_t n) const { return n >= min_samples_leaf; }
  bool pure(const Acc& a, std::size_t n) const {
    return std::any_of(a.begin(), a.end(), [&](double c) { return c == static_cast<double>(n); });
  }
  // Zero-gain splits are taken so impure nodes keep splitting (XOR layouts).
  bool accept(double gain) const { return gain >= -1e-12; }
  std::vector<double> leaf(const Acc& a, std::size_t n) const {
    std::vector<double> p(a);
    for (auto& v : p) v /= static_cast<double>(n);
    return p;
  }
};

/// Second-order gradient criterion for boosted regression trees.
struct GradientCriterion {
  struct Acc {
    double g = 0.0;
    double h = 0.0;
  };

  std::span<const double> grad;
  std::span<const double> hess;
  double lambda = 1.0;
  double min_child_weight = 1.0;

  Acc empty() const { return {}; }
  void add(Acc& a, std::size_t row) const {
    a.g += grad[row];
    a.h += hess[row];
  }
  void sub(Acc& a, std::size_t row) const {
    a.g -= grad[row];
    a.h -= hess[row];
  }
  double score(const Acc& a, std::size_t) const { return a.g * a.g / (a.h + lambda); }
  bool child_ok(const Acc& a, std::size_t n) const { return n >= 1 && a.h >= min_child_weight; }
  bool pure(const Acc&, std::size_t n) const { return n < 2; }
  bool accept(double gain) const { return gain > 1e-12; }
  std::vector<double> leaf(const Acc& a, std::size_t) const { return {-a.g / (a.h + lambda)}; }
};

namespace detail {

template <class Criterion>
class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const std::size_t> rows, const Criterion& crit,
              const TreeGrowth& growth, std::mt19937_64* rng)
      : x_(x), rows_(rows), crit_(crit), growth_(growth), rng_(rng) {}

  DecisionTree build() {
    // Positions index into rows_, so bootstrap duplicates stay distinct.
    std::vector<std::vector<std::size_t>> sorted(x_.cols);
    for (std::size_t f = 0; f < x_.cols; ++f) {
      auto& s = sorted[f];
      s.resize(rows_.size());
      std::iota(s.begin(), s.end(), 0);
      std::stable_sort(s.begin(), s.end(), [&](std::size_t a, std::size_t b) {
        return x_(rows_[a], f) < x_(rows_[b], f);
      });
    }
    go_left_.assign(rows_.size(), 0);
    grow(std::move(sorted), 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  int grow(std::vector<std::vector<std::size_t>> sorted, std::size_t depth) {
    const std::size_t n = sorted.front().size();
    auto total = crit_.empty();
    for (auto pos : sorted.front()) crit_.add(total, rows_[pos]);

    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[id].value = crit_.leaf(total, n);

    const bool stop = crit_.pure(total, n) || n < growth_.min_samples_split ||
                      (growth_.max_depth > 0 && depth >= growth_.max_depth);
    if (stop) return id;

    const Split best = find_split(sorted, total, n);
    if (best.feature < 0) return id;

    const auto f = static_cast<std::size_t>(best.feature);
    for (auto pos : sorted[f]) go_left_[pos] = x_(rows_[pos], f) <= best.threshold ? 1 : 0;
    std::vector<std::vector<std::size_t>> left(x_.cols), right(x_.cols);
    for (std::size_t g = 0; g < x_.cols; ++g) {
      for (auto pos : sorted[g]) (go_left_[pos] ? left[g] : right[g]).push_back(pos);
    }
    sorted.clear();
    sorted.shrink_to_fit();

    tree_.nodes[id].feature = best.feature;
    tree_.nodes[id].threshold = best.threshold;
    const int l = grow(std::move(left), depth + 1);
    tree_.nodes[id].left = l;
    const int r = grow(std::move(right), depth + 1);
    tree_.nodes[id].right = r;
    return id;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> order(x_.cols);
    std::iota(order.begin(), order.end(), 0);
    if (growth_.max_features > 0 && growth_.max_features < x_.cols && rng_)
      std::shuffle(order.begin(), order.end(), *rng_);
    return order;
  }

  Split find_split(const std::vector<std::vector<std::size_t>>& sorted,
                   const typename Criterion::Acc& total, std::size_t n) {
    const double parent = crit_.score(total, n);
    const auto order = candidate_features();
    const std::size_t budget =
        growth_.max_features > 0 ? std::min(growth_.max_features, x_.cols) : x_.cols;

    Split best;
    bool found = false;
    // Feature subsets are drawn in blocks of `budget`; later blocks are only
    // consulted when no valid split turned up.
    for (std::size_t start = 0; start < order.size() && !found; start += budget) {
      std::vector<std::size_t> block(order.begin() + start,
                                     order.begin() + std::min(order.size(), start + budget));
      std::sort(block.begin(), block.end());
      for (auto f : block) {
        scan_feature(f, sorted[f], total, n, parent, best, found);
      }
    }
    return found ? best : Split{};
  }

  void scan_feature(std::size_t f, const std::vector<std::size_t>& order,
                    const typename Criterion::Acc& total, std::size_t n, double parent, Split& best,
                    bool& found) {
    auto left = crit_.empty();
    auto right = total;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t row = rows_[order[i]];
      crit_.add(left, row);
      crit_.sub(right, row);
      const double v = x_(row, f);
      const double next = x_(rows_[order[i + 1]], f);
      if (!(next > v)) continue;
      const std::size_t nl = i + 1, nr = n - nl;
      if (!crit_.child_ok(left, nl) || !crit_.child_ok(right, nr)) continue;
      const double gain = crit_.score(left, nl) + crit_.score(right, nr) - parent;
      if (!crit_.accept(gain)) continue;
      if (!found || gain > best.gain) {
        double thr = v + (next - v) / 2.0;
        if (!(thr < next)) thr = v;
        best = {static_cast<int>(f), thr, gain};
        found = true;
      }
    }
  }

  const FeatureMatrix& x_;
  std::span<const std::size_t> rows_;
  const Criterion& crit_;
  TreeGrowth growth_;
  std::mt19937_64* rng_;
  std::vector<char> go_left_;
  DecisionTree tree_;
};

}  // namespace detail

/// Greedy CART fit over the given training rows (rows may repeat).
template <class Criterion>
DecisionTree grow_tree(const FeatureMatrix& x, std::span<const std::size_t> rows,
                       const Criterion& criterion, const TreeGrowth& growth,
                       std::mt19937_64* rng = nullptr) {
  return detail::TreeBuilder<Criterion>(x, rows, criterion, growth, rng).build();
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

/// Classification tree: scores are the leaf's class frequencies.
struct TreeModel {
  DecisionTree tree;

  static TreeModel fit(const TrainingData& data, const TreeGrowth& growth) {
    const auto rows = all_rows(data.x.rows);
    GiniCriterion crit{data.y, data.num_classes, growth.min_samples_leaf};
    return {grow_tree(data.x, rows, crit, growth)};
  }

  std::vector<double> scores(std::span<const double> x) const { return tree.leaf_value(x); }
};

}  // namespace asanakit::ml

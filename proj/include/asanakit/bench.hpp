#pragma once

#include <chrono>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "asanakit/classifiers/model.hpp"
#include "asanakit/classifiers/search.hpp"
#include "asanakit/dataset.hpp"
#include "asanakit/metrics.hpp"

namespace asanakit {

/// One row of the model comparison: either a fixed spec or a random search
/// whose winner is refit on the whole training split.
struct BenchConfig {
  std::string model;
  std::string params;
  ml::ModelSpec spec;
  std::optional<ml::SearchSpec> search;
};

struct BenchRow {
  std::string model;
  std::string params;
  std::string spec;  // fitted spec, after search if any
  double accuracy = 0.0;
  double seconds = 0.0;
  std::size_t rank = 0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::size_t best = 0;
  ml::TrainedModel best_model;
  Evaluation best_evaluation;
};

inline ml::SearchSpec default_gbdt_search(std::uint64_t seed, std::size_t n_iter = 10, std::size_t folds = 5) {
  ml::SearchSpec s;
  s.base_family = ml::Family::GBDT;
  s.fixed = {{"booster", std::string("gbtree")}};
  s.param_distributions = {
      {"n_rounds", ml::Choice{{std::int64_t{30}, std::int64_t{50}, std::int64_t{100}}}},
      {"max_depth", ml::IntRange{2, 6}},
      {"learning_rate", ml::RealRange{0.05, 0.5, true}},
      {"subsample", ml::RealRange{0.6, 1.0, false}},
  };
  s.n_iter = n_iter;
  s.cv_folds = folds;
  s.seed = seed;
  return s;
}

/// The default benchmark rows, in table order.
inline std::vector<BenchConfig> default_bench_configs(std::uint64_t seed) {
  using ml::Family;
  auto spec = [seed](Family f, ml::Hyperparams h) {
    ml::ModelSpec s;
    s.family = f;
    s.hyperparams = std::move(h);
    s.seed = seed;
    return s;
  };
  const std::string mink = "minkowski", uni = "uniform";
  std::vector<BenchConfig> c;
  for (std::int64_t k : {3, 5, 9})
    c.push_back({"KNN", "neighbors:" + std::to_string(k) + ", weights:uniform, metric:minkowski",
                 spec(Family::KNN, {{"k", k}, {"weights", uni}, {"metric", mink}}), {}});
  for (std::int64_t d : {7, 10, 0})
    c.push_back({"RandomForest",
                 "estimators:30, criterion:gini, max_depth:" + (d ? std::to_string(d) : std::string("none")),
                 spec(Family::RandomForest, {{"n_estimators", std::int64_t{30}}, {"max_depth", d}}), {}});
  c.push_back({"ShallowNN", "hidden:100, activation:relu",
               spec(Family::MLP, {{"hidden", std::int64_t{100}}, {"activation", std::string("relu")}}), {}});
  c.push_back({"DeepNN", "hidden:500, activation:relu",
               spec(Family::MLP, {{"hidden", std::int64_t{500}}, {"activation", std::string("relu")}}), {}});
  c.push_back({"OneVsRest", "inner: MLP hidden:500",
               ml::ModelSpec::one_vs_rest(spec(Family::MLP, {{"hidden", std::int64_t{500}}}), seed), {}});
  c.push_back({"LinearSVM", "kernel:linear, loss:hinge",
               spec(Family::LinearSVM, {{"loss", std::string("hinge")}}), {}});
  for (const char* solver : {"newton-cg", "lbfgs"})
    c.push_back({"LogisticRegression", std::string("max_iter:2500, solver:") + solver,
                 spec(Family::LogisticRegression, {{"max_iter", std::int64_t{2500}}, {"solver", std::string(solver)}}),
                 {}});
  c.push_back({"GaussianNB", "distribution:normal", spec(Family::GaussianNB, {}), {}});
  c.push_back({"GBDT+RandomSearchCV", "booster:gbtree", spec(Family::GBDT, {}), default_gbdt_search(seed)});
  for (auto [leaf, split] : {std::pair<std::int64_t, std::int64_t>{1, 2}, {2, 2}, {1, 3}, {2, 3}})
    c.push_back({"DecisionTree",
                 "min_samples_leaf:" + std::to_string(leaf) + ", splitter:best, min_samples_split:" +
                     std::to_string(split),
                 spec(Family::DecisionTree, {{"min_samples_leaf", leaf}, {"min_samples_split", split}}), {}});
  return c;
}

using BenchProgress = std::function<void(const BenchRow&)>;

inline BenchResult run_bench(const std::vector<BenchConfig>& configs, const Dataset& train_set,
                             const Dataset& test_set, const BenchProgress& progress = {}) {
  if (configs.empty()) throw Error(ErrorCode::InvalidHyperparam, "no benchmark configurations");
  BenchResult out;
  std::vector<ml::TrainedModel> models;
  std::vector<Evaluation> evals;
  for (const auto& cfg : configs) {
    const auto t0 = std::chrono::steady_clock::now();
    ml::ModelSpec spec = cfg.spec;
    if (cfg.search) spec = ml::random_search_cv(*cfg.search, train_set).best_spec;
    auto model = ml::train(spec, train_set);
    auto eval = evaluate(model, test_set);
    BenchRow row{cfg.model, cfg.params, spec.describe(), eval.report.accuracy,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 0};
    if (progress) progress(row);
    out.rows.push_back(std::move(row));
    models.push_back(std::move(model));
    evals.push_back(std::move(eval));
  }
  for (auto& r : out.rows) {
    r.rank = 1;
    for (const auto& other : out.rows)
      if (other.accuracy > r.accuracy) ++r.rank;
  }
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    if (out.rows[i].accuracy > out.rows[out.best].accuracy) out.best = i;
  out.best_model = std::move(models[out.best]);
  out.best_evaluation = std::move(evals[out.best]);
  return out;
}

inline std::string render_bench(const BenchResult& r) {
  std::ostringstream os;
  os << std::left << std::setw(22) << "model" << std::setw(58) << "parameters" << std::right << std::setw(9)
     << "accuracy" << std::setw(6) << "rank" << std::setw(10) << "seconds" << '\n';
  os << std::fixed;
  for (const auto& row : r.rows)
    os << std::left << std::setw(22) << row.model << std::setw(58) << row.params << std::right
       << std::setprecision(3) << std::setw(9) << row.accuracy << std::setw(6) << row.rank
       << std::setprecision(2) << std::setw(10) << row.seconds << '\n';
  const auto& best = r.rows[r.best];
  os << "best: " << best.model << " " << best.spec << " accuracy " << std::setprecision(3) << best.accuracy
     << '\n';
  return os.str();
}

}  // namespace asanakit

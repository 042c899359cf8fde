#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "asanakit/classifiers/common.hpp"
#include "asanakit/classifiers/forest.hpp"
#include "asanakit/classifiers/gbdt.hpp"
#include "asanakit/classifiers/knn.hpp"
#include "asanakit/classifiers/linear.hpp"
#include "asanakit/classifiers/mlp.hpp"
#include "asanakit/classifiers/naive_bayes.hpp"
#include "asanakit/classifiers/tree.hpp"
#include "asanakit/dataset.hpp"

namespace asanakit::ml {

enum class Family {
  KNN,
  DecisionTree,
  RandomForest,
  GaussianNB,
  LogisticRegression,
  LinearSVM,
  MLP,
  GBDT,
  OneVsRest,
};

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::KNN: return "knn";
    case Family::DecisionTree: return "decision_tree";
    case Family::RandomForest: return "random_forest";
    case Family::GaussianNB: return "gaussian_nb";
    case Family::LogisticRegression: return "logistic_regression";
    case Family::LinearSVM: return "linear_svm";
    case Family::MLP: return "mlp";
    case Family::GBDT: return "gbdt";
    case Family::OneVsRest: return "one_vs_rest";
  }
  return "unknown";
}

inline Family parse_family(std::string_view s) {
  for (auto f : {Family::KNN, Family::DecisionTree, Family::RandomForest, Family::GaussianNB,
                 Family::LogisticRegression, Family::LinearSVM, Family::MLP, Family::GBDT,
                 Family::OneVsRest})
    if (to_string(f) == s) return f;
  if (s == "tree") return Family::DecisionTree;
  if (s == "forest" || s == "rf") return Family::RandomForest;
  if (s == "nb") return Family::GaussianNB;
  if (s == "logreg") return Family::LogisticRegression;
  if (s == "svm") return Family::LinearSVM;
  if (s == "ovr") return Family::OneVsRest;
  throw Error(ErrorCode::InvalidHyperparam, "unknown model family '" + std::string(s) + "'");
}

using ParamValue = std::variant<std::int64_t, double, std::string>;
using Hyperparams = std::map<std::string, ParamValue>;

inline std::string to_string(const ParamValue& v) {
  if (auto i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (auto d = std::get_if<double>(&v)) {
    std::ostringstream os;
    os << *d;
    return os.str();
  }
  return std::get<std::string>(v);
}

/// Parses "3" as an integer, "0.3" as a real and anything else as text.
inline ParamValue parse_param_value(const std::string& s) {
  std::int64_t i = 0;
  auto ri = std::from_chars(s.data(), s.data() + s.size(), i);
  if (ri.ec == std::errc() && ri.ptr == s.data() + s.size()) return i;
  double d = 0;
  if (asanakit::detail::parse_double(s, d)) return d;
  return s;
}

struct ModelSpec {
  Family family = Family::GBDT;
  Hyperparams hyperparams;
  std::uint64_t seed = 42;
  std::shared_ptr<const ModelSpec> inner;  // OneVsRest only

  static ModelSpec one_vs_rest(ModelSpec inner_spec, std::uint64_t seed = 42) {
    ModelSpec s;
    s.family = Family::OneVsRest;
    s.seed = seed;
    s.inner = std::make_shared<const ModelSpec>(std::move(inner_spec));
    return s;
  }

  friend bool operator==(const ModelSpec& a, const ModelSpec& b) {
    if (a.family != b.family || a.hyperparams != b.hyperparams || a.seed != b.seed) return false;
    if (!a.inner || !b.inner) return !a.inner && !b.inner;
    return *a.inner == *b.inner;
  }

  /// Human-readable "family(k=v, ...)" label.
  std::string describe() const {
    std::string s(to_string(family));
    if (family == Family::OneVsRest && inner) return s + "[" + inner->describe() + "]";
    s += "(";
    bool first = true;
    for (const auto& [k, v] : hyperparams) {
      if (!first) s += ", ";
      first = false;
      s += k + "=" + to_string(v);
    }
    return s + ")";
  }
};

namespace detail {

enum class ParamType { Int, Real, Text };

struct ParamRule {
  std::string_view name;
  ParamType type;
  double lo;
  double hi;
  bool lo_open;
  std::vector<std::string_view> choices;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline const std::vector<ParamRule>& rules_for(Family f) {
  using T = ParamType;
  static const std::map<Family, std::vector<ParamRule>> table{
      {Family::KNN,
       {{"k", T::Int, 1, kInf, false, {}},
        {"p", T::Real, 1, kInf, false, {}},
        {"weights", T::Text, 0, 0, false, {"uniform"}},
        {"metric", T::Text, 0, 0, false, {"minkowski"}}}},
      {Family::DecisionTree,
       {{"max_depth", T::Int, 0, kInf, false, {}},
        {"min_samples_split", T::Int, 2, kInf, false, {}},
        {"min_samples_leaf", T::Int, 1, kInf, false, {}},
        {"criterion", T::Text, 0, 0, false, {"gini"}},
        {"splitter", T::Text, 0, 0, false, {"best"}}}},
      {Family::RandomForest,
       {{"n_estimators", T::Int, 1, kInf, false, {}},
        {"max_depth", T::Int, 0, kInf, false, {}},
        {"min_samples_split", T::Int, 2, kInf, false, {}},
        {"min_samples_leaf", T::Int, 1, kInf, false, {}},
        {"bootstrap", T::Int, 0, 1, false, {}},
        {"criterion", T::Text, 0, 0, false, {"gini"}}}},
      {Family::GaussianNB, {{"var_floor", T::Real, 0, kInf, true, {}}}},
      {Family::LogisticRegression,
       {{"max_iter", T::Int, 1, kInf, false, {}},
        {"learning_rate", T::Real, 0, kInf, true, {}},
        {"tol", T::Real, 0, kInf, false, {}},
        {"l2", T::Real, 0, kInf, false, {}},
        {"solver", T::Text, 0, 0, false, {"gd", "newton-cg", "lbfgs"}}}},
      {Family::LinearSVM,
       {{"epochs", T::Int, 1, kInf, false, {}},
        {"lambda", T::Real, 0, kInf, true, {}},
        {"eta0", T::Real, 0, kInf, true, {}},
        {"loss", T::Text, 0, 0, false, {"hinge"}}}},
      {Family::MLP,
       {{"hidden", T::Int, 1, kInf, false, {}},
        {"epochs", T::Int, 1, kInf, false, {}},
        {"batch_size", T::Int, 1, kInf, false, {}},
        {"learning_rate", T::Real, 0, kInf, true, {}},
        {"momentum", T::Real, 0, 0.999999, false, {}},
        {"l2", T::Real, 0, kInf, false, {}},
        {"activation", T::Text, 0, 0, false, {"relu"}}}},
      {Family::GBDT,
       {{"n_rounds", T::Int, 1, kInf, false, {}},
        {"max_depth", T::Int, 1, kInf, false, {}},
        {"learning_rate", T::Real, 0, kInf, true, {}},
        {"subsample", T::Real, 0, 1, true, {}},
        {"lambda", T::Real, 0, kInf, false, {}},
        {"min_child_weight", T::Real, 0, kInf, false, {}},
        {"booster", T::Text, 0, 0, false, {"gbtree"}}}},
      {Family::OneVsRest, {}},
  };
  return table.at(f);
}

inline void check_param(Family f, const std::string& name, const ParamValue& v) {
  const auto& rules = rules_for(f);
  const auto it = std::find_if(rules.begin(), rules.end(), [&](const auto& r) { return r.name == name; });
  const std::string where = std::string(to_string(f)) + "." + name;
  if (it == rules.end()) throw Error(ErrorCode::InvalidHyperparam, "unknown hyperparameter " + where);
  if (it->type == ParamType::Text) {
    const auto* s = std::get_if<std::string>(&v);
    if (!s || std::find(it->choices.begin(), it->choices.end(), *s) == it->choices.end())
      throw Error(ErrorCode::InvalidHyperparam, where + " has unsupported value '" + to_string(v) + "'");
    return;
  }
  double x = 0;
  if (auto i = std::get_if<std::int64_t>(&v)) {
    x = static_cast<double>(*i);
  } else if (auto d = std::get_if<double>(&v)) {
    x = *d;
    if (it->type == ParamType::Int && std::floor(x) != x)
      throw Error(ErrorCode::InvalidHyperparam, where + " must be an integer");
  } else {
    throw Error(ErrorCode::InvalidHyperparam, where + " must be numeric");
  }
  const bool low_ok = it->lo_open ? x > it->lo : x >= it->lo;
  if (!std::isfinite(x) || !low_ok || x > it->hi)
    throw Error(ErrorCode::InvalidHyperparam, where + " out of range: " + to_string(v));
}

}  // namespace detail

inline void validate(const ModelSpec& spec) {
  for (const auto& [k, v] : spec.hyperparams) detail::check_param(spec.family, k, v);
  if (spec.family == Family::OneVsRest) {
    if (!spec.inner) throw Error(ErrorCode::InvalidHyperparam, "one_vs_rest needs an inner model");
    if (spec.inner->family == Family::OneVsRest)
      throw Error(ErrorCode::InvalidHyperparam, "one_vs_rest cannot wrap one_vs_rest");
    validate(*spec.inner);
  }
}

inline std::int64_t int_param(const ModelSpec& s, const std::string& name, std::int64_t def) {
  auto it = s.hyperparams.find(name);
  if (it == s.hyperparams.end()) return def;
  if (auto i = std::get_if<std::int64_t>(&it->second)) return *i;
  return static_cast<std::int64_t>(std::get<double>(it->second));
}

inline double real_param(const ModelSpec& s, const std::string& name, double def) {
  auto it = s.hyperparams.find(name);
  if (it == s.hyperparams.end()) return def;
  if (auto i = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*i);
  return std::get<double>(it->second);
}

struct TrainedModel;

struct OvrModel {
  // Two classes: a single inner model whose scores are used as-is.
  bool passthrough = false;
  std::vector<std::shared_ptr<const TrainedModel>> binaries;  // null: class absent in training
};

using FittedParams = std::variant<KnnModel, TreeModel, ForestModel, GaussianNbModel, LogisticModel,
                                  LinearSvmModel, MlpModel, GbdtModel, OvrModel>;

struct TrainedModel {
  ModelSpec spec;
  Kind kind = Kind::Hand;
  std::vector<std::string> class_names;
  std::size_t feature_length = 0;
  FittedParams fitted;
};

struct Prediction {
  std::size_t label = 0;
  std::vector<double> scores;
};

inline bool is_probabilistic(Family f) {
  return f == Family::GaussianNB || f == Family::LogisticRegression || f == Family::MLP ||
         f == Family::GBDT || f == Family::RandomForest || f == Family::DecisionTree ||
         f == Family::KNN;
}

inline TrainedModel train(const ModelSpec& spec, const Dataset& train_set);

inline std::vector<double> raw_scores(const TrainedModel& m, std::span<const double> x);

inline Prediction predict(const TrainedModel& m, std::span<const double> x) {
  if (x.size() != m.feature_length)
    throw Error(ErrorCode::LengthMismatch, "model expects " + std::to_string(m.feature_length) +
                                               " features, got " + std::to_string(x.size()));
  require_finite(x);
  Prediction p;
  p.scores = raw_scores(m, x);
  p.label = argmax(p.scores);
  return p;
}

inline Prediction predict(const TrainedModel& m, const FeatureVector& fv) {
  return predict(m, std::span<const double>(fv.values));
}

inline std::vector<double> raw_scores(const TrainedModel& m, std::span<const double> x) {
  return std::visit(
      [&](const auto& fitted) -> std::vector<double> {
        using T = std::decay_t<decltype(fitted)>;
        if constexpr (std::is_same_v<T, OvrModel>) {
          if (fitted.passthrough) return raw_scores(*fitted.binaries.front(), x);
          std::vector<double> s(fitted.binaries.size(), -std::numeric_limits<double>::infinity());
          for (std::size_t c = 0; c < s.size(); ++c)
            if (fitted.binaries[c]) s[c] = raw_scores(*fitted.binaries[c], x)[1];
          return s;
        } else {
          return fitted.scores(x);
        }
      },
      m.fitted);
}

inline TrainedModel train(const ModelSpec& spec, const Dataset& train_set) {
  validate(spec);
  TrainedModel model;
  model.spec = spec;
  model.kind = train_set.kind;
  model.class_names = train_set.class_names;

  if (spec.family == Family::OneVsRest) {
    auto data = to_training_data(train_set);  // class/finite checks
    model.feature_length = data.x.cols;
    OvrModel ovr;
    if (train_set.num_classes() == 2) {
      ovr.passthrough = true;
      ovr.binaries.push_back(std::make_shared<const TrainedModel>(train(*spec.inner, train_set)));
    } else {
      for (std::size_t c = 0; c < train_set.num_classes(); ++c) {
        Dataset binary{train_set.kind, {}, {"rest", train_set.class_names[c]}};
        binary.samples.reserve(train_set.size());
        bool any = false;
        for (const auto& s : train_set.samples) {
          const std::size_t label = s.label == c ? 1 : 0;
          any = any || label == 1;
          binary.samples.push_back({s.features, label, binary.class_names[label], s.source_id});
        }
        ovr.binaries.push_back(any ? std::make_shared<const TrainedModel>(train(*spec.inner, binary))
                                   : nullptr);
      }
    }
    model.fitted = std::move(ovr);
    return model;
  }

  const auto data = to_training_data(train_set);
  model.feature_length = data.x.cols;
  const auto seed = spec.seed;
  switch (spec.family) {
    case Family::KNN:
      model.fitted = KnnModel::fit(data, static_cast<std::size_t>(int_param(spec, "k", 5)),
                                   real_param(spec, "p", 2.0));
      break;
    case Family::DecisionTree: {
      TreeGrowth g;
      g.max_depth = static_cast<std::size_t>(int_param(spec, "max_depth", 0));
      g.min_samples_split = static_cast<std::size_t>(int_param(spec, "min_samples_split", 2));
      g.min_samples_leaf = static_cast<std::size_t>(int_param(spec, "min_samples_leaf", 1));
      model.fitted = TreeModel::fit(data, g);
      break;
    }
    case Family::RandomForest: {
      TreeGrowth g;
      g.max_depth = static_cast<std::size_t>(int_param(spec, "max_depth", 0));
      g.min_samples_split = static_cast<std::size_t>(int_param(spec, "min_samples_split", 2));
      g.min_samples_leaf = static_cast<std::size_t>(int_param(spec, "min_samples_leaf", 1));
      model.fitted = ForestModel::fit(data, static_cast<std::size_t>(int_param(spec, "n_estimators", 100)),
                                      g, int_param(spec, "bootstrap", 1) != 0, seed);
      break;
    }
    case Family::GaussianNB:
      model.fitted = GaussianNbModel::fit(data, real_param(spec, "var_floor", 1e-9));
      break;
    case Family::LogisticRegression:
      model.fitted = LogisticModel::fit(data, static_cast<std::size_t>(int_param(spec, "max_iter", 2500)),
                                        real_param(spec, "learning_rate", 0.5),
                                        real_param(spec, "tol", 1e-6), real_param(spec, "l2", 1e-4));
      break;
    case Family::LinearSVM:
      model.fitted = LinearSvmModel::fit(data, static_cast<std::size_t>(int_param(spec, "epochs", 20)),
                                         real_param(spec, "lambda", 1e-4),
                                         real_param(spec, "eta0", 0.1), seed);
      break;
    case Family::MLP:
      model.fitted = MlpModel::fit(data, static_cast<std::size_t>(int_param(spec, "hidden", 100)),
                                   static_cast<std::size_t>(int_param(spec, "epochs", 40)),
                                   static_cast<std::size_t>(int_param(spec, "batch_size", 32)),
                                   real_param(spec, "learning_rate", 0.01),
                                   real_param(spec, "momentum", 0.9), real_param(spec, "l2", 1e-4),
                                   seed);
      break;
    case Family::GBDT: {
      GbdtParams p;
      p.n_rounds = static_cast<std::size_t>(int_param(spec, "n_rounds", 100));
      p.max_depth = static_cast<std::size_t>(int_param(spec, "max_depth", 6));
      p.learning_rate = real_param(spec, "learning_rate", 0.3);
      p.subsample = real_param(spec, "subsample", 1.0);
      p.lambda = real_param(spec, "lambda", 1.0);
      p.min_child_weight = real_param(spec, "min_child_weight", 1.0);
      model.fitted = GbdtModel::fit(data, p, seed);
      break;
    }
    case Family::OneVsRest:
      break;
  }
  return model;
}

// ---------------------------------------------------------------------------
// Model files: a magic line followed by one JSON document.

inline constexpr std::string_view kModelMagic = "ASANAKIT-MODEL v";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline json spec_to_json(const ModelSpec& s) {
  json j;
  j["family"] = std::string(to_string(s.family));
  j["seed"] = s.seed;
  json params = json::object();
  for (const auto& [k, v] : s.hyperparams) std::visit([&](const auto& x) { params[k] = x; }, v);
  j["params"] = params;
  if (s.inner) j["inner"] = spec_to_json(*s.inner);
  return j;
}

inline ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.family = parse_family(j.at("family").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& [k, v] : j.at("params").items()) {
    if (v.is_number_integer())
      s.hyperparams[k] = v.get<std::int64_t>();
    else if (v.is_number())
      s.hyperparams[k] = v.get<double>();
    else
      s.hyperparams[k] = v.get<std::string>();
  }
  if (j.contains("inner")) s.inner = std::make_shared<const ModelSpec>(spec_from_json(j.at("inner")));
  return s;
}

inline json to_json(const Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }
inline Standardizer standardizer_from_json(const json& j) {
  return {j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
}

inline json to_json(const DecisionTree& t) {
  json feature = json::array(), threshold = json::array(), left = json::array(),
       right = json::array(), value = json::array();
  for (const auto& n : t.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}};
}

inline DecisionTree tree_from_json(const json& j) {
  DecisionTree t;
  const auto& feature = j.at("feature");
  t.nodes.resize(feature.size());
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    auto& n = t.nodes[i];
    n.feature = feature.at(i).get<int>();
    n.threshold = j.at("threshold").at(i).get<double>();
    n.left = j.at("left").at(i).get<int>();
    n.right = j.at("right").at(i).get<int>();
    n.value = j.at("value").at(i).get<std::vector<double>>();
    const int size = static_cast<int>(t.nodes.size());
    if (!n.is_leaf() && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i) ||
                         n.left >= size || n.right >= size))
      throw Error(ErrorCode::CorruptModel, "tree child index out of range");
  }
  if (t.nodes.empty()) throw Error(ErrorCode::CorruptModel, "empty tree");
  return t;
}

inline json matrix_to_json(const FeatureMatrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}
inline FeatureMatrix matrix_from_json(const json& j) {
  FeatureMatrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols) throw Error(ErrorCode::CorruptModel, "matrix size mismatch");
  return m;
}

// -inf (classes absent from training) is stored as null.
inline json reals_with_inf(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(std::isinf(x) ? json(nullptr) : json(x));
  return a;
}
inline std::vector<double> reals_with_inf_from_json(const json& j) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(x.is_null() ? -std::numeric_limits<double>::infinity() : x.get<double>());
  return v;
}

inline json model_to_json(const TrainedModel& m);
inline TrainedModel model_from_json(const json& j);

inline json fitted_to_json(const FittedParams& f) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, KnnModel>) {
          return {{"k", p.k}, {"p", p.p}, {"x", matrix_to_json(p.x)}, {"y", p.y}, {"num_classes", p.num_classes}};
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return {{"tree", to_json(p.tree)}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          json trees = json::array();
          for (const auto& t : p.trees) trees.push_back(to_json(t));
          return {{"trees", trees}, {"num_classes", p.num_classes}};
        } else if constexpr (std::is_same_v<T, GaussianNbModel>) {
          return {{"log_prior", reals_with_inf(p.log_prior)}, {"mean", p.mean}, {"var", p.var}};
        } else if constexpr (std::is_same_v<T, LogisticModel>) {
          return {{"scaler", to_json(p.scaler)}, {"num_classes", p.num_classes},
                  {"num_features", p.num_features}, {"params", p.params}, {"iterations", p.iterations}};
        } else if constexpr (std::is_same_v<T, LinearSvmModel>) {
          return {{"scaler", to_json(p.scaler)}, {"num_classes", p.num_classes},
                  {"num_features", p.num_features}, {"params", p.params}};
        } else if constexpr (std::is_same_v<T, MlpModel>) {
          return {{"scaler", to_json(p.scaler)}, {"num_features", p.num_features}, {"hidden", p.hidden},
                  {"num_classes", p.num_classes}, {"params", p.params}};
        } else if constexpr (std::is_same_v<T, GbdtModel>) {
          json rounds = json::array();
          for (const auto& r : p.rounds) {
            json trees = json::array();
            for (const auto& t : r) trees.push_back(to_json(t));
            rounds.push_back(trees);
          }
          return {{"num_classes", p.num_classes}, {"rounds", rounds}, {"loss_history", p.loss_history}};
        } else {
          json bins = json::array();
          for (const auto& b : p.binaries) bins.push_back(b ? model_to_json(*b) : json(nullptr));
          return {{"passthrough", p.passthrough}, {"binaries", bins}};
        }
      },
      f);
}

inline FittedParams fitted_from_json(Family family, const json& j, std::size_t feature_length,
                                     std::size_t num_classes) {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::CorruptModel, what);
  };
  switch (family) {
    case Family::KNN: {
      KnnModel m{j.at("k").get<std::size_t>(), j.at("p").get<double>(), matrix_from_json(j.at("x")),
                 j.at("y").get<std::vector<std::size_t>>(), j.at("num_classes").get<std::size_t>()};
      check(m.x.cols == feature_length && m.y.size() == m.x.rows && m.num_classes == num_classes && m.k >= 1,
            "knn payload inconsistent");
      for (auto y : m.y) check(y < num_classes, "knn label out of range");
      return m;
    }
    case Family::DecisionTree:
      return TreeModel{tree_from_json(j.at("tree"))};
    case Family::RandomForest: {
      ForestModel m;
      for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
      m.num_classes = j.at("num_classes").get<std::size_t>();
      check(!m.trees.empty() && m.num_classes == num_classes, "forest payload inconsistent");
      return m;
    }
    case Family::GaussianNB: {
      GaussianNbModel m{reals_with_inf_from_json(j.at("log_prior")),
                        j.at("mean").get<std::vector<std::vector<double>>>(),
                        j.at("var").get<std::vector<std::vector<double>>>()};
      check(m.log_prior.size() == num_classes && m.mean.size() == num_classes && m.var.size() == num_classes,
            "naive bayes payload inconsistent");
      return m;
    }
    case Family::LogisticRegression: {
      LogisticModel m;
      m.scaler = standardizer_from_json(j.at("scaler"));
      m.num_classes = j.at("num_classes").get<std::size_t>();
      m.num_features = j.at("num_features").get<std::size_t>();
      m.params = j.at("params").get<std::vector<double>>();
      m.iterations = j.at("iterations").get<std::size_t>();
      check(m.params.size() == m.num_classes * (m.num_features + 1) && m.num_features == feature_length,
            "logistic payload inconsistent");
      return m;
    }
    case Family::LinearSVM: {
      LinearSvmModel m;
      m.scaler = standardizer_from_json(j.at("scaler"));
      m.num_classes = j.at("num_classes").get<std::size_t>();
      m.num_features = j.at("num_features").get<std::size_t>();
      m.params = j.at("params").get<std::vector<double>>();
      check(m.params.size() == m.num_classes * (m.num_features + 1) && m.num_features == feature_length,
            "svm payload inconsistent");
      return m;
    }
    case Family::MLP: {
      MlpModel m;
      m.scaler = standardizer_from_json(j.at("scaler"));
      m.num_features = j.at("num_features").get<std::size_t>();
      m.hidden = j.at("hidden").get<std::size_t>();
      m.num_classes = j.at("num_classes").get<std::size_t>();
      m.params = j.at("params").get<std::vector<double>>();
      check(m.params.size() == m.shape().size() && m.num_features == feature_length, "mlp payload inconsistent");
      return m;
    }
    case Family::GBDT: {
      GbdtModel m;
      m.num_classes = j.at("num_classes").get<std::size_t>();
      for (const auto& r : j.at("rounds")) {
        std::vector<DecisionTree> trees;
        for (const auto& t : r) trees.push_back(tree_from_json(t));
        check(trees.empty() || trees.size() == m.num_classes, "gbdt round size mismatch");
        m.rounds.push_back(std::move(trees));
      }
      m.loss_history = j.at("loss_history").get<std::vector<double>>();
      return m;
    }
    case Family::OneVsRest: {
      OvrModel m;
      m.passthrough = j.at("passthrough").get<bool>();
      for (const auto& b : j.at("binaries"))
        m.binaries.push_back(b.is_null() ? nullptr : std::make_shared<const TrainedModel>(model_from_json(b)));
      check(m.passthrough ? m.binaries.size() == 1 && m.binaries[0] : m.binaries.size() == num_classes,
            "one-vs-rest payload inconsistent");
      return m;
    }
  }
  throw Error(ErrorCode::CorruptModel, "unknown family");
}

inline json model_to_json(const TrainedModel& m) {
  return {{"family", std::string(to_string(m.spec.family))},
          {"spec", spec_to_json(m.spec)},
          {"kind", std::string(to_string(m.kind))},
          {"class_names", m.class_names},
          {"feature_length", m.feature_length},
          {"fitted", fitted_to_json(m.fitted)}};
}

inline TrainedModel model_from_json(const json& j) {
  TrainedModel m;
  m.spec = spec_from_json(j.at("spec"));
  if (to_string(m.spec.family) != j.at("family").get<std::string>())
    throw Error(ErrorCode::CorruptModel, "family tag disagrees with spec");
  m.kind = parse_kind(j.at("kind").get<std::string>());
  m.class_names = j.at("class_names").get<std::vector<std::string>>();
  m.feature_length = j.at("feature_length").get<std::size_t>();
  m.fitted = fitted_from_json(m.spec.family, j.at("fitted"), m.feature_length, m.class_names.size());
  return m;
}

}  // namespace detail

inline std::string save_model(const TrainedModel& m) {
  std::string out(kModelMagic);
  out += std::to_string(kModelFormatVersion);
  out += '\n';
  out += detail::model_to_json(m).dump();
  out += '\n';
  return out;
}

inline TrainedModel load_model(std::string_view bytes) {
  const auto eol = bytes.find('\n');
  if (eol == std::string_view::npos || bytes.substr(0, kModelMagic.size()) != kModelMagic)
    throw Error(ErrorCode::CorruptModel, "missing model header");
  const auto version_text = bytes.substr(kModelMagic.size(), eol - kModelMagic.size());
  int version = 0;
  auto res = std::from_chars(version_text.data(), version_text.data() + version_text.size(), version);
  if (res.ec != std::errc() || res.ptr != version_text.data() + version_text.size())
    throw Error(ErrorCode::CorruptModel, "bad format version");
  if (version != kModelFormatVersion)
    throw Error(ErrorCode::VersionMismatch, "model format v" + std::to_string(version) +
                                                " is not supported (expected v1)");
  try {
    return detail::model_from_json(nlohmann::json::parse(bytes.substr(eol + 1)));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptModel) throw;
    throw Error(ErrorCode::CorruptModel, e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::CorruptModel, e.what());
  }
}

inline void save_model_file(const TrainedModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << save_model(m);
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

inline TrainedModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

}  // namespace asanakit::ml

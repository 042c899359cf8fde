#include <gtest/gtest.h>

#include "asanakit/classifiers/search.hpp"
#include "asanakit/synth.hpp"
#include "classifier_fixtures.hpp"

using namespace asanakit;
using namespace asanakit::ml;

namespace {

SearchSpec small_gbdt_search(std::size_t n_iter, std::uint64_t seed = 7) {
  SearchSpec s;
  s.base_family = Family::GBDT;
  s.param_distributions = {{"max_depth", IntRange{2, 4}},
                           {"n_rounds", Choice{{std::int64_t{5}, std::int64_t{10}}}},
                           {"learning_rate", RealRange{0.05, 0.5, true}}};
  s.n_iter = n_iter;
  s.cv_folds = 3;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(Sampling, RangesRespected) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto a = std::get<std::int64_t>(sample(IntRange{2, 6}, rng));
    EXPECT_GE(a, 2);
    EXPECT_LE(a, 6);
    const auto b = std::get<double>(sample(RealRange{0.05, 0.5, true}, rng));
    EXPECT_GE(b, 0.05);
    EXPECT_LE(b, 0.5);
    const auto c = std::get<std::int64_t>(sample(Choice{{std::int64_t{30}, std::int64_t{50}}}, rng));
    EXPECT_TRUE(c == 30 || c == 50);
  }
  EXPECT_THROW(sample(Choice{}, rng), Error);
}

TEST(Sampling, LogScaleCoversDecadesEvenly) {
  std::mt19937_64 rng(2);
  int low = 0;
  for (int i = 0; i < 4000; ++i) low += std::get<double>(sample(RealRange{0.01, 1.0, true}, rng)) < 0.1;
  EXPECT_NEAR(low / 4000.0, 0.5, 0.05);
}

TEST(RandomSearch, SingleTrialIsBest) {
  const auto d = testutil::blobs(60, 3, 3, 4);
  const auto r = random_search_cv(small_gbdt_search(1), d);
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_EQ(r.best_spec, r.trials[0].spec);
  EXPECT_EQ(r.best_cv_accuracy, r.trials[0].accuracy);
}

TEST(RandomSearch, DeterministicTrials) {
  const auto d = testutil::blobs(60, 3, 3, 4, 1.0);
  EXPECT_EQ(random_search_cv(small_gbdt_search(4), d).trials, random_search_cv(small_gbdt_search(4), d).trials);
}

TEST(RandomSearch, BestIsFirstMaximum) {
  const auto d = synth_mudra_dataset(20, 6.0, 3);
  const auto r = random_search_cv(small_gbdt_search(6), d);
  double best = -1;
  std::size_t first = 0;
  for (std::size_t i = 0; i < r.trials.size(); ++i)
    if (r.trials[i].accuracy > best) best = r.trials[i].accuracy, first = i;
  EXPECT_EQ(r.best_cv_accuracy, best);
  EXPECT_EQ(r.best_spec, r.trials[first].spec);
}

TEST(RandomSearch, FixedParamsApplied) {
  auto s = small_gbdt_search(3);
  s.fixed = {{"subsample", 0.8}};
  const auto r = random_search_cv(s, testutil::blobs(60, 3, 2, 4));
  for (const auto& t : r.trials) EXPECT_EQ(t.spec.hyperparams.at("subsample"), ParamValue(0.8));
}

TEST(RandomSearch, Errors) {
  const auto d = testutil::blobs(8, 2, 2, 4);  // 4 per class
  auto s = small_gbdt_search(2);
  s.cv_folds = 5;
  try {
    random_search_cv(s, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSamples);
  }
  s.cv_folds = 2;
  s.n_iter = 0;
  EXPECT_THROW(random_search_cv(s, d), Error);
  s.n_iter = 1;
  s.param_distributions["max_depth"] = IntRange{0, 0};
  try {
    random_search_cv(s, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidHyperparam);
  }
}

TEST(CrossValidation, PerfectOnSeparableData) {
  const auto d = testutil::blobs(90, 3, 3, 1, 10.0);
  const auto folds = stratified_folds(d, 3, 1);
  EXPECT_DOUBLE_EQ(cross_val_accuracy(testutil::spec_of(Family::KNN, {{"k", std::int64_t{1}}}), d, folds, 3), 1.0);
}

#include <gtest/gtest.h>

#include "asanakit/bench.hpp"
#include "asanakit/synth.hpp"
#include "classifier_fixtures.hpp"

using namespace asanakit;

TEST(Bench, DefaultConfigsAreValid) {
  const auto configs = default_bench_configs(42);
  EXPECT_EQ(configs.size(), 18u);
  std::size_t searched = 0;
  for (const auto& c : configs) {
    EXPECT_NO_THROW(ml::validate(c.spec)) << c.model;
    if (c.search) {
      ++searched;
      EXPECT_EQ(c.model, "GBDT+RandomSearchCV");
      EXPECT_EQ(c.search->cv_folds, 5u);
    }
  }
  EXPECT_EQ(searched, 1u);
}

TEST(Bench, RanksAndBest) {
  const auto d = synth_mudra_dataset(30, 6.0, 3);
  const auto [train, test] = split(d, {0.8, 3});
  using ml::Family;
  std::vector<BenchConfig> configs{
      {"tree", "", testutil::spec_of(Family::DecisionTree, {{"max_depth", std::int64_t{1}}}), {}},
      {"knn", "", testutil::spec_of(Family::KNN, {{"k", std::int64_t{3}}}), {}},
      {"knn-again", "", testutil::spec_of(Family::KNN, {{"k", std::int64_t{3}}}), {}},
      {"search", "", testutil::spec_of(Family::GBDT), default_gbdt_search(3, 2, 3)},
  };
  std::size_t seen = 0;
  const auto r = run_bench(configs, train, test, [&](const BenchRow&) { ++seen; });
  EXPECT_EQ(seen, 4u);
  ASSERT_EQ(r.rows.size(), 4u);
  // rank = 1 + number of strictly better rows; ties share a rank
  for (const auto& row : r.rows) {
    std::size_t better = 0;
    for (const auto& o : r.rows) better += o.accuracy > row.accuracy;
    EXPECT_EQ(row.rank, better + 1);
    EXPECT_GE(row.seconds, 0.0);
  }
  EXPECT_EQ(r.rows[1].accuracy, r.rows[2].accuracy);
  EXPECT_EQ(r.rows[1].rank, r.rows[2].rank);
  EXPECT_EQ(r.rows[r.best].rank, 1u);
  for (std::size_t i = 0; i < r.best; ++i) EXPECT_LT(r.rows[i].accuracy, r.rows[r.best].accuracy);
  EXPECT_NE(r.rows[3].spec.find("gbdt"), std::string::npos);
  EXPECT_DOUBLE_EQ(r.best_evaluation.report.accuracy, r.rows[r.best].accuracy);
  EXPECT_NE(render_bench(r).find("best: "), std::string::npos);
}

TEST(Bench, EmptyConfigList) {
  const auto d = synth_mudra_dataset(10, 6.0, 3);
  EXPECT_THROW(run_bench({}, d, d), Error);
}

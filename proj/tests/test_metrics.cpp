#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "asanakit/metrics.hpp"
#include "classifier_fixtures.hpp"

using namespace asanakit;

TEST(Report, HandComputedExample) {
  const auto m = confusion_from_labels({"a", "b"}, {0, 0, 1}, {0, 1, 1});
  const auto r = make_report(m);
  EXPECT_NEAR(r.accuracy, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.classes[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(r.classes[0].recall, 0.5);
  EXPECT_NEAR(r.classes[0].f1, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.classes[1].precision, 0.5);
  EXPECT_DOUBLE_EQ(r.classes[1].recall, 1.0);
  EXPECT_NEAR(r.classes[1].f1, 2.0 / 3.0, 1e-15);
  EXPECT_EQ(r.classes[0].support, 2u);
}

TEST(Report, PerfectPredictions) {
  std::vector<std::size_t> y;
  for (int i = 0; i < 50; ++i) y.push_back(i % 5);
  const auto m = confusion_from_labels({"a", "b", "c", "d", "e"}, y, y);
  const auto r = make_report(m);
  EXPECT_EQ(r.accuracy, 1.0);
  for (const auto& c : r.classes) EXPECT_EQ(c.f1, 1.0);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(m.counts[i][j], i == j ? 10u : 0u);
}

TEST(Report, ZeroDenominators) {
  const auto m = confusion_from_labels({"a", "b", "c"}, {0, 0}, {0, 1});
  const auto r = make_report(m);
  EXPECT_EQ(r.classes[1].precision, 0.0);  // column has only a wrong prediction
  EXPECT_EQ(r.classes[2].precision, 0.0);
  EXPECT_EQ(r.classes[2].recall, 0.0);
  EXPECT_EQ(r.classes[2].f1, 0.0);
}

TEST(Report, PropertiesOnRandomMatrices) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng() % 5, n = 1 + rng() % 300;
    std::vector<std::string> names;
    for (std::size_t c = 0; c < k; ++c) names.push_back("c" + std::to_string(c));
    std::vector<std::size_t> t(n), p(n);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng() % k;
      p[i] = rng() % 3 == 0 ? t[i] : rng() % k;
      hits += t[i] == p[i];
    }
    const auto m = confusion_from_labels(names, t, p);
    const auto r = make_report(m);
    EXPECT_LE(m.trace(), m.total());
    EXPECT_DOUBLE_EQ(r.accuracy, static_cast<double>(hits) / static_cast<double>(n));
    std::uint64_t support = 0, tp = 0, fp = 0, fn = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const auto& cm = r.classes[c];
      support += cm.support;
      for (double v : {cm.precision, cm.recall, cm.f1}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      if (cm.precision + cm.recall > 0) {
        EXPECT_NEAR(cm.f1, 2 * cm.precision * cm.recall / (cm.precision + cm.recall), 1e-12);
      }
      tp += m.counts[c][c];
      fp += m.column_sum(c) - m.counts[c][c];
      fn += m.row_sum(c) - m.counts[c][c];
    }
    EXPECT_EQ(support, n);
    // Micro averages collapse to accuracy for single-label multi-class.
    EXPECT_NEAR(static_cast<double>(tp) / static_cast<double>(tp + fp), r.accuracy, 1e-12);
    EXPECT_NEAR(static_cast<double>(tp) / static_cast<double>(tp + fn), r.accuracy, 1e-12);

    // Reverse class order: rows permute, accuracy unchanged.
    std::vector<std::string> rev(names.rbegin(), names.rend());
    std::vector<std::size_t> tr(n), pr(n);
    for (std::size_t i = 0; i < n; ++i) tr[i] = k - 1 - t[i], pr[i] = k - 1 - p[i];
    const auto r2 = make_report(confusion_from_labels(rev, tr, pr));
    EXPECT_DOUBLE_EQ(r2.accuracy, r.accuracy);
    for (std::size_t c = 0; c < k; ++c) EXPECT_DOUBLE_EQ(r2.classes[k - 1 - c].f1, r.classes[c].f1);
  }
}

TEST(Report, MergeAddsCounts) {
  auto a = confusion_from_labels({"a", "b"}, {0, 1}, {0, 0});
  const auto b = confusion_from_labels({"a", "b"}, {1, 1}, {1, 1});
  a.merge(b);
  EXPECT_EQ(a.counts, (std::vector<std::vector<std::uint64_t>>{{1, 0}, {1, 2}}));
  EXPECT_THROW(a.merge(ConfusionMatrix({"x", "y"})), Error);
}

TEST(Evaluate, LabelSpaceMismatch) {
  auto d = testutil::blobs(40, 2, 2, 1);
  const auto m = ml::train(testutil::spec_of(ml::Family::GaussianNB), d);
  d.class_names = {"k1", "k0"};
  try {
    evaluate(m, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LabelSpaceMismatch);
  }
}

TEST(Evaluate, SupportsSumToTestSize) {
  const auto d = testutil::blobs(500, 3, 5, 7, 1.0);
  const auto m = ml::train(testutil::spec_of(ml::Family::GaussianNB), d);
  const auto e = evaluate(m, d);
  std::uint64_t total = 0;
  for (const auto& c : e.report.classes) total += c.support;
  EXPECT_EQ(total, 500u);
  EXPECT_EQ(e.matrix.total(), 500u);
}

TEST(Render, TextHasFiveRowsAndAccuracy) {
  std::vector<std::size_t> y{0, 1, 2, 3, 4, 0, 1};
  const auto r = make_report(confusion_from_labels({"Pataaka", "Mudrakhya", "Prana", "Pallava", "Tripataka"}, y, y));
  const auto text = render_report(r, ReportFormat::Text);
  std::istringstream in(text);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 7u);  // header, 5 rows, accuracy
  EXPECT_EQ(lines.back().rfind("accuracy 1.000", 0), 0u);
  EXPECT_NE(lines[1].find("1.000"), std::string::npos);
}

TEST(Render, EmptyClassListIsHeaderOnly) {
  const ClassReport r;
  const auto text = render_report(r, ReportFormat::Text);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(render_report(r, ReportFormat::CSV), "class,precision,recall,f1,support\n");
}

TEST(Render, CsvReport) {
  const auto r = make_report(confusion_from_labels({"a", "b"}, {0, 0, 1}, {0, 1, 1}));
  const auto csv = render_report(r, ReportFormat::CSV);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "class,precision,recall,f1,support");
  EXPECT_NE(csv.find("\na,1,0.5,"), std::string::npos) << csv;
}

TEST(Render, MatrixCsvRoundTrip) {
  std::mt19937_64 rng(1);
  std::vector<std::size_t> t(300), p(300);
  for (auto& v : t) v = rng() % 4;
  for (auto& v : p) v = rng() % 4;
  const auto m = confusion_from_labels({"w", "x", "y", "z"}, t, p);
  std::istringstream in(render_matrix_csv(m));
  EXPECT_EQ(parse_matrix_csv(in), m);
  EXPECT_EQ(render_matrix_csv(m).substr(0, 10), "true\\pred,");
}

TEST(Render, HeatmapPgm) {
  const auto m = confusion_from_labels({"a", "b"}, {0, 1, 1}, {0, 1, 0});
  const auto pgm = render_heatmap_pgm(m, 4);
  const std::string header = "P5\n8 8\n255\n";
  ASSERT_EQ(pgm.substr(0, header.size()), header);
  EXPECT_EQ(pgm.size(), header.size() + 64);
  EXPECT_EQ(static_cast<unsigned char>(pgm[header.size()]), 0);     // a->a: full share
  EXPECT_EQ(static_cast<unsigned char>(pgm[header.size() + 4]), 255);  // a->b: none
}

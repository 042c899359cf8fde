#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "asanakit/classifiers/model.hpp"
#include "asanakit/dataset.hpp"
#include "asanakit/error.hpp"

namespace asanakit {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::vector<std::string> class_names;
  std::vector<std::vector<std::uint64_t>> counts;

  explicit ConfusionMatrix(std::vector<std::string> names = {})
      : class_names(std::move(names)),
        counts(class_names.size(), std::vector<std::uint64_t>(class_names.size(), 0)) {}

  std::size_t size() const { return class_names.size(); }

  void add(std::size_t truth, std::size_t predicted) { ++counts.at(truth).at(predicted); }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& r : counts) t = std::accumulate(r.begin(), r.end(), t);
    return t;
  }
  std::uint64_t trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
    return t;
  }
  std::uint64_t row_sum(std::size_t r) const {
    return std::accumulate(counts[r].begin(), counts[r].end(), std::uint64_t{0});
  }
  std::uint64_t column_sum(std::size_t c) const {
    std::uint64_t t = 0;
    for (const auto& r : counts) t += r[c];
    return t;
  }

  /// Shards evaluated separately combine by adding counts.
  ConfusionMatrix& merge(const ConfusionMatrix& other) {
    if (other.class_names != class_names)
      throw Error(ErrorCode::LabelSpaceMismatch, "cannot merge matrices over different classes");
    for (std::size_t i = 0; i < counts.size(); ++i)
      for (std::size_t j = 0; j < counts.size(); ++j) counts[i][j] += other.counts[i][j];
    return *this;
  }

  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct ClassReport {
  std::vector<ClassMetrics> classes;
  double accuracy = 0.0;
  std::uint64_t total = 0;
};

inline ClassReport make_report(const ConfusionMatrix& m) {
  ClassReport r;
  r.total = m.total();
  r.accuracy = r.total ? static_cast<double>(m.trace()) / static_cast<double>(r.total) : 0.0;
  for (std::size_t c = 0; c < m.size(); ++c) {
    ClassMetrics cm;
    cm.name = m.class_names[c];
    const auto tp = static_cast<double>(m.counts[c][c]);
    const auto col = m.column_sum(c);
    cm.support = m.row_sum(c);
    cm.precision = col ? tp / static_cast<double>(col) : 0.0;
    cm.recall = cm.support ? tp / static_cast<double>(cm.support) : 0.0;
    cm.f1 = (cm.precision + cm.recall) > 0.0
                ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                : 0.0;
    r.classes.push_back(std::move(cm));
  }
  return r;
}

inline ConfusionMatrix confusion_from_labels(const std::vector<std::string>& class_names,
                                             const std::vector<std::size_t>& truth,
                                             const std::vector<std::size_t>& predicted) {
  if (truth.size() != predicted.size())
    throw Error(ErrorCode::LengthMismatch, "truth and prediction lists differ in length");
  ConfusionMatrix m(class_names);
  for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], predicted[i]);
  return m;
}

struct Evaluation {
  ConfusionMatrix matrix;
  ClassReport report;
};

inline Evaluation evaluate(const ml::TrainedModel& model, const Dataset& test_set) {
  if (model.class_names != test_set.class_names)
    throw Error(ErrorCode::LabelSpaceMismatch, "model and test set disagree on class names");
  ConfusionMatrix m(model.class_names);
  for (const auto& s : test_set.samples) m.add(s.label, ml::predict(model, s.features).label);
  auto report = make_report(m);
  return {std::move(m), std::move(report)};
}

enum class ReportFormat { Text, CSV };

inline std::string render_report(const ClassReport& report, ReportFormat format) {
  std::ostringstream os;
  if (format == ReportFormat::CSV) {
    os << "class,precision,recall,f1,support\n";
    os << std::setprecision(17);
    for (const auto& c : report.classes)
      os << c.name << ',' << c.precision << ',' << c.recall << ',' << c.f1 << ',' << c.support << '\n';
    return os.str();
  }
  std::size_t width = 5;
  for (const auto& c : report.classes) width = std::max(width, c.name.size());
  os << std::left << std::setw(static_cast<int>(width)) << "class" << std::right << std::setw(11)
     << "precision" << std::setw(9) << "recall" << std::setw(9) << "f1" << std::setw(9) << "support"
     << '\n';
  os << std::fixed << std::setprecision(3);
  for (const auto& c : report.classes) {
    os << std::left << std::setw(static_cast<int>(width)) << c.name << std::right << std::setw(11)
       << c.precision << std::setw(9) << c.recall << std::setw(9) << c.f1 << std::setw(9) << c.support
       << '\n';
  }
  if (!report.classes.empty()) os << "accuracy " << report.accuracy << " (n=" << report.total << ")\n";
  return os.str();
}

inline std::string render_matrix_csv(const ConfusionMatrix& m) {
  std::ostringstream os;
  os << "true\\pred";
  for (const auto& n : m.class_names) os << ',' << n;
  os << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    os << m.class_names[i];
    for (auto v : m.counts[i]) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

inline ConfusionMatrix parse_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, 1, "missing matrix header");
  auto header = detail::split_fields(line);
  ConfusionMatrix m(std::vector<std::string>(header.begin() + 1, header.end()));
  std::size_t line_no = 1;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!std::getline(in, line)) throw ParseError(line_no + 1, 1, "missing matrix row");
    ++line_no;
    auto f = detail::split_fields(line);
    if (f.size() != m.size() + 1 || f[0] != m.class_names[i])
      throw ParseError(line_no, 1, "matrix row does not match header");
    for (std::size_t j = 0; j < m.size(); ++j) {
      std::uint64_t v = 0;
      auto res = std::from_chars(f[j + 1].data(), f[j + 1].data() + f[j + 1].size(), v);
      if (res.ec != std::errc() || res.ptr != f[j + 1].data() + f[j + 1].size())
        throw ParseError(line_no, j + 2, "not a count");
      m.counts[i][j] = v;
    }
  }
  return m;
}

/// Binary PGM heatmap, `cell` pixels per matrix entry. Each row is scaled
/// by its own support, so dark cells mean a high share of that true class.
inline std::string render_heatmap_pgm(const ConfusionMatrix& m, std::size_t cell = 16) {
  const std::size_t side = std::max<std::size_t>(1, m.size()) * cell;
  std::ostringstream os;
  os << "P5\n" << side << ' ' << side << "\n255\n";
  for (std::size_t py = 0; py < side; ++py) {
    const std::size_t r = py / cell;
    const double row_total = m.size() ? static_cast<double>(m.row_sum(r)) : 0.0;
    for (std::size_t px = 0; px < side; ++px) {
      const std::size_t c = px / cell;
      const double share = (m.size() && row_total > 0) ? static_cast<double>(m.counts[r][c]) / row_total : 0.0;
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - share)))));
    }
  }
  return os.str();
}

}  // namespace asanakit

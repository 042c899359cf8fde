#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asanakit/error.hpp"
#include "asanakit/geometry.hpp"
#include "asanakit/skeleton.hpp"

namespace asanakit {

struct LabeledSample {
  FeatureVector features;
  std::size_t label = 0;
  std::string label_name;
  std::string source_id;

  bool operator==(const LabeledSample&) const = default;
};

struct Dataset {
  Kind kind = Kind::Hand;
  std::vector<LabeledSample> samples;
  std::vector<std::string> class_names;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::size_t num_classes() const { return class_names.size(); }
  std::size_t feature_length() const { return topology_for(kind).angle_joints.size(); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (const auto& s : samples) ++counts.at(s.label);
    return counts;
  }

  /// Same kind and class list, samples picked by index (order preserved).
  Dataset subset(const std::vector<std::size_t>& indices) const {
    Dataset out{kind, {}, class_names};
    out.samples.reserve(indices.size());
    for (auto i : indices) out.samples.push_back(samples.at(i));
    return out;
  }

  bool operator==(const Dataset&) const = default;
};

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
  bool stratified = true;
};

namespace detail {

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& d) {
  std::vector<std::vector<std::size_t>> by_class(d.num_classes());
  for (std::size_t i = 0; i < d.samples.size(); ++i) by_class.at(d.samples[i].label).push_back(i);
  return by_class;
}

}  // namespace detail

inline Dataset read_dataset(std::istream& in) {
  Dataset d;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, 1, "missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = detail::split_fields(line);
  try {
    d.kind = parse_kind(header.at(0));
  } catch (const Error&) {
    throw ParseError(1, 1, "header must start with 'hand' or 'body'");
  }
  std::map<std::string, std::size_t> class_index;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].empty()) throw ParseError(1, i + 1, "empty class name");
    if (!class_index.emplace(header[i], d.class_names.size()).second)
      throw ParseError(1, i + 1, "duplicate class name '" + header[i] + "'");
    d.class_names.push_back(header[i]);
  }
  const auto& topology = topology_for(d.kind);
  const std::size_t n_angles = topology.angle_joints.size();

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    if (fields.size() != n_angles + 2) {
      throw Error(ErrorCode::SchemaError,
                  "line " + std::to_string(line_no) + ": expected " + std::to_string(n_angles) +
                      " angle columns for " + std::string(to_string(d.kind)) + ", got " +
                      std::to_string(fields.size() < 2 ? 0 : fields.size() - 2));
    }
    auto it = class_index.find(fields[0]);
    if (it == class_index.end())
      throw ParseError(line_no, 1, "label '" + fields[0] + "' not in header class list");
    LabeledSample s;
    s.label = it->second;
    s.label_name = fields[0];
    s.source_id = fields[1];
    s.features.kind = d.kind;
    s.features.layout_id = topology.layout_id;
    s.features.values.resize(n_angles);
    for (std::size_t j = 0; j < n_angles; ++j) {
      if (!detail::parse_double(fields[j + 2], s.features.values[j]))
        throw ParseError(line_no, j + 3, "not a number: '" + fields[j + 2] + "'");
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

inline Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return read_dataset(in);
}

inline void write_dataset(const Dataset& d, std::ostream& out) {
  out << to_string(d.kind);
  for (const auto& c : d.class_names) out << ',' << c;
  out << '\n';
  for (const auto& s : d.samples) {
    if (s.source_id.find_first_of(",\n\r") != std::string::npos)
      throw Error(ErrorCode::SchemaError, "source id may not contain ',' or newlines");
    out << s.label_name << ',' << s.source_id;
    for (double v : s.features.values) out << ',' << detail::format_double(v);
    out << '\n';
  }
}

// Values are written in their shortest exact decimal form, so a reload
// reproduces every double bit for bit.
inline void save_dataset(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  write_dataset(d, out);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

/// Seeded train/test partition. Both parts keep the original sample order.
inline std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec = {}) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw Error(ErrorCode::InvalidHyperparam, "train_fraction must lie in (0, 1)");
  std::mt19937_64 rng(spec.seed);
  std::vector<char> in_train(d.size(), 0);

  if (spec.stratified) {
    const auto by_class = detail::indices_by_class(d);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      auto idx = by_class[c];
      if (idx.empty()) continue;
      if (idx.size() < 2)
        throw Error(ErrorCode::TooFewSamples,
                    "class '" + d.class_names[c] + "' needs at least 2 samples to stratify");
      std::shuffle(idx.begin(), idx.end(), rng);
      auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * idx.size()));
      n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
      for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = 1;
    }
  } else {
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * idx.size()));
    if (n_train == 0 || n_train == idx.size())
      throw Error(ErrorCode::TooFewSamples, "split leaves one side empty");
    for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = 1;
  }

  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < d.size(); ++i) (in_train[i] ? train_idx : test_idx).push_back(i);
  return {d.subset(train_idx), d.subset(test_idx)};
}

/// Fold id per sample for stratified k-fold cross validation.
inline std::vector<std::size_t> stratified_folds(const Dataset& d, std::size_t k,
                                                 std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidHyperparam, "cv_folds must be >= 2");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold(d.size(), 0);
  const auto by_class = detail::indices_by_class(d);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto idx = by_class[c];
    if (idx.empty()) continue;
    if (idx.size() < k)
      throw Error(ErrorCode::TooFewSamples, "class '" + d.class_names[c] + "' has fewer than " +
                                                std::to_string(k) + " samples");
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = (offset + i) % k;
    offset = (offset + idx.size()) % k;
  }
  return fold;
}

}  // namespace asanakit

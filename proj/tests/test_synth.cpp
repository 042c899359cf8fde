#include <gtest/gtest.h>

#include <set>

#include "asanakit/classifiers/model.hpp"
#include "asanakit/synth.hpp"

using namespace asanakit;

TEST(Templates, FiveMudrasInCanonicalOrder) {
  const auto& t = default_mudra_templates();
  ASSERT_EQ(t.size(), 5u);
  EXPECT_EQ(template_names(t),
            (std::vector<std::string>{"Pataaka", "Mudrakhya", "Prana", "Pallava", "Tripataka"}));
  for (const auto& m : t) EXPECT_EQ(m.landmarks.size(), 21u);
}

TEST(Templates, SeparatedByAtLeast25Degrees) {
  const auto& t = default_mudra_templates();
  for (std::size_t a = 0; a < t.size(); ++a)
    for (std::size_t b = a + 1; b < t.size(); ++b) {
      const auto fa = extract_features(template_frame(t[a])).values;
      const auto fb = extract_features(template_frame(t[b])).values;
      double margin = 0;
      for (std::size_t i = 0; i < fa.size(); ++i) margin = std::max(margin, std::abs(fa[i] - fb[i]));
      EXPECT_GE(margin, 25.0) << t[a].name << " vs " << t[b].name;
    }
}

TEST(Synth, CountsAndNames) {
  const auto d = synth_mudra_dataset(500, 6.0, 123);
  EXPECT_EQ(d.size(), 2500u);
  EXPECT_EQ(d.num_classes(), 5u);
  for (auto n : d.class_counts()) EXPECT_EQ(n, 500u);
  for (const auto& s : d.samples) {
    EXPECT_EQ(s.label_name, d.class_names[s.label]);
    EXPECT_EQ(s.features.values.size(), 19u);
  }
}

TEST(Synth, DeterministicPerSeed) {
  EXPECT_EQ(synth_mudra_dataset(20, 6.0, 5), synth_mudra_dataset(20, 6.0, 5));
  EXPECT_NE(synth_mudra_dataset(20, 6.0, 5), synth_mudra_dataset(20, 6.0, 6));
}

TEST(Synth, ZeroNoiseGivesIdenticalClassVectors) {
  const auto d = synth_mudra_dataset(10, 0.0, 9);
  for (const auto& s : d.samples) {
    const auto& first = d.samples[s.label * 10].features.values;
    for (std::size_t i = 0; i < first.size(); ++i) EXPECT_NEAR(s.features.values[i], first[i], 1e-9);
  }
}

TEST(Synth, MirroredMatchesUnmirrored) {
  // Reflection invariance, checked directly against the geometry code.
  for (const auto& t : default_mudra_templates()) {
    const auto right = template_frame(t);
    const auto left = mirror_frame(right);
    EXPECT_EQ(left.handedness, Handedness::Left);
    const auto a = extract_features(right).values, b = extract_features(left).values;
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
  }
}

TEST(Synth, HalfOfEachClassMirrored) {
  const auto frames = synth_mudra_frames(10, 3.0, 1);
  std::map<std::size_t, int> left;
  for (const auto& f : frames) left[f.label] += f.frame.handedness == Handedness::Left;
  for (auto [label, n] : left) EXPECT_EQ(n, 5) << label;
}

TEST(Synth, RejectsTinyClasses) {
  EXPECT_THROW(synth_mudra_dataset(1, 6.0, 1), Error);
  EXPECT_THROW(synth_mudra_dataset(5, -1.0, 1), Error);
}

TEST(Synth, UnboundedTreeSeparatesNoise6) {
  const auto d = synth_mudra_dataset(500, 6.0, 42);
  ml::ModelSpec spec;
  spec.family = ml::Family::DecisionTree;
  const auto m = ml::train(spec, d);
  std::size_t hits = 0;
  for (const auto& s : d.samples) hits += ml::predict(m, s.features).label == s.label;
  EXPECT_EQ(hits, d.size());
}

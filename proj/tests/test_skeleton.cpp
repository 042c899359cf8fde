#include <gtest/gtest.h>

#include <set>

#include "asanakit/skeleton.hpp"
#include "test_util.hpp"

using namespace asanakit;

TEST(HandTopology, Shape) {
  const auto t = build_hand_topology();
  EXPECT_EQ(t.landmark_count(), 21u);
  EXPECT_EQ(t.angle_joints.size(), 19u);
  EXPECT_EQ(t.edges.size(), 20u);
  EXPECT_EQ(t.layout_id, "hand-19-v1");
}

TEST(HandTopology, FirstJointIsThumbBase) {
  const auto& j = build_hand_topology().angle_joints.front();
  EXPECT_EQ(j.vertex, 1u);
  EXPECT_EQ(j.a, 0u);
  EXPECT_EQ(j.c, 2u);
}

TEST(HandTopology, FifteenFlexionThenFourSpread) {
  const auto t = build_hand_topology();
  for (std::size_t i = 0; i < 15; ++i) EXPECT_NE(t.angle_joints[i].vertex, 0u) << i;
  for (std::size_t i = 15; i < 19; ++i) EXPECT_EQ(t.angle_joints[i].vertex, 0u) << i;
  EXPECT_EQ(t.angle_joints[18].name, "ring_pinky_spread");
}

TEST(HandTopology, EdgesFormTree) {
  // 20 edges over 21 nodes, connected -> tree.
  const auto t = build_hand_topology();
  std::vector<int> parent(21);
  for (int i = 0; i < 21; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [a, b] : t.edges) {
    const int ra = find(static_cast<int>(a)), rb = find(static_cast<int>(b));
    ASSERT_NE(ra, rb) << "cycle through " << a << "-" << b;
    parent[ra] = rb;
  }
}

TEST(BodyTopology, Shape) {
  const auto t = build_body_topology();
  EXPECT_EQ(t.landmark_count(), 18u);
  EXPECT_EQ(t.angle_joints.size(), 8u);
  EXPECT_EQ(t.slope_pairs.size(), 4u);
}

TEST(BodyTopology, ElbowIsShoulderElbowWrist) {
  const auto t = build_body_topology();
  const auto* l = t.find_joint("left_elbow");
  const auto* r = t.find_joint("right_elbow");
  ASSERT_TRUE(l && r);
  EXPECT_EQ(std::tie(l->a, l->vertex, l->c), std::make_tuple(std::size_t{5}, std::size_t{6}, std::size_t{7}));
  EXPECT_EQ(std::tie(r->a, r->vertex, r->c), std::make_tuple(std::size_t{2}, std::size_t{3}, std::size_t{4}));
}

TEST(BodyTopology, ShoulderLineSlopePair) {
  const auto t = build_body_topology();
  const auto* p = t.find_pair("shoulder_line");
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(std::set<std::size_t>({p->first, p->second}), std::set<std::size_t>({2, 5}));
}

class TopologyInvariants : public ::testing::TestWithParam<Kind> {};

TEST_P(TopologyInvariants, IndicesDistinctAndInRange) {
  const auto t = GetParam() == Kind::Hand ? build_hand_topology() : build_body_topology();
  const auto n = t.landmark_count();
  std::set<std::string> names;
  for (const auto& j : t.angle_joints) {
    EXPECT_LT(j.a, n);
    EXPECT_LT(j.vertex, n);
    EXPECT_LT(j.c, n);
    EXPECT_NE(j.a, j.vertex);
    EXPECT_NE(j.vertex, j.c);
    EXPECT_NE(j.a, j.c);
    EXPECT_TRUE(names.insert(j.name).second) << "duplicate " << j.name;
  }
  for (const auto& p : t.slope_pairs) {
    EXPECT_LT(p.first, n);
    EXPECT_LT(p.second, n);
    EXPECT_NE(p.first, p.second);
  }
  for (auto [a, b] : t.edges) {
    EXPECT_LT(a, n);
    EXPECT_LT(b, n);
  }
}

TEST_P(TopologyInvariants, Deterministic) {
  const auto a = GetParam() == Kind::Hand ? build_hand_topology() : build_body_topology();
  const auto b = GetParam() == Kind::Hand ? build_hand_topology() : build_body_topology();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, topology_for(GetParam()));
}

TEST_P(TopologyInvariants, ZeroThresholdNeverMissing) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    auto f = testutil::random_frame(GetParam(), rng);
    std::uniform_real_distribution<double> c(0.0, 1.0);
    for (auto& p : f.landmarks) p.confidence = c(rng);
    EXPECT_TRUE(validate_frame(f, 0.0).missing.empty());
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, TopologyInvariants, ::testing::Values(Kind::Hand, Kind::Body));

TEST(ValidateFrame, AllConfident) {
  auto f = testutil::flat_hand();
  for (auto& p : f.landmarks) p.confidence = 0.9;
  const auto r = validate_frame(f, 0.3);
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.missing.empty());
}

TEST(ValidateFrame, WrongCount) {
  auto f = testutil::flat_hand();
  f.landmarks.pop_back();
  try {
    validate_frame(f);
    FAIL() << "expected WrongCount";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongCount);
  }
}

TEST(ValidateFrame, LowConfidencePoint) {
  auto f = testutil::flat_hand();
  f.landmarks[8].confidence = 0.0;
  const auto r = validate_frame(f, 0.3);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.missing, std::vector<std::size_t>{8});
}

TEST(ValidateFrame, NonFinitePointIsMissing) {
  auto f = testutil::body_frame();
  f.landmarks[3].x = std::nan("");
  const auto r = validate_frame(f, 0.0);
  EXPECT_EQ(r.missing, std::vector<std::size_t>{3});
}

TEST(Parsing, KindAndHandedness) {
  EXPECT_EQ(parse_kind("hand"), Kind::Hand);
  EXPECT_EQ(parse_kind("body"), Kind::Body);
  EXPECT_EQ(parse_handedness("left"), Handedness::Left);
  EXPECT_EQ(parse_handedness(to_string(Handedness::NA)), Handedness::NA);
  EXPECT_THROW(parse_kind("foot"), Error);
}

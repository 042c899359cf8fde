#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "asanakit/error.hpp"

namespace asanakit {

enum class Kind { Hand, Body };
enum class Handedness { Left, Right, NA };

inline constexpr std::size_t kHandLandmarks = 21;
inline constexpr std::size_t kBodyLandmarks = 18;
inline constexpr double kDefaultMinConfidence = 0.3;

inline constexpr std::size_t landmark_count(Kind kind) {
  return kind == Kind::Hand ? kHandLandmarks : kBodyLandmarks;
}

inline std::string_view to_string(Kind kind) { return kind == Kind::Hand ? "hand" : "body"; }

inline Kind parse_kind(std::string_view s) {
  if (s == "hand") return Kind::Hand;
  if (s == "body") return Kind::Body;
  throw Error(ErrorCode::SchemaError, "unknown kind '" + std::string(s) + "'");
}

inline std::string_view to_string(Handedness h) {
  switch (h) {
    case Handedness::Left: return "left";
    case Handedness::Right: return "right";
    case Handedness::NA: return "na";
  }
  return "na";
}

inline Handedness parse_handedness(std::string_view s) {
  if (s == "left" || s == "Left" || s == "L") return Handedness::Left;
  if (s == "right" || s == "Right" || s == "R") return Handedness::Right;
  return Handedness::NA;
}

/// A 2-D keypoint in normalized image coordinates. Any depth estimate from
/// the upstream tracker is dropped before it reaches this type.
struct Landmark {
  double x = 0.0;
  double y = 0.0;
  double confidence = 1.0;

  bool valid() const {
    return std::isfinite(x) && std::isfinite(y) && confidence >= 0.0 && confidence <= 1.0;
  }
};

struct LandmarkFrame {
  Kind kind = Kind::Hand;
  Handedness handedness = Handedness::NA;
  std::vector<Landmark> landmarks;
  std::int64_t timestamp_ms = 0;
};

struct AngleJoint {
  std::string name;
  std::size_t a;
  std::size_t vertex;
  std::size_t c;

  bool operator==(const AngleJoint&) const = default;
};

struct NamedPair {
  std::string name;
  std::size_t first;
  std::size_t second;

  bool operator==(const NamedPair&) const = default;
};

/// Fixed landmark topology for one kind. The order of `angle_joints` is the
/// feature-vector layout and must never change for a given layout id.
struct Topology {
  Kind kind = Kind::Hand;
  std::string layout_id;
  std::vector<std::string> landmark_names;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<AngleJoint> angle_joints;
  std::vector<NamedPair> slope_pairs;
  // Reference bone used to normalize distances (hand: wrist to middle base,
  // body: shoulder width).
  std::pair<std::size_t, std::size_t> reference_bone{0, 0};

  std::size_t landmark_count() const { return landmark_names.size(); }

  const AngleJoint* find_joint(std::string_view name) const {
    for (const auto& j : angle_joints)
      if (j.name == name) return &j;
    return nullptr;
  }

  const NamedPair* find_pair(std::string_view name) const {
    for (const auto& p : slope_pairs)
      if (p.name == name) return &p;
    return nullptr;
  }

  bool operator==(const Topology&) const = default;
};

// Hand layout: 0 wrist; thumb 1-4; index 5-8; middle 9-12; ring 13-16;
// pinky 17-20. Per finger the three flexion angles sit at the base, middle
// and distal joints; four spread angles sit at the wrist between adjacent
// base knuckles.
inline Topology build_hand_topology() {
  Topology t;
  t.kind = Kind::Hand;
  t.layout_id = "hand-19-v1";
  t.landmark_names = {"wrist"};
  const std::array<std::string, 5> fingers{"thumb", "index", "middle", "ring", "pinky"};
  const std::array<std::array<std::string, 4>, 5> joints{{
      {"cmc", "mcp", "ip", "tip"},
      {"mcp", "pip", "dip", "tip"},
      {"mcp", "pip", "dip", "tip"},
      {"mcp", "pip", "dip", "tip"},
      {"mcp", "pip", "dip", "tip"},
  }};
  for (std::size_t f = 0; f < 5; ++f)
    for (std::size_t j = 0; j < 4; ++j) t.landmark_names.push_back(fingers[f] + "_" + joints[f][j]);

  for (std::size_t f = 0; f < 5; ++f) {
    const std::size_t base = 1 + 4 * f;
    t.edges.emplace_back(0, base);
    for (std::size_t j = 0; j < 3; ++j) t.edges.emplace_back(base + j, base + j + 1);
  }
  for (std::size_t f = 0; f < 5; ++f) {
    const std::size_t base = 1 + 4 * f;
    t.angle_joints.push_back({t.landmark_names[base], 0, base, base + 1});
    t.angle_joints.push_back({t.landmark_names[base + 1], base, base + 1, base + 2});
    t.angle_joints.push_back({t.landmark_names[base + 2], base + 1, base + 2, base + 3});
  }
  for (std::size_t f = 0; f + 1 < 5; ++f) {
    t.angle_joints.push_back(
        {fingers[f] + "_" + fingers[f + 1] + "_spread", 1 + 4 * f, 0, 1 + 4 * (f + 1)});
  }
  t.slope_pairs = {
      {"wrist_middle_line", 0, 9},
      {"thumb_index_tips", 4, 8},
      {"thumb_middle_tips", 4, 12},
      {"thumb_ring_tips", 4, 16},
      {"thumb_pinky_tips", 4, 20},
  };
  t.reference_bone = {0, 9};
  return t;
}

namespace body {
// COCO-18 ordering as emitted by OpenPose-style estimators.
enum Index : std::size_t {
  Nose = 0,
  Neck,
  RShoulder,
  RElbow,
  RWrist,
  LShoulder,
  LElbow,
  LWrist,
  RHip,
  RKnee,
  RAnkle,
  LHip,
  LKnee,
  LAnkle,
  REye,
  LEye,
  REar,
  LEar,
};
}  // namespace body

inline Topology build_body_topology() {
  using namespace body;
  Topology t;
  t.kind = Kind::Body;
  t.layout_id = "body-8-v1";
  t.landmark_names = {"nose",           "neck",      "right_shoulder", "right_elbow", "right_wrist",
                      "left_shoulder",  "left_elbow", "left_wrist",    "right_hip",   "right_knee",
                      "right_ankle",    "left_hip",  "left_knee",      "left_ankle",  "right_eye",
                      "left_eye",       "right_ear", "left_ear"};
  t.edges = {{Neck, RShoulder}, {RShoulder, RElbow}, {RElbow, RWrist}, {Neck, LShoulder},
             {LShoulder, LElbow}, {LElbow, LWrist},  {Neck, RHip},     {RHip, RKnee},
             {RKnee, RAnkle},   {Neck, LHip},       {LHip, LKnee},    {LKnee, LAnkle},
             {Neck, Nose},      {Nose, REye},       {REye, REar},     {Nose, LEye},
             {LEye, LEar}};
  t.angle_joints = {
      {"left_elbow", LShoulder, LElbow, LWrist},  {"right_elbow", RShoulder, RElbow, RWrist},
      {"left_shoulder", LHip, LShoulder, LElbow}, {"right_shoulder", RHip, RShoulder, RElbow},
      {"left_hip", LShoulder, LHip, LKnee},       {"right_hip", RShoulder, RHip, RKnee},
      {"left_knee", LHip, LKnee, LAnkle},         {"right_knee", RHip, RKnee, RAnkle},
  };
  t.slope_pairs = {
      {"shoulder_line", LShoulder, RShoulder},
      {"hip_line", LHip, RHip},
      {"left_arm_line", LShoulder, LWrist},
      {"right_arm_line", RShoulder, RWrist},
  };
  t.reference_bone = {LShoulder, RShoulder};
  return t;
}

inline const Topology& topology_for(Kind kind) {
  static const Topology hand = build_hand_topology();
  static const Topology body = build_body_topology();
  return kind == Kind::Hand ? hand : body;
}

struct ValidationResult {
  bool ok = false;
  std::vector<std::size_t> missing;
};

inline ValidationResult validate_frame(const LandmarkFrame& frame,
                                       double min_confidence = kDefaultMinConfidence) {
  const std::size_t expected = landmark_count(frame.kind);
  if (frame.landmarks.size() != expected) {
    throw Error(ErrorCode::WrongCount, "expected " + std::to_string(expected) + " landmarks for " +
                                           std::string(to_string(frame.kind)) + ", got " +
                                           std::to_string(frame.landmarks.size()));
  }
  ValidationResult r;
  for (std::size_t i = 0; i < frame.landmarks.size(); ++i) {
    const auto& lm = frame.landmarks[i];
    // Non-finite coordinates are as unusable as an occluded point.
    if (!lm.valid() || lm.confidence < min_confidence) r.missing.push_back(i);
  }
  r.ok = r.missing.empty();
  return r;
}

}  // namespace asanakit

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "asanakit/error.hpp"
#include "asanakit/skeleton.hpp"

namespace asanakit {

inline constexpr double kDegenerateEpsilon = 1e-9;

inline constexpr double rad_to_deg(double r) { return r * (180.0 / std::numbers::pi); }
inline constexpr double deg_to_rad(double d) { return d * (std::numbers::pi / 180.0); }

/// Joint angles in degrees, laid out in the order of a Topology's angle joints.
struct FeatureVector {
  Kind kind = Kind::Hand;
  std::vector<double> values;
  std::string layout_id;

  std::size_t size() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

inline double squared_distance(const Landmark& p, const Landmark& q) {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  return dx * dx + dy * dy;
}

inline double euclidean_distance(const Landmark& p, const Landmark& q) {
  return std::sqrt(squared_distance(p, q));
}

// Interior angle at b from the three side lengths (law of cosines).
inline double angle_at(const Landmark& a, const Landmark& b, const Landmark& c) {
  const double ba2 = squared_distance(b, a);
  const double bc2 = squared_distance(b, c);
  const double ba = std::sqrt(ba2);
  const double bc = std::sqrt(bc2);
  if (ba <= kDegenerateEpsilon || bc <= kDegenerateEpsilon)
    throw Error(ErrorCode::DegenerateTriple, "arm shorter than epsilon");
  const double ac2 = squared_distance(a, c);
  const double cosine = std::clamp((ba2 + bc2 - ac2) / (2.0 * ba * bc), -1.0, 1.0);
  // acos alone loses ~1e-6 degrees next to 0 and 180 where its slope blows
  // up; pairing the cosine with the cross-product sine keeps full precision.
  const double cross = (a.x - b.x) * (c.y - b.y) - (a.y - b.y) * (c.x - b.x);
  const double sine = std::min(1.0, std::abs(cross) / (ba * bc));
  return rad_to_deg(std::atan2(sine, cosine));
}

/// Inclination of the line through p and q against the image x axis, in
/// (-90, 90]. Vertical lines give exactly 90.
inline double slope_deg(const Landmark& p, const Landmark& q) {
  if (euclidean_distance(p, q) <= kDegenerateEpsilon)
    throw Error(ErrorCode::DegeneratePair, "points coincide");
  const double dx = q.x - p.x;
  const double dy = q.y - p.y;
  if (dx == 0.0) return 90.0;
  double deg = rad_to_deg(std::atan2(dy, dx));
  if (deg > 90.0) deg -= 180.0;
  if (deg <= -90.0) deg += 180.0;
  return deg;
}

/// Distance between the pair divided by the topology's reference bone.
inline double normalized_distance(const LandmarkFrame& frame, const Topology& topology,
                                  std::size_t i, std::size_t j) {
  const auto [r0, r1] = topology.reference_bone;
  const double ref = euclidean_distance(frame.landmarks.at(r0), frame.landmarks.at(r1));
  if (ref <= kDegenerateEpsilon) throw Error(ErrorCode::DegeneratePair, "reference bone collapsed");
  return euclidean_distance(frame.landmarks.at(i), frame.landmarks.at(j)) / ref;
}

inline FeatureVector extract_features(const LandmarkFrame& frame, const Topology& topology,
                                      double min_confidence = kDefaultMinConfidence) {
  if (frame.kind != topology.kind)
    throw Error(ErrorCode::KindMismatch, "frame kind does not match topology");
  auto validation = validate_frame(frame, min_confidence);
  if (!validation.ok) throw MissingLandmarksError(std::move(validation.missing));

  FeatureVector fv;
  fv.kind = topology.kind;
  fv.layout_id = topology.layout_id;
  fv.values.reserve(topology.angle_joints.size());
  for (const auto& joint : topology.angle_joints) {
    try {
      fv.values.push_back(angle_at(frame.landmarks[joint.a], frame.landmarks[joint.vertex],
                                   frame.landmarks[joint.c]));
    } catch (const Error&) {
      throw Error(ErrorCode::DegenerateTriple, joint.name + ": arm shorter than epsilon");
    }
  }
  return fv;
}

inline FeatureVector extract_features(const LandmarkFrame& frame,
                                      double min_confidence = kDefaultMinConfidence) {
  return extract_features(frame, topology_for(frame.kind), min_confidence);
}

}  // namespace asanakit

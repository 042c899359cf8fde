#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "asanakit/dataset.hpp"
#include "asanakit/error.hpp"
#include "asanakit/geometry.hpp"
#include "asanakit/mudra_templates_data.hpp"
#include "asanakit/skeleton.hpp"

namespace asanakit {

/// A canonical right-hand landmark set for one mudra.
struct MudraTemplate {
  std::string name;
  std::vector<Landmark> landmarks;
};

// CSV with columns mudra,index,x,y. Classes keep their first-seen order.
inline std::vector<MudraTemplate> parse_mudra_templates(std::istream& in) {
  std::vector<MudraTemplate> out;
  std::map<std::string, std::size_t> pos;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line_no == 1) continue;
    auto f = detail::split_fields(line);
    if (f.size() != 4) throw ParseError(line_no, 1, "expected mudra,index,x,y");
    auto [it, inserted] = pos.emplace(f[0], out.size());
    if (inserted) out.push_back({f[0], std::vector<Landmark>(kHandLandmarks)});
    double index = 0, x = 0, y = 0;
    if (!detail::parse_double(f[1], index) || index < 0 || index >= kHandLandmarks)
      throw ParseError(line_no, 2, "bad landmark index");
    if (!detail::parse_double(f[2], x)) throw ParseError(line_no, 3, "bad x");
    if (!detail::parse_double(f[3], y)) throw ParseError(line_no, 4, "bad y");
    out[it->second].landmarks[static_cast<std::size_t>(index)] = {x, y, 1.0};
  }
  return out;
}

inline const std::vector<MudraTemplate>& default_mudra_templates() {
  static const std::vector<MudraTemplate> templates = [] {
    std::istringstream in(detail::kMudraTemplatesCsv);
    return parse_mudra_templates(in);
  }();
  return templates;
}

inline LandmarkFrame template_frame(const MudraTemplate& t) {
  return {Kind::Hand, Handedness::Right, t.landmarks, 0};
}

namespace detail {

inline void rotate_about(Landmark& p, const Landmark& pivot, double deg) {
  if (deg == 0.0) return;
  const double r = deg_to_rad(deg);
  const double c = std::cos(r), s = std::sin(r);
  const double dx = p.x - pivot.x, dy = p.y - pivot.y;
  p.x = pivot.x + c * dx - s * dy;
  p.y = pivot.y + s * dx + c * dy;
}

}  // namespace detail

/// Bends every finger chain joint by N(0, noise_deg): the whole finger swings
/// about the wrist, then each remaining sub-chain about its proximal joint.
template <class Rng>
LandmarkFrame jitter_hand(const LandmarkFrame& frame, double noise_deg, Rng& rng) {
  LandmarkFrame out = frame;
  if (noise_deg <= 0.0) return out;
  std::normal_distribution<double> noise(0.0, noise_deg);
  auto& lm = out.landmarks;
  for (std::size_t f = 0; f < 5; ++f) {
    const std::size_t base = 1 + 4 * f;
    for (std::size_t joint = 0; joint < 4; ++joint) {
      const std::size_t pivot = joint == 0 ? 0 : base + joint - 1;
      const double delta = noise(rng);
      const Landmark p = lm[pivot];
      for (std::size_t k = base + joint; k < base + 4; ++k) detail::rotate_about(lm[k], p, delta);
    }
  }
  return out;
}

/// Horizontal flip in normalized image space; turns a right hand into a left.
inline LandmarkFrame mirror_frame(LandmarkFrame frame) {
  for (auto& p : frame.landmarks) p.x = 1.0 - p.x;
  if (frame.handedness == Handedness::Right)
    frame.handedness = Handedness::Left;
  else if (frame.handedness == Handedness::Left)
    frame.handedness = Handedness::Right;
  return frame;
}

struct SynthFrame {
  LandmarkFrame frame;
  std::size_t label = 0;
  std::string source_id;
};

/// Jittered landmark frames, class-major. Odd sample indices are mirrored to
/// stand in for left hands.
inline std::vector<SynthFrame> synth_mudra_frames(std::size_t per_class, double noise_deg,
                                                  std::uint64_t seed,
                                                  const std::vector<MudraTemplate>& templates =
                                                      default_mudra_templates()) {
  if (per_class < 2) throw Error(ErrorCode::TooFewSamples, "per_class must be >= 2");
  if (!(noise_deg >= 0.0)) throw Error(ErrorCode::InvalidHyperparam, "noise_deg must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> confidence(0.8, 1.0);
  std::vector<SynthFrame> out;
  out.reserve(per_class * templates.size());
  for (std::size_t c = 0; c < templates.size(); ++c) {
    const auto base = template_frame(templates[c]);
    for (std::size_t i = 0; i < per_class; ++i) {
      auto frame = jitter_hand(base, noise_deg, rng);
      for (auto& p : frame.landmarks) p.confidence = confidence(rng);
      const bool mirrored = (i % 2) == 1;
      if (mirrored) frame = mirror_frame(std::move(frame));
      out.push_back({std::move(frame), c,
                     "synth:" + templates[c].name + ":" + std::to_string(i) + (mirrored ? ":L" : ":R")});
    }
  }
  return out;
}

inline Dataset dataset_from_frames(const std::vector<SynthFrame>& frames,
                                   std::vector<std::string> class_names, Kind kind = Kind::Hand) {
  Dataset d{kind, {}, std::move(class_names)};
  const auto& topology = topology_for(kind);
  d.samples.reserve(frames.size());
  for (const auto& f : frames) {
    d.samples.push_back(
        {extract_features(f.frame, topology, 0.0), f.label, d.class_names.at(f.label), f.source_id});
  }
  return d;
}

inline std::vector<std::string> template_names(const std::vector<MudraTemplate>& templates) {
  std::vector<std::string> names;
  for (const auto& t : templates) names.push_back(t.name);
  return names;
}

inline Dataset synth_mudra_dataset(std::size_t per_class, double noise_deg, std::uint64_t seed,
                                   const std::vector<MudraTemplate>& templates =
                                       default_mudra_templates()) {
  return dataset_from_frames(synth_mudra_frames(per_class, noise_deg, seed, templates),
                             template_names(templates));
}

/// A recorded-looking session: `n` jittered frames of one mudra at a fixed
/// frame rate, timestamps starting at `start_ms`.
inline std::vector<LandmarkFrame> synth_session(const std::string& mudra, std::size_t n, double fps,
                                                double noise_deg, std::uint64_t seed,
                                                std::int64_t start_ms = 0,
                                                const std::vector<MudraTemplate>& templates =
                                                    default_mudra_templates()) {
  if (!(fps > 0.0)) throw Error(ErrorCode::InvalidHyperparam, "fps must be > 0");
  auto it = std::find_if(templates.begin(), templates.end(), [&](const auto& t) { return t.name == mudra; });
  if (it == templates.end()) throw Error(ErrorCode::InvalidHyperparam, "unknown mudra '" + mudra + "'");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> confidence(0.8, 1.0);
  const auto base = template_frame(*it);
  std::vector<LandmarkFrame> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto frame = jitter_hand(base, noise_deg, rng);
    for (auto& p : frame.landmarks) p.confidence = confidence(rng);
    frame.timestamp_ms = start_ms + static_cast<std::int64_t>(std::llround(1000.0 * static_cast<double>(i) / fps));
    out.push_back(std::move(frame));
  }
  return out;
}

}  // namespace asanakit

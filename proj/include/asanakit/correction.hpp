#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "asanakit/dataset.hpp"
#include "asanakit/error.hpp"
#include "asanakit/geometry.hpp"
#include "asanakit/skeleton.hpp"

namespace asanakit {

enum class ConstraintType { Angle, Slope, Distance };
enum class Direction { Increase, Decrease };

inline std::string_view to_string(ConstraintType t) {
  switch (t) {
    case ConstraintType::Angle: return "angle";
    case ConstraintType::Slope: return "slope";
    case ConstraintType::Distance: return "distance";
  }
  return "angle";
}
inline std::string_view to_string(Direction d) { return d == Direction::Increase ? "increase" : "decrease"; }

/// Target value for a named joint (angle) or landmark pair (slope, distance).
/// Distances are in units of the topology's reference bone.
struct Constraint {
  std::string name;
  double target = 0.0;
  double tolerance = 0.0;

  bool operator==(const Constraint&) const = default;
};

struct PoseProfile {
  std::string pose_id;
  Kind kind = Kind::Hand;
  std::vector<Constraint> angles;
  std::vector<Constraint> slopes;
  std::vector<Constraint> distances;

  bool operator==(const PoseProfile&) const = default;
};

struct Deviation {
  std::string constraint_name;
  ConstraintType type = ConstraintType::Angle;
  double observed = 0.0;
  double target = 0.0;
  double excess = 0.0;
  Direction direction = Direction::Increase;
  std::string message;
};

struct CorrectionResult {
  std::string pose_id;
  std::vector<Deviation> deviations;
  std::vector<std::size_t> missing_joints;
  bool correct = false;
};

inline void validate_profile(const PoseProfile& p) {
  const auto& topo = topology_for(p.kind);
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::InvalidProfile, "profile '" + p.pose_id + "': " + what);
  };
  if (p.pose_id.empty()) fail("empty pose id");
  for (const auto& c : p.angles) {
    if (!topo.find_joint(c.name)) fail("unknown joint '" + c.name + "'");
    if (!(c.tolerance > 0)) fail(c.name + ": tolerance must be positive");
    if (!(c.target >= 0.0 && c.target <= 180.0)) fail(c.name + ": angle target outside [0, 180]");
  }
  for (const auto& c : p.slopes) {
    if (!topo.find_pair(c.name)) fail("unknown pair '" + c.name + "'");
    if (!(c.tolerance > 0)) fail(c.name + ": tolerance must be positive");
    if (!(c.target > -90.0 && c.target <= 90.0)) fail(c.name + ": slope target outside (-90, 90]");
    // Slopes wrap at the vertical; the tolerance band must stay clear of it.
    if (!(c.target - c.tolerance > -90.0 && c.target + c.tolerance < 90.0))
      fail(c.name + ": slope tolerance band reaches the vertical wraparound");
  }
  for (const auto& c : p.distances) {
    if (!topo.find_pair(c.name)) fail("unknown pair '" + c.name + "'");
    if (!(c.tolerance > 0)) fail(c.name + ": tolerance must be positive");
    if (!(c.target >= 0.0 && std::isfinite(c.target))) fail(c.name + ": distance target must be >= 0");
  }
}

// ---------------------------------------------------------------------------
// Feedback text

/// Message templates keyed by "<name>.<increase|decrease>", then "<name>".
/// Placeholders: {joint} (name with spaces), {name}, {excess}, {target},
/// {observed}.
using MessageTable = std::map<std::string, std::string>;

inline std::string display_name(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '_', ' ');
  return s;
}

inline std::string format_quantity(ConstraintType type, double v) {
  if (type == ConstraintType::Distance) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << v;
    return os.str();
  }
  // Half-to-even under the default rounding mode.
  return std::to_string(static_cast<long long>(std::nearbyint(v))) + "°";
}

inline MessageTable default_messages() {
  MessageTable t;
  for (auto kind : {Kind::Hand, Kind::Body}) {
    const auto& topo = topology_for(kind);
    for (const auto& j : topo.angle_joints) {
      t[j.name + ".increase"] = "Straighten your {joint} ({excess} to go)";
      t[j.name + ".decrease"] = "Bend your {joint} ({excess} to go)";
    }
    for (const auto& p : topo.slope_pairs) {
      t[p.name + ".slope.increase"] = "Tilt your {joint} up by {excess}";
      t[p.name + ".slope.decrease"] = "Tilt your {joint} down by {excess}";
      t[p.name + ".distance.increase"] = "Widen your {joint} ({excess} to go)";
      t[p.name + ".distance.decrease"] = "Narrow your {joint} ({excess} to go)";
    }
  }
  return t;
}

inline std::string fill_template(std::string tpl, const Deviation& d) {
  const std::map<std::string, std::string> values{
      {"{joint}", display_name(d.constraint_name)},
      {"{name}", d.constraint_name},
      {"{excess}", format_quantity(d.type, d.excess)},
      {"{target}", format_quantity(d.type, d.target)},
      {"{observed}", format_quantity(d.type, d.observed)},
  };
  for (const auto& [key, value] : values) {
    for (auto pos = tpl.find(key); pos != std::string::npos; pos = tpl.find(key, pos + value.size()))
      tpl.replace(pos, key.size(), value);
  }
  return tpl;
}

/// Never fails: a missing template falls back to "Adjust <name> toward <target>".
inline std::string feedback_text(const Deviation& d, const MessageTable& table = default_messages()) {
  const std::string dir(to_string(d.direction));
  const std::string type(to_string(d.type));
  const std::vector<std::string> keys =
      d.type == ConstraintType::Angle
          ? std::vector<std::string>{d.constraint_name + "." + dir, d.constraint_name}
          : std::vector<std::string>{d.constraint_name + "." + type + "." + dir,
                                     d.constraint_name + "." + type, d.constraint_name};
  for (const auto& k : keys) {
    auto it = table.find(k);
    if (it != table.end()) return fill_template(it->second, d);
  }
  return fill_template("Adjust {name} toward {target}", d);
}

// ---------------------------------------------------------------------------
// Evaluation

inline CorrectionResult evaluate_pose(const LandmarkFrame& frame, const PoseProfile& profile,
                                      double min_confidence = kDefaultMinConfidence,
                                      const MessageTable& messages = default_messages()) {
  if (frame.kind != profile.kind) throw Error(ErrorCode::KindMismatch, "frame kind differs from profile");
  const auto& topo = topology_for(profile.kind);
  const auto validation = validate_frame(frame, min_confidence);
  const std::set<std::size_t> missing(validation.missing.begin(), validation.missing.end());

  CorrectionResult result;
  result.pose_id = profile.pose_id;
  std::set<std::size_t> skipped;

  // Returns false (and records the indices) when any landmark is unusable.
  auto usable = [&](std::initializer_list<std::size_t> idx) {
    bool ok = true;
    for (auto i : idx)
      if (missing.count(i)) {
        skipped.insert(i);
        ok = false;
      }
    return ok;
  };

  auto check = [&](const Constraint& c, ConstraintType type, double observed) {
    const double diff = observed - c.target;
    if (std::abs(diff) <= c.tolerance) return;
    Deviation d;
    d.constraint_name = c.name;
    d.type = type;
    d.observed = observed;
    d.target = c.target;
    d.excess = std::abs(diff) - c.tolerance;
    d.direction = diff < 0 ? Direction::Increase : Direction::Decrease;
    d.message = feedback_text(d, messages);
    result.deviations.push_back(std::move(d));
  };

  for (const auto& c : profile.angles) {
    const auto* j = topo.find_joint(c.name);
    if (!j) throw Error(ErrorCode::InvalidProfile, "unknown joint '" + c.name + "'");
    if (!usable({j->a, j->vertex, j->c})) continue;
    try {
      check(c, ConstraintType::Angle,
            angle_at(frame.landmarks[j->a], frame.landmarks[j->vertex], frame.landmarks[j->c]));
    } catch (const Error&) {
      skipped.insert({j->a, j->vertex, j->c});
    }
  }
  for (const auto& c : profile.slopes) {
    const auto* p = topo.find_pair(c.name);
    if (!p) throw Error(ErrorCode::InvalidProfile, "unknown pair '" + c.name + "'");
    if (!usable({p->first, p->second})) continue;
    try {
      check(c, ConstraintType::Slope, slope_deg(frame.landmarks[p->first], frame.landmarks[p->second]));
    } catch (const Error&) {
      skipped.insert({p->first, p->second});
    }
  }
  for (const auto& c : profile.distances) {
    const auto* p = topo.find_pair(c.name);
    if (!p) throw Error(ErrorCode::InvalidProfile, "unknown pair '" + c.name + "'");
    if (!usable({p->first, p->second, topo.reference_bone.first, topo.reference_bone.second})) continue;
    try {
      check(c, ConstraintType::Distance, normalized_distance(frame, topo, p->first, p->second));
    } catch (const Error&) {
      skipped.insert({topo.reference_bone.first, topo.reference_bone.second});
    }
  }

  result.missing_joints.assign(skipped.begin(), skipped.end());
  result.correct = result.deviations.empty() && result.missing_joints.empty();
  return result;
}

inline constexpr double kDefaultSigmaFactor = 2.0;
inline constexpr double kDefaultToleranceFloor = 5.0;

/// Angle profile from exemplar samples of one pose: target is the mean,
/// tolerance max(k_sigma * stddev, floor_deg).
inline PoseProfile profile_from_samples(const Dataset& dataset, const std::string& pose_id,
                                        double k_sigma = kDefaultSigmaFactor,
                                        double floor_deg = kDefaultToleranceFloor) {
  std::vector<const LabeledSample*> rows;
  for (const auto& s : dataset.samples)
    if (s.label_name == pose_id) rows.push_back(&s);
  if (rows.size() < 5)
    throw Error(ErrorCode::TooFewSamples, "pose '" + pose_id + "' needs at least 5 samples, has " +
                                              std::to_string(rows.size()));
  const auto& topo = topology_for(dataset.kind);
  PoseProfile p;
  p.pose_id = pose_id;
  p.kind = dataset.kind;
  const double n = static_cast<double>(rows.size());
  for (std::size_t j = 0; j < topo.angle_joints.size(); ++j) {
    double mean = 0.0;
    for (const auto* s : rows) mean += std::clamp(s->features.values.at(j), 0.0, 180.0);
    mean /= n;
    double var = 0.0;
    for (const auto* s : rows) {
      const double d = std::clamp(s->features.values[j], 0.0, 180.0) - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / n);
    p.angles.push_back({topo.angle_joints[j].name, mean, std::max(k_sigma * sd, floor_deg)});
  }
  return p;
}

// ---------------------------------------------------------------------------
// Profile files (YAML, one document per pose).

inline constexpr int kProfileVersion = 1;

inline std::string write_profile(const PoseProfile& p) {
  YAML::Emitter out;
  out.SetDoublePrecision(12);
  out << YAML::BeginMap;
  out << YAML::Key << "profile_version" << YAML::Value << kProfileVersion;
  out << YAML::Key << "pose_id" << YAML::Value << p.pose_id;
  out << YAML::Key << "kind" << YAML::Value << std::string(to_string(p.kind));
  auto section = [&](const char* key, const std::vector<Constraint>& cs) {
    out << YAML::Key << key << YAML::Value << YAML::BeginSeq;
    for (const auto& c : cs) {
      out << YAML::Flow << YAML::BeginMap << YAML::Key << "name" << YAML::Value << c.name << YAML::Key
          << "target" << YAML::Value << c.target << YAML::Key << "tolerance" << YAML::Value << c.tolerance
          << YAML::EndMap;
    }
    out << YAML::EndSeq;
  };
  section("angles", p.angles);
  section("slopes", p.slopes);
  section("distances", p.distances);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

inline PoseProfile parse_profile(const std::string& text) {
  PoseProfile p;
  try {
    const YAML::Node doc = YAML::Load(text);
    if (!doc["profile_version"] || doc["profile_version"].as<int>() != kProfileVersion)
      throw Error(ErrorCode::InvalidProfile, "profile_version must be 1");
    p.pose_id = doc["pose_id"].as<std::string>();
    p.kind = parse_kind(doc["kind"].as<std::string>());
    auto section = [&](const char* key, std::vector<Constraint>& cs) {
      if (!doc[key]) return;
      for (const auto& n : doc[key])
        cs.push_back({n["name"].as<std::string>(), n["target"].as<double>(), n["tolerance"].as<double>()});
    };
    section("angles", p.angles);
    section("slopes", p.slopes);
    section("distances", p.distances);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidProfile, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidProfile) throw;
    throw Error(ErrorCode::InvalidProfile, e.what());
  }
  validate_profile(p);
  return p;
}

inline PoseProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_profile(ss.str());
}

inline void save_profile(const PoseProfile& p, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << write_profile(p);
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

/// Every *.yaml / *.yml file in `dir`, keyed by pose id.
inline std::map<std::string, PoseProfile> load_profiles_dir(const std::string& dir) {
  std::map<std::string, PoseProfile> out;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error(ErrorCode::IoError, "not a directory: '" + dir + "'");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".yaml" || ext == ".yml")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto p = load_profile(f.string());
    out[p.pose_id] = std::move(p);
  }
  return out;
}

}  // namespace asanakit

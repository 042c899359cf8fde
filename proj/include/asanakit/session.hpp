#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "asanakit/classifiers/model.hpp"
#include "asanakit/correction.hpp"
#include "asanakit/error.hpp"
#include "asanakit/geometry.hpp"
#include "asanakit/skeleton.hpp"

namespace asanakit {

inline constexpr std::string_view kUnstableLabel = "unstable";

inline std::int64_t wall_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------------------
// Messages

struct OpenMessage {
  std::string user_id;
  Kind kind = Kind::Hand;
};

struct FrameMessage {
  std::string session_id;
  std::int64_t seq = 0;
  Handedness handedness = Handedness::NA;
  std::int64_t timestamp_ms = 0;
  std::vector<double> landmarks;  // flat x, y, confidence triples
};

struct CloseMessage {
  std::string session_id;
};

using ClientMessage = std::variant<OpenMessage, FrameMessage, CloseMessage>;

struct ResultMessage {
  std::string session_id;
  std::int64_t seq = 0;
  std::string raw_label;
  std::string smoothed_label;
  double confidence = 0.0;
  std::vector<Deviation> corrections;
  std::vector<std::size_t> missing_joints;
  double latency_ms = 0.0;
};

struct SessionEntry {
  std::int64_t timestamp_ms = 0;
  std::string label;  // smoothed label
  bool correct = false;

  bool operator==(const SessionEntry&) const = default;
};

struct SessionRecord {
  std::string session_id;
  std::string user_id;
  Kind kind = Kind::Hand;
  std::int64_t started_at_ms = 0;
  std::int64_t ended_at_ms = 0;
  std::vector<SessionEntry> entries;

  bool operator==(const SessionRecord&) const = default;
};

/// Wire error codes, one per failure the stream can report.
inline std::string_view wire_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfOrder: return "out_of_order";
    case ErrorCode::UnknownSession: return "unknown_session";
    case ErrorCode::BadFrame:
    case ErrorCode::WrongCount:
    case ErrorCode::MissingLandmarks:
    case ErrorCode::DegenerateTriple:
    case ErrorCode::KindMismatch:
    case ErrorCode::NonFiniteFeature:
      return "bad_frame";
    default: return "internal";
  }
}

namespace wire {

using nlohmann::json;

inline ClientMessage parse_client(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFrame, std::string("malformed message: ") + e.what());
  }
  try {
    const auto t = j.at("t").get<std::string>();
    if (t == "open") {
      return OpenMessage{j.value("user", std::string("anonymous")),
                         parse_kind(j.value("kind", std::string("hand")))};
    }
    if (t == "frame") {
      FrameMessage f;
      f.session_id = j.at("sid").get<std::string>();
      f.seq = j.at("seq").get<std::int64_t>();
      f.timestamp_ms = j.value("ts", std::int64_t{0});
      f.handedness = parse_handedness(j.value("handed", std::string("na")));
      f.landmarks = j.at("lm").get<std::vector<double>>();
      return f;
    }
    if (t == "close") return CloseMessage{j.at("sid").get<std::string>()};
    throw Error(ErrorCode::BadFrame, "unknown message type '" + t + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFrame, std::string("bad message field: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BadFrame) throw;
    throw Error(ErrorCode::BadFrame, e.what());
  }
}

inline std::string encode_open(const OpenMessage& m) {
  return json{{"t", "open"}, {"user", m.user_id}, {"kind", std::string(to_string(m.kind))}}.dump();
}

inline std::string encode_frame(const FrameMessage& f) {
  return json{{"t", "frame"},
              {"sid", f.session_id},
              {"seq", f.seq},
              {"ts", f.timestamp_ms},
              {"handed", std::string(to_string(f.handedness))},
              {"lm", f.landmarks}}
      .dump();
}

inline std::string encode_close(const std::string& sid) { return json{{"t", "close"}, {"sid", sid}}.dump(); }

inline std::string encode_opened(const std::string& sid) { return json{{"t", "opened"}, {"sid", sid}}.dump(); }

inline std::string encode_closed(const SessionRecord& r) {
  return json{{"t", "closed"}, {"sid", r.session_id}, {"frames", r.entries.size()}}.dump();
}

inline json deviation_json(const Deviation& d) {
  return {{"name", d.constraint_name}, {"type", std::string(to_string(d.type))},
          {"observed", d.observed},    {"target", d.target},
          {"excess", d.excess},        {"dir", std::string(to_string(d.direction))},
          {"msg", d.message}};
}

inline std::string encode_result(const ResultMessage& r) {
  json fix = json::array();
  for (const auto& d : r.corrections) fix.push_back(deviation_json(d));
  return json{{"t", "result"},   {"sid", r.session_id},   {"seq", r.seq},
              {"raw", r.raw_label}, {"label", r.smoothed_label}, {"conf", r.confidence},
              {"fix", fix},         {"missing", r.missing_joints}, {"lat_ms", r.latency_ms}}
      .dump();
}

inline std::string encode_error(std::string_view code, const std::string& msg) {
  return json{{"t", "err"}, {"code", code}, {"msg", msg}}.dump();
}

inline FrameMessage frame_message(const std::string& sid, std::int64_t seq, const LandmarkFrame& frame) {
  FrameMessage m;
  m.session_id = sid;
  m.seq = seq;
  m.handedness = frame.handedness;
  m.timestamp_ms = frame.timestamp_ms;
  for (const auto& p : frame.landmarks) {
    m.landmarks.push_back(p.x);
    m.landmarks.push_back(p.y);
    m.landmarks.push_back(p.confidence);
  }
  return m;
}

inline LandmarkFrame frame_from_message(const FrameMessage& msg, Kind kind) {
  LandmarkFrame frame;
  frame.kind = kind;
  frame.handedness = msg.handedness;
  frame.timestamp_ms = msg.timestamp_ms;
  if (msg.landmarks.size() != 3 * landmark_count(kind))
    throw Error(ErrorCode::BadFrame, "expected " + std::to_string(3 * landmark_count(kind)) +
                                         " landmark values, got " + std::to_string(msg.landmarks.size()));
  for (std::size_t i = 0; i < msg.landmarks.size(); i += 3)
    frame.landmarks.push_back({msg.landmarks[i], msg.landmarks[i + 1], msg.landmarks[i + 2]});
  return frame;
}

}  // namespace wire

// ---------------------------------------------------------------------------
// Recordings: a client's side of the stream saved to a file. A leading open
// line names the kind; frame lines follow. Other message types are skipped.

struct Recording {
  Kind kind = Kind::Hand;
  std::vector<LandmarkFrame> frames;
};

inline Recording read_recording(std::istream& in, Kind default_kind = Kind::Hand) {
  Recording r{default_kind, {}};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto msg = wire::parse_client(line);
      if (auto* open = std::get_if<OpenMessage>(&msg)) {
        if (!r.frames.empty()) throw Error(ErrorCode::BadFrame, "open after frames");
        r.kind = open->kind;
      } else if (auto* f = std::get_if<FrameMessage>(&msg)) {
        r.frames.push_back(wire::frame_from_message(*f, r.kind));
      }
    } catch (const Error& e) {
      throw ParseError(line_no, 1, e.what());
    }
  }
  return r;
}

inline Recording load_recording(const std::string& path, Kind default_kind = Kind::Hand) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return read_recording(in, default_kind);
}

inline void write_recording(const Recording& r, std::ostream& out, const std::string& user = "recorder") {
  out << wire::encode_open({user, r.kind}) << '\n';
  for (std::size_t i = 0; i < r.frames.size(); ++i)
    out << wire::encode_frame(wire::frame_message("rec", static_cast<std::int64_t>(i + 1), r.frames[i])) << '\n';
}

inline void save_recording(const Recording& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  write_recording(r, out);
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Temporal smoothing

/// Majority vote over the last `window` raw labels. A label is reported
/// only when it holds a strict majority of the full window size and at least
/// `min_frames` labels have been seen.
class LabelSmoother {
 public:
  explicit LabelSmoother(std::size_t window = 15, std::size_t min_frames = 5)
      : window_(window), min_frames_(min_frames) {}

  std::string push(const std::string& raw) {
    labels_.push_back(raw);
    if (labels_.size() > window_) labels_.pop_front();
    if (labels_.size() < min_frames_) return std::string(kUnstableLabel);
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels_) ++counts[l];
    for (const auto& [label, n] : counts)
      if (2 * n > window_) return label;
    return std::string(kUnstableLabel);
  }

 private:
  std::size_t window_;
  std::size_t min_frames_;
  std::deque<std::string> labels_;
};

// ---------------------------------------------------------------------------
// Log store

/// Append-only daily log files (`sessions-YYYY-MM-DD.log`, UTC date of the
/// session start) holding one JSON object per line.
class LogStore {
 public:
  explicit LogStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (!std::filesystem::is_directory(dir_))
      throw Error(ErrorCode::IoError, "cannot create log directory '" + dir_.string() + "'");
  }

  const std::filesystem::path& dir() const { return dir_; }

  static std::string day_of(std::int64_t epoch_ms) {
    const std::time_t secs = static_cast<std::time_t>(epoch_ms / 1000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[16];
    std::strftime(buf, sizeof buf, "%Y-%m-%d", &tm);
    return buf;
  }

  void append(const SessionRecord& r) {
    using nlohmann::json;
    std::ostringstream lines;
    lines << json{{"type", "open"}, {"sid", r.session_id}, {"user", r.user_id},
                  {"kind", std::string(to_string(r.kind))}, {"start", r.started_at_ms}}
                 .dump()
          << '\n';
    for (const auto& e : r.entries)
      lines << json{{"type", "entry"}, {"sid", r.session_id}, {"ts", e.timestamp_ms},
                    {"label", e.label}, {"ok", e.correct}}
                   .dump()
            << '\n';
    lines << json{{"type", "close"}, {"sid", r.session_id}, {"end", r.ended_at_ms}}.dump() << '\n';

    std::lock_guard lock(mutex_);
    const auto path = dir_ / ("sessions-" + day_of(r.started_at_ms) + ".log");
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot append to '" + path.string() + "'");
    out << lines.str();
    if (!out.flush()) throw Error(ErrorCode::IoError, "append failed for '" + path.string() + "'");
  }

  /// Completed sessions whose [start, end] intersects [from_ms, to_ms].
  std::vector<SessionRecord> read(std::int64_t from_ms, std::int64_t to_ms) const {
    using nlohmann::json;
    std::vector<std::filesystem::path> files;
    const std::string last_day = day_of(to_ms);
    for (const auto& e : std::filesystem::directory_iterator(dir_)) {
      const auto name = e.path().filename().string();
      if (name.rfind("sessions-", 0) != 0 || e.path().extension() != ".log") continue;
      if (name.substr(9, 10) > last_day) continue;
      files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());

    std::lock_guard lock(mutex_);
    std::vector<SessionRecord> out;
    for (const auto& f : files) {
      std::ifstream in(f);
      std::map<std::string, SessionRecord> open;
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
          j = json::parse(line);
        } catch (const json::exception&) {
          continue;  // torn trailing line from a crash
        }
        const auto type = j.value("type", std::string());
        const auto sid = j.value("sid", std::string());
        if (type == "open") {
          SessionRecord r;
          r.session_id = sid;
          r.user_id = j.value("user", std::string());
          r.kind = parse_kind(j.value("kind", std::string("hand")));
          r.started_at_ms = j.value("start", std::int64_t{0});
          open[sid] = std::move(r);
        } else if (type == "entry") {
          auto it = open.find(sid);
          if (it != open.end())
            it->second.entries.push_back(
                {j.value("ts", std::int64_t{0}), j.value("label", std::string()), j.value("ok", false)});
        } else if (type == "close") {
          auto it = open.find(sid);
          if (it == open.end()) continue;
          it->second.ended_at_ms = j.value("end", std::int64_t{0});
          if (it->second.started_at_ms <= to_ms && it->second.ended_at_ms >= from_ms)
            out.push_back(std::move(it->second));
          open.erase(it);
        }
      }
    }
    return out;
  }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Activity reports

struct PoseActivity {
  double seconds = 0.0;
  std::size_t sessions = 0;
  std::size_t frames = 0;
  std::size_t correct_frames = 0;

  double correct_fraction() const {
    return frames ? static_cast<double>(correct_frames) / static_cast<double>(frames) : 0.0;
  }
};

struct ActivityReport {
  std::string user_id;
  std::int64_t from_ms = 0;
  std::int64_t to_ms = 0;
  std::map<std::string, PoseActivity> poses;
};

inline constexpr std::int64_t kMaxFrameGapMs = 1000;

/// Adds one session to a report. Each inter-frame delta (capped at 1 s) is
/// credited to the later frame's smoothed label. Warm-up frames logged as
/// "unstable" before the first stable label are credited to that label;
/// other unstable frames are not credited.
inline void accumulate(ActivityReport& report, const SessionRecord& r) {
  std::string first_stable;
  for (const auto& e : r.entries)
    if (e.label != kUnstableLabel) {
      first_stable = e.label;
      break;
    }
  std::set<std::string> seen;
  bool warmup = true;
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const auto& e = r.entries[i];
    const bool stable = e.label != kUnstableLabel;
    if (stable) warmup = false;
    const std::string effective = stable ? e.label : (warmup ? first_stable : std::string());
    if (effective.empty()) continue;
    auto& pose = report.poses[effective];
    if (seen.insert(effective).second) ++pose.sessions;
    if (i > 0) {
      const auto delta = std::clamp<std::int64_t>(e.timestamp_ms - r.entries[i - 1].timestamp_ms, 0,
                                                  kMaxFrameGapMs);
      pose.seconds += static_cast<double>(delta) / 1000.0;
    }
    if (stable) {
      ++pose.frames;
      if (e.correct) ++pose.correct_frames;
    }
  }
}

inline ActivityReport activity_report(const std::string& user_id, std::int64_t from_ms, std::int64_t to_ms,
                                      const LogStore& store) {
  ActivityReport report{user_id, from_ms, to_ms, {}};
  for (const auto& r : store.read(from_ms, to_ms))
    if (r.user_id == user_id) accumulate(report, r);
  return report;
}

inline std::string render_activity(const ActivityReport& r) {
  std::ostringstream os;
  os << "user " << r.user_id << "  window " << LogStore::day_of(r.from_ms) << " .. "
     << LogStore::day_of(r.to_ms) << '\n';
  if (r.poses.empty()) {
    os << "no activity\n";
    return os.str();
  }
  os << std::left << std::setw(14) << "pose" << std::right << std::setw(10) << "seconds" << std::setw(10)
     << "sessions" << std::setw(10) << "correct" << '\n';
  os << std::fixed;
  for (const auto& [pose, a] : r.poses)
    os << std::left << std::setw(14) << pose << std::right << std::setw(10) << std::setprecision(1)
       << a.seconds << std::setw(10) << a.sessions << std::setw(10) << std::setprecision(3)
       << a.correct_fraction() << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Session manager

struct SessionConfig {
  std::size_t window = 15;
  std::size_t min_frames = 5;
  double min_confidence = kDefaultMinConfidence;
};

/// Owns the live sessions. Frames of one session are processed one at a time
/// in seq order; different sessions run concurrently. The model and profiles
/// are shared read-only.
class SessionManager {
 public:
  SessionManager(std::shared_ptr<const ml::TrainedModel> model, std::map<std::string, PoseProfile> profiles,
                 std::shared_ptr<LogStore> store, SessionConfig config = {})
      : model_(std::move(model)),
        profiles_(std::move(profiles)),
        store_(std::move(store)),
        config_(config),
        id_salt_(std::random_device{}()) {}

  const ml::TrainedModel& model() const { return *model_; }

  std::string open_session(const std::string& user_id, Kind kind) {
    if (kind != model_->kind)
      throw Error(ErrorCode::KindMismatch, "this service classifies " + std::string(to_string(model_->kind)) +
                                               " frames");
    auto state = std::make_shared<State>(config_);
    state->record.user_id = user_id;
    state->record.kind = kind;
    state->record.started_at_ms = wall_clock_ms();
    std::lock_guard lock(mutex_);
    std::ostringstream id;
    id << "s" << std::hex << id_salt_ << "-" << std::dec << ++counter_;
    state->record.session_id = id.str();
    sessions_[id.str()] = state;
    return id.str();
  }

  ResultMessage handle_frame(const FrameMessage& msg) {
    const auto start = std::chrono::steady_clock::now();
    auto state = find(msg.session_id);
    std::lock_guard lock(state->mutex);
    if (state->closed) throw Error(ErrorCode::UnknownSession, "session '" + msg.session_id + "' is closed");
    if (state->last_seq && msg.seq <= *state->last_seq)
      throw Error(ErrorCode::OutOfOrder, "seq " + std::to_string(msg.seq) + " after " +
                                             std::to_string(*state->last_seq));
    const auto frame = wire::frame_from_message(msg, state->record.kind);

    // Classification uses every estimated point; low-confidence points only
    // suppress the corrections that depend on them.
    FeatureVector features;
    try {
      features = extract_features(frame, topology_for(frame.kind), 0.0);
    } catch (const Error& e) {
      throw Error(ErrorCode::BadFrame, e.what());
    }
    state->last_seq = msg.seq;  // a rejected frame does not use up its seq
    const auto prediction = ml::predict(*model_, features);

    ResultMessage out;
    out.session_id = msg.session_id;
    out.seq = msg.seq;
    out.raw_label = model_->class_names.at(prediction.label);
    out.confidence = prediction.scores.at(prediction.label);
    out.smoothed_label = state->smoother.push(out.raw_label);

    bool correct = false;
    if (out.smoothed_label != kUnstableLabel) {
      auto it = profiles_.find(out.smoothed_label);
      if (it != profiles_.end() && it->second.kind == frame.kind) {
        auto result = evaluate_pose(frame, it->second, config_.min_confidence);
        out.corrections = std::move(result.deviations);
        out.missing_joints = std::move(result.missing_joints);
        correct = result.correct;
      } else {
        correct = validate_frame(frame, config_.min_confidence).ok;
        if (!correct) out.missing_joints = validate_frame(frame, config_.min_confidence).missing;
      }
    }
    state->record.entries.push_back({msg.timestamp_ms, out.smoothed_label, correct});
    out.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

  SessionRecord close_session(const std::string& session_id) {
    std::shared_ptr<State> state;
    {
      std::lock_guard lock(mutex_);
      auto it = sessions_.find(session_id);
      if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session '" + session_id + "'");
      state = it->second;
      sessions_.erase(it);
    }
    std::lock_guard lock(state->mutex);
    state->closed = true;
    state->record.ended_at_ms = std::max(wall_clock_ms(), state->record.started_at_ms);
    if (store_) store_->append(state->record);
    return state->record;
  }

  std::size_t open_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
  }

 private:
  struct State {
    explicit State(const SessionConfig& c) : smoother(c.window, c.min_frames) {}
    std::mutex mutex;
    SessionRecord record;
    LabelSmoother smoother;
    std::optional<std::int64_t> last_seq;
    bool closed = false;
  };

  std::shared_ptr<State> find(const std::string& sid) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(sid);
    if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session '" + sid + "'");
    return it->second;
  }

  std::shared_ptr<const ml::TrainedModel> model_;
  std::map<std::string, PoseProfile> profiles_;
  std::shared_ptr<LogStore> store_;
  SessionConfig config_;
  unsigned id_salt_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<State>> sessions_;
  std::uint64_t counter_ = 0;
};

/// Protocol state for one connection: at most one session, closed
/// server-side when the connection drops.
class ProtocolHandler {
 public:
  explicit ProtocolHandler(SessionManager& manager) : manager_(manager) {}
  ~ProtocolHandler() { disconnect(); }

  ProtocolHandler(const ProtocolHandler&) = delete;
  ProtocolHandler& operator=(const ProtocolHandler&) = delete;

  std::string handle_line(std::string_view line) {
    try {
      auto msg = wire::parse_client(line);
      if (auto* open = std::get_if<OpenMessage>(&msg)) {
        if (session_) throw Error(ErrorCode::BadFrame, "connection already has session " + *session_);
        session_ = manager_.open_session(open->user_id, open->kind);
        return wire::encode_opened(*session_);
      }
      if (auto* frame = std::get_if<FrameMessage>(&msg)) {
        if (!session_ || frame->session_id != *session_)
          throw Error(ErrorCode::UnknownSession, "unknown session '" + frame->session_id + "'");
        return wire::encode_result(manager_.handle_frame(*frame));
      }
      const auto& close = std::get<CloseMessage>(msg);
      if (!session_ || close.session_id != *session_)
        throw Error(ErrorCode::UnknownSession, "unknown session '" + close.session_id + "'");
      session_.reset();
      return wire::encode_closed(manager_.close_session(close.session_id));
    } catch (const Error& e) {
      return wire::encode_error(wire_code(e.code()), e.what());
    } catch (const std::exception& e) {
      return wire::encode_error("internal", e.what());
    }
  }

  void disconnect() noexcept {
    if (!session_) return;
    try {
      manager_.close_session(*session_);
    } catch (...) {
    }
    session_.reset();
  }

  const std::optional<std::string>& session() const { return session_; }

 private:
  SessionManager& manager_;
  std::optional<std::string> session_;
};

}  // namespace asanakit

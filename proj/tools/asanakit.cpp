// asanakit command-line tool.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage error.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <csignal>
#include <ctime>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "asanakit/asanakit.hpp"
#include "asanakit/server.hpp"

namespace fs = std::filesystem;
using namespace asanakit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string data_dir = "asanakit-data";
  std::string model_path;
  std::string profiles_dir;
  std::uint64_t seed = 42;
  std::string log_level = "warn";
};

// A setting resolves as flag > ASANAKIT_* environment > config file > default.
struct Setting {
  std::vector<CLI::Option*> flags;
  const char* env;
  const char* key;
  std::function<void(const std::string&)> assign;
};

void resolve_settings(const std::vector<Setting>& settings, const std::string& config_path) {
  YAML::Node config;
  if (!config_path.empty()) {
    try {
      config = YAML::LoadFile(config_path);
    } catch (const YAML::Exception& e) {
      throw UsageError("cannot read config '" + config_path + "': " + e.what());
    }
    if (config && !config.IsNull() && !config.IsMap()) throw UsageError("config file must be a mapping");
    for (const auto& kv : config) {
      const auto key = kv.first.as<std::string>();
      if (std::none_of(settings.begin(), settings.end(), [&](const Setting& s) { return key == s.key; }))
        throw UsageError("unknown config key '" + key + "'");
    }
  }
  for (const auto& s : settings) {
    if (std::any_of(s.flags.begin(), s.flags.end(), [](CLI::Option* o) { return o->count() > 0; })) continue;
    if (const char* v = std::getenv(s.env); v && *v) {
      s.assign(v);
    } else if (config && config[s.key]) {
      s.assign(config[s.key].as<std::string>());
    }
  }
}

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw UsageError("seed must be an unsigned integer, got '" + text + "'");
  return v;
}

std::string require_model(const Globals& g) {
  if (g.model_path.empty()) throw UsageError("--model is required (or ASANAKIT_MODEL, or 'model' in the config)");
  if (!fs::is_regular_file(g.model_path)) throw Error(ErrorCode::IoError, "no such model file '" + g.model_path + "'");
  return g.model_path;
}

fs::path logs_dir(const Globals& g) { return fs::path(g.data_dir) / "logs"; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

// key=value pairs from --param
ml::Hyperparams parse_params(const std::vector<std::string>& items) {
  ml::Hyperparams h;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + item + "'");
    h[item.substr(0, eq)] = ml::parse_param_value(item.substr(eq + 1));
  }
  return h;
}

Dataset dataset_from_recording(const Recording& r, const std::string& label) {
  Dataset d{r.kind, {}, {label}};
  const auto& topo = topology_for(r.kind);
  for (std::size_t i = 0; i < r.frames.size(); ++i)
    d.samples.push_back({extract_features(r.frames[i], topo, 0.0), 0, label, "frame:" + std::to_string(i + 1)});
  return d;
}

// "7d", "12h", "2w" -> milliseconds
std::int64_t parse_window(const std::string& text) {
  static const std::regex re(R"((\d+)\s*([hdw]))");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw UsageError("--window expects <n>h, <n>d or <n>w, got '" + text + "'");
  const std::int64_t n = std::stoll(m[1]);
  const std::int64_t unit = m[2] == "h" ? 3'600'000 : m[2] == "d" ? 86'400'000 : 7 * 86'400'000;
  return n * unit;
}

std::int64_t parse_day(const std::string& text) {
  std::tm tm{};
  std::istringstream in(text);
  in >> std::get_time(&tm, "%Y-%m-%d");
  if (in.fail() || !in.eof()) throw UsageError("expected a YYYY-MM-DD date, got '" + text + "'");
  return static_cast<std::int64_t>(timegm(&tm)) * 1000;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t per_class = 500;
  double noise = 6.0;
  std::string out;
  std::string session;
  std::size_t frames = 300;
  double fps = 30.0;
};

int cmd_synth(const Globals& g, const SynthArgs& a) {
  if (!a.session.empty()) {
    Recording r{Kind::Hand, synth_session(a.session, a.frames, a.fps, a.noise, g.seed)};
    save_recording(r, a.out);
    std::cout << "wrote " << r.frames.size() << " " << a.session << " frames to " << a.out << "\n";
    return kExitOk;
  }
  const auto d = synth_mudra_dataset(a.per_class, a.noise, g.seed);
  save_dataset(d, a.out);
  const auto counts = d.class_counts();
  for (std::size_t c = 0; c < d.num_classes(); ++c) std::cout << d.class_names[c] << "\t" << counts[c] << "\n";
  std::cout << "wrote " << d.size() << " samples to " << a.out << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string family;
  std::vector<std::string> params;
  std::string data;
  std::string out;
  bool search = false;
  bool one_vs_rest = false;
  std::size_t n_iter = 10;
  std::size_t folds = 5;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
  ml::ModelSpec spec;
  spec.family = ml::parse_family(a.family);
  spec.hyperparams = parse_params(a.params);
  spec.seed = g.seed;
  if (a.search && spec.family != ml::Family::GBDT) throw UsageError("--search is only defined for --family gbdt");
  if (a.one_vs_rest) spec = ml::ModelSpec::one_vs_rest(spec, g.seed);
  ml::validate(spec);

  const auto d = load_dataset(a.data);
  spdlog::info("training {} on {} samples", spec.describe(), d.size());
  if (a.search) {
    auto search = default_gbdt_search(g.seed, a.n_iter, a.folds);
    for (const auto& [k, v] : spec.hyperparams) {
      search.param_distributions.erase(k);
      search.fixed[k] = v;
    }
    const auto found = ml::random_search_cv(search, d);
    std::cout << "search best cv accuracy " << found.best_cv_accuracy << "\n";
    spec = found.best_spec;
  }
  const auto model = ml::train(spec, d);
  save_model_file(model, a.out);
  const auto eval = evaluate(model, d);
  std::cout << "model " << spec.describe() << "\n"
            << "training accuracy " << eval.report.accuracy << " (n=" << d.size() << ")\n"
            << "saved " << a.out << "\n";
  return kExitOk;
}

struct PredictArgs {
  std::string data;
  std::string recording;
  std::string out;
  std::string matrix;
  std::string heatmap;
  std::string format = "text";
};

int cmd_predict(const Globals& g, const PredictArgs& a) {
  const auto model = ml::load_model_file(require_model(g));
  std::ostringstream rows;
  if (!a.recording.empty()) {
    const auto r = load_recording(a.recording, model.kind);
    if (r.kind != model.kind) throw Error(ErrorCode::KindMismatch, "recording kind differs from the model's");
    LabelSmoother smoother;
    std::map<std::string, std::size_t> stable;
    rows << "frame,timestamp_ms,raw,smoothed,confidence\n";
    for (std::size_t i = 0; i < r.frames.size(); ++i) {
      const auto p = ml::predict(model, extract_features(r.frames[i], topology_for(r.kind), 0.0));
      const auto& raw = model.class_names[p.label];
      const auto smoothed = smoother.push(raw);
      if (smoothed != kUnstableLabel) ++stable[smoothed];
      rows << i + 1 << "," << r.frames[i].timestamp_ms << "," << raw << "," << smoothed << ","
           << p.scores[p.label] << "\n";
    }
    if (a.out.empty()) std::cout << rows.str();
    std::cout << r.frames.size() << " frames";
    for (const auto& [label, n] : stable) std::cout << ", " << label << " stable for " << n;
    std::cout << "\n";
  } else {
    const auto d = load_dataset(a.data);
    rows << "source_id,label,predicted,confidence\n";
    for (const auto& s : d.samples) {
      const auto p = ml::predict(model, s.features);
      rows << s.source_id << "," << s.label_name << "," << model.class_names[p.label] << "," << p.scores[p.label]
           << "\n";
    }
    const auto eval = evaluate(model, d);
    std::cout << "accuracy " << eval.report.accuracy << " (n=" << d.size() << ")\n";
    std::cout << render_report(eval.report, a.format == "csv" ? ReportFormat::CSV : ReportFormat::Text);
    if (!a.matrix.empty()) write_text(a.matrix, render_matrix_csv(eval.matrix));
    if (!a.heatmap.empty()) write_text(a.heatmap, render_heatmap_pgm(eval.matrix));
  }
  if (!a.out.empty()) write_text(a.out, rows.str());
  return kExitOk;
}

struct BenchArgs {
  std::string data;
  double test_fraction = 0.2;
  std::string out;
  std::string model_out;
};

int cmd_bench(const Globals& g, const BenchArgs& a) {
  const auto d = load_dataset(a.data);
  const auto [train_set, test_set] = split(d, {1.0 - a.test_fraction, g.seed, true});
  std::cerr << "train " << train_set.size() << ", test " << test_set.size() << "\n";
  const auto result = run_bench(default_bench_configs(g.seed), train_set, test_set, [](const BenchRow& r) {
    std::cerr << "  " << r.model << " [" << r.params << "] " << r.accuracy << " in " << r.seconds << " s\n";
  });
  std::ostringstream text;
  text << render_bench(result) << "\n"
       << "per-class report for " << result.rows[result.best].model << "\n"
       << render_report(result.best_evaluation.report, ReportFormat::Text);
  std::cout << text.str();
  if (!a.out.empty()) write_text(a.out, text.str());
  if (!a.model_out.empty()) save_model_file(result.best_model, a.model_out);
  return kExitOk;
}

struct ProfileBuildArgs {
  std::string pose;
  std::string data;
  std::vector<std::string> recordings;
  double k_sigma = 2.0;
  double floor = 5.0;
  std::string out;
};

int cmd_profile_build(const Globals& g, const ProfileBuildArgs& a) {
  Dataset d;
  if (!a.data.empty()) {
    d = load_dataset(a.data);
  } else {
    for (const auto& path : a.recordings) {
      auto part = dataset_from_recording(load_recording(path), a.pose);
      if (d.samples.empty()) d = std::move(part);
      else if (part.kind != d.kind) throw Error(ErrorCode::KindMismatch, "recordings mix hand and body frames");
      else d.samples.insert(d.samples.end(), part.samples.begin(), part.samples.end());
    }
  }
  const auto profile = profile_from_samples(d, a.pose, a.k_sigma, a.floor);
  const auto out = a.out.empty() ? (fs::path(g.data_dir) / "profiles" / (a.pose + ".yaml")).string() : a.out;
  if (auto parent = fs::path(out).parent_path(); !parent.empty()) fs::create_directories(parent);
  save_profile(profile, out);
  std::cout << "profile " << a.pose << ": " << profile.angles.size() << " angle constraints -> " << out << "\n";
  return kExitOk;
}

struct ProfileCheckArgs {
  std::vector<std::string> paths;
  std::string recording;
};

int cmd_profile_check(const Globals&, const ProfileCheckArgs& a) {
  std::vector<PoseProfile> profiles;
  int status = kExitOk;
  for (const auto& path : a.paths) {
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
      for (const auto& e : fs::directory_iterator(path))
        if (e.path().extension() == ".yaml" || e.path().extension() == ".yml") files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(path);
    }
    for (const auto& f : files) {
      try {
        profiles.push_back(load_profile(f));
        const auto& p = profiles.back();
        std::cout << "ok      " << f << " (" << p.pose_id << ", " << to_string(p.kind) << ", "
                  << p.angles.size() + p.slopes.size() + p.distances.size() << " constraints)\n";
      } catch (const Error& e) {
        std::cout << "invalid " << f << ": " << e.what() << "\n";
        status = kExitRuntime;
      }
    }
  }
  if (a.recording.empty()) return status;

  const auto r = load_recording(a.recording);
  for (const auto& p : profiles) {
    if (p.kind != r.kind) continue;
    std::size_t ok = 0;
    std::map<std::string, std::size_t> misses;
    for (const auto& f : r.frames) {
      const auto res = evaluate_pose(f, p);
      ok += res.correct;
      for (const auto& dev : res.deviations) ++misses[dev.constraint_name];
    }
    std::cout << p.pose_id << ": " << ok << "/" << r.frames.size() << " frames correct";
    for (const auto& [name, n] : misses) std::cout << ", " << name << " off in " << n;
    std::cout << "\n";
  }
  return status;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  std::uint16_t port = 8765;
  std::size_t window = 15;
  std::size_t min_frames = 5;
  double min_confidence = kDefaultMinConfidence;
};

int cmd_serve(const Globals& g, const ServeArgs& a) {
  auto model = std::make_shared<const ml::TrainedModel>(ml::load_model_file(require_model(g)));
  const auto profiles_dir = g.profiles_dir.empty() ? fs::path(g.data_dir) / "profiles" : fs::path(g.profiles_dir);
  std::map<std::string, PoseProfile> profiles;
  if (fs::is_directory(profiles_dir)) profiles = load_profiles_dir(profiles_dir.string());
  else if (!g.profiles_dir.empty()) throw Error(ErrorCode::IoError, "no such directory '" + g.profiles_dir + "'");
  auto store = std::make_shared<LogStore>(logs_dir(g));
  const auto manager_profiles = profiles.size();
  SessionManager manager(model, std::move(profiles), store, {a.window, a.min_frames, a.min_confidence});

  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t stop;
  sigemptyset(&stop);
  sigaddset(&stop, SIGINT);
  sigaddset(&stop, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop, nullptr);

  SessionServer server(manager, a.host, a.port);
  const auto port = server.start();
  std::cout << "listening on " << a.host << ":" << port << std::endl;
  spdlog::info("{} classes, {} profiles, logs in {}", model->class_names.size(), manager_profiles, logs_dir(g).string());
  int sig = 0;
  sigwait(&stop, &sig);
  spdlog::info("signal {}, shutting down", sig);
  server.stop();
  return kExitOk;
}

struct ReportArgs {
  std::string user;
  std::string window = "7d";
  std::string from;
  std::string to;
  std::string format = "text";
};

int cmd_report(const Globals& g, const ReportArgs& a) {
  std::int64_t to_ms = a.to.empty() ? wall_clock_ms() : parse_day(a.to) + 86'400'000 - 1;
  std::int64_t from_ms = a.from.empty() ? to_ms - parse_window(a.window) : parse_day(a.from);
  if (from_ms > to_ms) throw UsageError("--from is after --to");
  ActivityReport rep{a.user, from_ms, to_ms, {}};
  if (fs::is_directory(logs_dir(g))) rep = activity_report(a.user, from_ms, to_ms, LogStore(logs_dir(g)));
  if (a.format == "json") {
    nlohmann::json j{{"user", rep.user_id}, {"from_ms", rep.from_ms}, {"to_ms", rep.to_ms}, {"poses", nlohmann::json::object()}};
    for (const auto& [pose, act] : rep.poses)
      j["poses"][pose] = {{"seconds", act.seconds}, {"sessions", act.sessions}, {"frames", act.frames},
                          {"correct_fraction", act.correct_fraction()}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << render_activity(rep);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose and mudra recognition toolkit: synthetic data, classifiers, correction profiles, live sessions"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::string config_path;
  auto* config_opt = app.add_option("--config", config_path, "YAML file with data_dir, seed, log_level, model, profiles_dir")
                         ->check(CLI::ExistingFile);
  auto* data_dir_opt = app.add_option("--data-dir", g.data_dir, "Directory for session logs and profiles [env ASANAKIT_DATA_DIR]")
                           ->capture_default_str();
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed for every stochastic step [env ASANAKIT_SEED]")
                       ->capture_default_str();
  auto* log_opt = app.add_option("--log-level", g.log_level, "Diagnostics on stderr [env ASANAKIT_LOG_LEVEL]")
                      ->check(CLI::IsMember({"error", "warn", "info", "debug"}))
                      ->capture_default_str();
  std::vector<CLI::Option*> model_opts;
  CLI::Option* profiles_opt = nullptr;

  std::function<int()> run;

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic mudra dataset (or a session recording with --session)");
  s->add_option("--per-class", synth.per_class, "Samples per mudra")->check(CLI::Range(2, 10'000'000))->capture_default_str();
  s->add_option("--noise", synth.noise, "Joint jitter SD in degrees")->check(CLI::NonNegativeNumber)->capture_default_str();
  s->add_option("--out", synth.out, "Output path")->required();
  s->add_option("--session", synth.session, "Mudra name: write a landmark recording instead of a dataset")
      ->check(CLI::IsMember(template_names(default_mudra_templates())));
  s->add_option("--frames", synth.frames, "Recording length in frames")->check(CLI::Range(1, 10'000'000))->capture_default_str();
  s->add_option("--fps", synth.fps, "Recording frame rate")->check(CLI::PositiveNumber)->capture_default_str();
  s->callback([&] { run = [&] { return cmd_synth(g, synth); }; });

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Fit a classifier and save it");
  t->add_option("--family", train.family, "knn, tree, forest, nb, logreg, svm, mlp or gbdt")->required();
  t->add_option("--param", train.params, "Hyperparameter key=value (repeatable)");
  t->add_option("--data", train.data, "Feature dataset CSV")->required()->check(CLI::ExistingFile);
  t->add_option("--out", train.out, "Model output path")->required();
  t->add_flag("--search", train.search, "Random search with cross-validation (gbdt only)");
  t->add_flag("--one-vs-rest", train.one_vs_rest, "Wrap the family in one-vs-rest");
  t->add_option("--n-iter", train.n_iter, "Search iterations")->check(CLI::PositiveNumber)->capture_default_str();
  t->add_option("--cv", train.folds, "Search folds")->check(CLI::Range(2, 100))->capture_default_str();
  t->callback([&] { run = [&] { return cmd_train(g, train); }; });

  PredictArgs predict;
  auto* p = app.add_subcommand("predict", "Label a feature CSV or a landmark recording");
  model_opts.push_back(p->add_option("--model", g.model_path, "Trained model [env ASANAKIT_MODEL]"));
  auto* pdata = p->add_option("--data", predict.data, "Labelled feature CSV")->check(CLI::ExistingFile);
  auto* prec = p->add_option("--recording", predict.recording, "Landmark recording (NDJSON)")->check(CLI::ExistingFile);
  pdata->excludes(prec);
  p->add_option("--out", predict.out, "Write per-row predictions as CSV");
  p->add_option("--matrix", predict.matrix, "Write the confusion matrix as CSV");
  p->add_option("--heatmap", predict.heatmap, "Write the confusion matrix as a PGM image");
  p->add_option("--format", predict.format, "Per-class report format")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();
  p->callback([&] {
    if (predict.data.empty() && predict.recording.empty()) throw CLI::RequiredError("--data or --recording");
    run = [&] { return cmd_predict(g, predict); };
  });

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Compare every configured model on one split");
  b->add_option("--data", bench.data, "Feature dataset CSV")->required()->check(CLI::ExistingFile);
  b->add_option("--test-fraction", bench.test_fraction, "Held-out share")->check(CLI::Range(0.05, 0.95))->capture_default_str();
  b->add_option("--out", bench.out, "Also write the tables here");
  b->add_option("--model-out", bench.model_out, "Save the best model here");
  b->callback([&] { run = [&] { return cmd_bench(g, bench); }; });

  auto* prof = app.add_subcommand("profile", "Build or check correction profiles");
  prof->require_subcommand(1);
  ProfileBuildArgs pbuild;
  auto* pb = prof->add_subcommand("build", "Derive a profile from exemplar samples");
  pb->add_option("--pose", pbuild.pose, "Pose name (the class label in --data)")->required();
  auto* pbdata = pb->add_option("--data", pbuild.data, "Feature dataset CSV")->check(CLI::ExistingFile);
  auto* pbrec = pb->add_option("--recording", pbuild.recordings, "Recording(s) of the pose")->check(CLI::ExistingFile);
  pbdata->excludes(pbrec);
  pb->add_option("--k-sigma", pbuild.k_sigma, "Tolerance in standard deviations")->check(CLI::PositiveNumber)->capture_default_str();
  pb->add_option("--floor", pbuild.floor, "Minimum tolerance in degrees")->check(CLI::NonNegativeNumber)->capture_default_str();
  pb->add_option("--out", pbuild.out, "Output file (default <data-dir>/profiles/<pose>.yaml)");
  pb->callback([&] {
    if (pbuild.data.empty() && pbuild.recordings.empty()) throw CLI::RequiredError("--data or --recording");
    run = [&] { return cmd_profile_build(g, pbuild); };
  });
  ProfileCheckArgs pcheck;
  auto* pc = prof->add_subcommand("check", "Validate profile files, optionally against a recording");
  pc->add_option("paths", pcheck.paths, "Profile files or directories")->required()->check(CLI::ExistingPath);
  pc->add_option("--recording", pcheck.recording, "Evaluate every frame of this recording")->check(CLI::ExistingFile);
  pc->callback([&] { run = [&] { return cmd_profile_check(g, pcheck); }; });

  ServeArgs serve;
  auto* sv = app.add_subcommand("serve", "Run the live session service (NDJSON or WebSocket on one port)");
  model_opts.push_back(sv->add_option("--model", g.model_path, "Trained model [env ASANAKIT_MODEL]"));
  profiles_opt = sv->add_option("--profiles-dir", g.profiles_dir,
                                "Profiles (default <data-dir>/profiles) [env ASANAKIT_PROFILES_DIR]");
  sv->add_option("--host", serve.host, "Listen address")->capture_default_str();
  sv->add_option("--port", serve.port, "Port, 0 picks a free one")->capture_default_str();
  sv->add_option("--window", serve.window, "Smoothing window")->check(CLI::Range(1, 1000))->capture_default_str();
  sv->add_option("--min-frames", serve.min_frames, "Frames before a stable label")->check(CLI::Range(1, 1000))->capture_default_str();
  sv->add_option("--min-confidence", serve.min_confidence, "Landmark confidence for corrections")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sv->callback([&] { run = [&] { return cmd_serve(g, serve); }; });

  ReportArgs report;
  auto* r = app.add_subcommand("report", "Activity per pose for one user");
  r->add_option("--user", report.user, "User id")->required();
  r->add_option("--window", report.window, "Look-back window ending now: <n>h, <n>d or <n>w")->capture_default_str();
  r->add_option("--from", report.from, "First day, YYYY-MM-DD (UTC)");
  r->add_option("--to", report.to, "Last day, YYYY-MM-DD (UTC)");
  r->add_option("--format", report.format, "Output format")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  r->callback([&] { run = [&] { return cmd_report(g, report); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  auto logger = spdlog::stderr_color_mt("asanakit");
  spdlog::set_default_logger(logger);
  try {
    if (config_opt->count() == 0)
      if (const char* env = std::getenv("ASANAKIT_CONFIG"); env && *env) config_path = env;
    resolve_settings(
        {
            {{data_dir_opt}, "ASANAKIT_DATA_DIR", "data_dir", [&](const std::string& v) { g.data_dir = v; }},
            {{seed_opt}, "ASANAKIT_SEED", "seed", [&](const std::string& v) { g.seed = parse_seed(v); }},
            {{log_opt}, "ASANAKIT_LOG_LEVEL", "log_level",
             [&](const std::string& v) {
               if (v != "error" && v != "warn" && v != "info" && v != "debug") throw UsageError("bad log level '" + v + "'");
               g.log_level = v;
             }},
            {model_opts, "ASANAKIT_MODEL", "model", [&](const std::string& v) { g.model_path = v; }},
            {{profiles_opt}, "ASANAKIT_PROFILES_DIR", "profiles_dir", [&](const std::string& v) { g.profiles_dir = v; }},
        },
        config_path);
    spdlog::set_level(spdlog::level::from_str(g.log_level));
    return run();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidHyperparam ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

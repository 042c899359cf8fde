// Acceptance suite: one PASS/FAIL line per primary criterion. Thresholds are
// pinned below; exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "asanakit/asanakit.hpp"
#include "asanakit/server.hpp"
#include "classifier_fixtures.hpp"
#include "test_util.hpp"

using namespace asanakit;
using testutil::blobs;
using testutil::spec_of;

namespace {

// Tolerances and budgets.
constexpr double kAngleTol = 1e-9;          // degrees, vs the dot-product oracle
constexpr double kInvarianceTol = 1e-6;     // degrees, under similarity transforms
constexpr double kGeometryBudget = 5.0;     // seconds
constexpr double kGradRelTol = 1e-4;
constexpr double kClassifierBudget = 60.0;
constexpr double kKnnBudget = 5.0;
constexpr double kMinGbdtAccuracy = 0.95;
constexpr std::size_t kMaxGbdtRank = 3;
constexpr double kBenchBudget = 600.0;
constexpr double kMinF1 = 0.90;
constexpr std::uint64_t kTestSupport = 500;
constexpr double kSelfConsistency = 0.95;
constexpr double kProfileExemplarNoise = 3.0;  // same jitter as the session replay
constexpr std::size_t kStableWithin = 15;
constexpr double kMaxFrameMs = 5.0;
constexpr std::size_t kReplayFrames = 300;
constexpr double kReplayFps = 30.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& why) {
    if (!ok) {
      if (!pass) detail << "; ";
      pass = false;
      detail << why;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------

double dot_angle(const Landmark& a, const Landmark& b, const Landmark& c) {
  const double ux = a.x - b.x, uy = a.y - b.y, vx = c.x - b.x, vy = c.y - b.y;
  const double cosv = (ux * vx + uy * vy) / (std::hypot(ux, uy) * std::hypot(vx, vy));
  return std::acos(std::clamp(cosv, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

Outcome geometry() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const Landmark a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    worst = std::max(worst, std::abs(angle_at(a, b, c) - dot_angle(a, b, c)));
  }
  o.require(worst <= kAngleTol, "angle oracle error " + fmt(worst));

  const auto hands = synth_mudra_frames(10, 6.0, 5);
  double worst_inv = 0;
  for (int t = 0; t < 100; ++t) {
    const LandmarkFrame f = t % 2 ? hands[rng() % hands.size()].frame : testutil::body_frame();
    const double theta = 2 * std::numbers::pi * u(rng), scale = 0.2 + 3 * u(rng);
    const double tx = 4 * u(rng) - 2, ty = 4 * u(rng) - 2;
    const bool reflect = t % 4 >= 2;
    auto g = f;
    for (auto& p : g.landmarks) {
      const double x = reflect ? -p.x : p.x;
      const double nx = scale * (std::cos(theta) * x - std::sin(theta) * p.y) + tx;
      const double ny = scale * (std::sin(theta) * x + std::cos(theta) * p.y) + ty;
      p.x = nx;
      p.y = ny;
    }
    const auto a = extract_features(f).values, b = extract_features(g).values;
    for (std::size_t k = 0; k < a.size(); ++k) worst_inv = std::max(worst_inv, std::abs(a[k] - b[k]));
  }
  o.require(worst_inv <= kInvarianceTol, "invariance error " + fmt(worst_inv));
  const double secs = seconds_since(t0);
  o.require(secs < kGeometryBudget, "took " + fmt(secs) + " s");
  o.detail << (o.pass ? "" : "; ") << "oracle max err " << fmt(worst) << " deg, invariance max err "
           << fmt(worst_inv) << " deg, " << fmt(secs, 3) << " s";
  return o;
}

// ---------------------------------------------------------------------------

template <class Loss>
double grad_rel_error(const std::vector<double>& params, const std::vector<double>& grad, Loss loss) {
  double num2 = 0, diff2 = 0, ana2 = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params, m = params;
    p[k] += 1e-5;
    m[k] -= 1e-5;
    const double fd = (loss(p) - loss(m)) / 2e-5;
    diff2 += (fd - grad[k]) * (fd - grad[k]);
    num2 += fd * fd;
    ana2 += grad[k] * grad[k];
  }
  return std::sqrt(diff2) / std::max({std::sqrt(num2), std::sqrt(ana2), 1e-300});
}

Outcome classifiers() {
  using namespace ml;
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();

  const auto d = blobs(120, 4, 3, 8, 1.5);
  std::size_t nondeterministic = 0;
  for (const auto& spec : testutil::quick_specs()) {
    const auto a = train(spec, d), b = train(spec, d);
    for (const auto& s : d.samples)
      if (predict(a, s.features).scores != predict(b, s.features).scores) {
        ++nondeterministic;
        break;
      }
  }
  o.require(nondeterministic == 0, std::to_string(nondeterministic) + " families not deterministic");

  double worst = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t features = 2 + seed % 4, classes = 2 + seed % 3;
    const auto data = to_training_data(blobs(12, features, classes, 100 + seed, 1.0));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 0.5);

    std::vector<double> lr((features + 1) * classes), grad;
    for (auto& v : lr) v = g(rng);
    LogisticModel::loss_and_gradient(lr, data.x, data.y, classes, 0.01, &grad);
    worst = std::max(worst, grad_rel_error(lr, grad, [&](const std::vector<double>& p) {
                       return LogisticModel::loss_and_gradient(p, data.x, data.y, classes, 0.01, nullptr);
                     }));

    const MlpModel::Shape shape{features, 3 + seed % 5, classes};
    const auto mlp = MlpModel::init_params(shape, rng);
    const auto rows = all_rows(12);
    MlpModel::loss_and_gradient(mlp, shape, data.x, rows, data.y, 0.01, &grad);
    worst = std::max(worst, grad_rel_error(mlp, grad, [&](const std::vector<double>& p) {
                       return MlpModel::loss_and_gradient(p, shape, data.x, rows, data.y, 0.01, nullptr);
                     }));
  }
  o.require(worst <= kGradRelTol, "gradient rel err " + fmt(worst));

  std::size_t increases = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GbdtParams p;
    p.n_rounds = 30;
    p.max_depth = 1 + seed % 4;
    p.learning_rate = 0.1 + 0.1 * static_cast<double>(seed % 5);
    p.subsample = seed % 2 ? 0.7 : 1.0;
    const auto m = GbdtModel::fit(to_training_data(blobs(150, 3, 2 + seed % 4, 300 + seed, 0.8)), p, seed);
    for (std::size_t r = 1; r < m.loss_history.size(); ++r) increases += m.loss_history[r] > m.loss_history[r - 1];
  }
  o.require(increases == 0, std::to_string(increases) + " GBDT rounds increased the loss");
  const double secs = seconds_since(t0);
  o.require(secs < kClassifierBudget, "took " + fmt(secs) + " s");
  o.detail << (o.pass ? "" : "; ") << "worst gradient rel err " << fmt(worst) << ", GBDT loss increases "
           << increases << ", " << fmt(secs, 3) << " s";
  return o;
}

// ---------------------------------------------------------------------------

std::size_t knn_oracle(const Dataset& train_set, const std::vector<double>& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double diff = q[j] - train_set.samples[i].features.values[j];
      s += diff * diff;
    }
    all.emplace_back(std::sqrt(s), i);
  }
  std::sort(all.begin(), all.end());
  std::vector<int> votes(train_set.num_classes(), 0);
  for (std::size_t i = 0; i < k; ++i) ++votes[train_set.samples[all[i].second].label];
  return static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

Outcome knn() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0, 1);
  Dataset d{Kind::Body, {}, {"a", "b", "c", "d"}};
  for (int i = 0; i < 200; ++i) {
    LabeledSample s;
    for (int j = 0; j < 5; ++j) s.features.values.push_back(u(rng));
    s.label = rng() % 4;
    s.label_name = d.class_names[s.label];
    d.samples.push_back(s);
  }
  std::vector<std::vector<double>> queries(200);
  for (auto& q : queries)
    for (int j = 0; j < 5; ++j) q.push_back(u(rng));
  for (std::int64_t k : {3, 5, 9}) {
    const auto m = ml::train(
        spec_of(ml::Family::KNN, {{"k", k}, {"weights", std::string("uniform")}, {"metric", std::string("minkowski")}}),
        d);
    std::size_t agree = 0;
    for (const auto& q : queries) agree += ml::predict(m, q).label == knn_oracle(d, q, static_cast<std::size_t>(k));
    o.require(agree == queries.size(), "k=" + std::to_string(k) + " agreement " + std::to_string(agree) + "/200");
    if (agree == queries.size()) o.detail << (o.detail.tellp() > 0 ? ", " : "") << "k=" << k << " 200/200";
  }
  const double secs = seconds_since(t0);
  o.require(secs < kKnnBudget, "took " + fmt(secs) + " s");
  o.detail << ", " << fmt(secs, 3) << " s";
  return o;
}

// ---------------------------------------------------------------------------

struct BenchRun {
  std::optional<BenchResult> result;
  Dataset test_set;
  double seconds = 0;
};

BenchRun run_table() {
  BenchRun run;
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = synth_mudra_dataset(500, 6.0, 42);
  auto [train, test] = split(d, {0.8, 42, true});
  run.test_set = test;
  run.result = run_bench(default_bench_configs(42), train, test, [](const BenchRow& r) {
    std::fprintf(stderr, "  bench %-20s %-56s %.3f  %.1fs\n", r.model.c_str(), r.params.c_str(), r.accuracy,
                 r.seconds);
  });
  run.seconds = seconds_since(t0);
  return run;
}

Outcome table_one(const BenchRun& run) {
  Outcome o;
  const auto& rows = run.result->rows;
  const auto it = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return r.model == "GBDT+RandomSearchCV"; });
  o.require(it != rows.end(), "no GBDT+RandomSearchCV row");
  if (it == rows.end()) return o;
  o.require(it->accuracy >= kMinGbdtAccuracy, "accuracy " + fmt(it->accuracy));
  o.require(it->rank <= kMaxGbdtRank, "rank " + std::to_string(it->rank));
  o.require(run.test_set.size() == 500, "test split has " + std::to_string(run.test_set.size()) + " samples");
  o.require(run.seconds < kBenchBudget, "took " + fmt(run.seconds) + " s");
  o.detail << (o.pass ? "" : "; ") << "GBDT+RandomSearchCV accuracy " << fmt(it->accuracy) << " rank " << it->rank
           << " of " << rows.size() << ", best " << rows[run.result->best].model << " "
           << fmt(rows[run.result->best].accuracy) << ", " << fmt(run.seconds, 3) << " s";
  return o;
}

Outcome table_two(const BenchRun& run) {
  Outcome o;
  const auto& report = run.result->best_evaluation.report;
  std::uint64_t support = 0;
  double min_f1 = 1.0;
  for (const auto& c : report.classes) {
    support += c.support;
    min_f1 = std::min(min_f1, c.f1);
    o.require(c.f1 >= kMinF1, c.name + " F1 " + fmt(c.f1));
  }
  o.require(report.classes.size() == 5, std::to_string(report.classes.size()) + " classes");
  o.require(support == kTestSupport, "supports sum to " + std::to_string(support));
  o.detail << (o.pass ? "" : "; ") << "best model " << run.result->rows[run.result->best].model << ", min F1 "
           << fmt(min_f1) << ", support " << support;
  return o;
}

// ---------------------------------------------------------------------------

std::set<std::string> deviation_names(const CorrectionResult& r) {
  std::set<std::string> s;
  for (const auto& d : r.deviations) s.insert(d.constraint_name + "/" + std::string(to_string(d.type)));
  return s;
}

Outcome correction() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 1);

  // Widening every tolerance never adds a deviation.
  std::size_t monotone_fail = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Kind kind = trial % 2 ? Kind::Body : Kind::Hand;
    const auto f = testutil::random_frame(kind, rng);
    const auto& topo = topology_for(kind);
    PoseProfile p{"rand", kind, {}, {}, {}};
    for (const auto& j : topo.angle_joints) p.angles.push_back({j.name, 180 * u(rng), 1 + 30 * u(rng)});
    for (const auto& s : topo.slope_pairs) {
      p.slopes.push_back({s.name, -60 + 120 * u(rng), 1 + 20 * u(rng)});
      p.distances.push_back({s.name, 2 * u(rng), 0.01 + 0.5 * u(rng)});
    }
    const auto before = deviation_names(evaluate_pose(f, p));
    for (auto* cs : {&p.angles, &p.slopes, &p.distances})
      for (auto& c : *cs) c.tolerance *= 1.0 + 2 * u(rng);
    const auto after = deviation_names(evaluate_pose(f, p));
    if (!std::includes(before.begin(), before.end(), after.begin(), after.end())) ++monotone_fail;
  }
  o.require(monotone_fail == 0, std::to_string(monotone_fail) + "/100 monotonicity failures");

  // Bending one finger joint past its band flags exactly that joint.
  std::size_t local_fail = 0;
  const auto frames = synth_mudra_frames(20, 6.0, 77);
  const auto& joints = topology_for(Kind::Hand).angle_joints;
  for (int trial = 0; trial < 100; ++trial) {
    const auto& f = frames[rng() % frames.size()].frame;
    const double tol = 2 + 13 * u(rng);
    PoseProfile p{"exact", Kind::Hand, {}, {}, {}};
    for (const auto& j : joints)
      p.angles.push_back({j.name, angle_at(f.landmarks[j.a], f.landmarks[j.vertex], f.landmarks[j.c]), tol});
    const std::size_t finger = rng() % 5, joint = rng() % 3, base = 1 + 4 * finger, pivot = base + joint;
    const double delta = tol + 1 + 40 * u(rng);
    const std::set<std::string> expect{joints[3 * finger + joint].name + "/angle"};
    bool ok = false;
    for (double sign : {1.0, -1.0}) {
      auto g = f;
      const Landmark centre = g.landmarks[pivot];
      for (std::size_t k = pivot + 1; k < base + 4; ++k) detail::rotate_about(g.landmarks[k], centre, sign * delta);
      const auto got = deviation_names(evaluate_pose(g, p));
      if (got.empty()) continue;
      ok = got == expect;
      break;
    }
    local_fail += !ok;
  }
  o.require(local_fail == 0, std::to_string(local_fail) + "/100 locality failures");

  // Profiles built from jittered exemplars, re-checked on those exemplars.
  const auto source = synth_mudra_frames(100, kProfileExemplarNoise, 42);
  const auto d = dataset_from_frames(source, template_names(default_mudra_templates()));
  double worst = 1.0;
  std::ostringstream rates;
  for (std::size_t c = 0; c < d.num_classes(); ++c) {
    const auto prof = profile_from_samples(d, d.class_names[c]);
    std::size_t ok = 0, n = 0;
    for (const auto& f : source)
      if (f.label == c) ++n, ok += evaluate_pose(f.frame, prof).correct;
    const double rate = static_cast<double>(ok) / static_cast<double>(n);
    worst = std::min(worst, rate);
    rates << (c ? " " : "") << d.class_names[c] << "=" << fmt(rate, 3);
  }
  o.require(worst >= kSelfConsistency, "self-consistency " + fmt(worst, 3) + " < " + fmt(kSelfConsistency));
  o.detail << (o.pass ? "" : "; ") << "monotonicity " << (100 - monotone_fail) << "/100, locality "
           << (100 - local_fail) << "/100, self-consistency at " << kProfileExemplarNoise << " deg jitter: " << rates.str();
  return o;
}

// ---------------------------------------------------------------------------

Outcome replay(const ml::TrainedModel& model) {
  Outcome o;
  using nlohmann::json;
  testutil::TempDir dir("asanakit-accept");
  auto store = std::make_shared<LogStore>(dir.path());
  const auto profile_set = synth_mudra_dataset(60, 3.0, 7);
  std::map<std::string, PoseProfile> profiles;
  for (const auto& name : profile_set.class_names) profiles[name] = profile_from_samples(profile_set, name);
  SessionManager manager(std::make_shared<const ml::TrainedModel>(model), profiles, store);
  SessionServer server(manager);
  const auto port = server.start();

  const std::string pose = "Pallava";
  const auto start = wall_clock_ms();
  const auto frames = synth_session(pose, kReplayFrames, kReplayFps, 3.0, 300, start);
  LineClient client("127.0.0.1", port);
  const std::string sid = json::parse(client.request(R"({"t":"open","user":"replay","kind":"hand"})"))["sid"];
  for (std::size_t i = 0; i < frames.size(); ++i)
    client.send_line(wire::encode_frame(wire::frame_message(sid, static_cast<std::int64_t>(i + 1), frames[i])));
  std::size_t in_order = 0, first_stable = 0;
  double max_ms = 0, sum_ms = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto line = client.read_line();
    if (!line) break;
    const auto r = json::parse(*line);
    if (r.value("t", "") != "result") continue;
    in_order += r["seq"] == i + 1;
    if (!first_stable && r["label"] == pose) first_stable = i + 1;
    const double ms = r["lat_ms"];
    max_ms = std::max(max_ms, ms);
    sum_ms += ms;
  }
  client.request(wire::encode_close(sid));
  server.stop();

  const double interval = 1.0 / kReplayFps;
  const double expected = static_cast<double>(frames.back().timestamp_ms - frames.front().timestamp_ms) / 1000.0;
  const auto rep = activity_report("replay", start - 86'400'000, wall_clock_ms() + 86'400'000, *store);
  const double held = rep.poses.count(pose) ? rep.poses.at(pose).seconds : 0.0;
  o.require(in_order == frames.size(), std::to_string(in_order) + "/" + std::to_string(frames.size()) + " in order");
  o.require(first_stable && first_stable <= kStableWithin, "first stable frame " + std::to_string(first_stable));
  o.require(std::abs(held - expected) <= interval, "report " + fmt(held) + " s vs replay " + fmt(expected) + " s");
  o.require(max_ms < kMaxFrameMs, "max frame processing " + fmt(max_ms) + " ms");
  o.detail << (o.pass ? "" : "; ") << in_order << " results in order, stable at frame " << first_stable
           << ", report " << fmt(held) << " s vs replay " << fmt(expected) << " s, processing mean "
           << fmt(sum_ms / static_cast<double>(frames.size()), 3) << " ms max " << fmt(max_ms, 3) << " ms";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    failures += !o.pass;
    std::printf("criterion %d %-22s %s  %s\n", n, name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
    std::fflush(stdout);
  };
  report(1, "geometry-oracle", geometry);
  report(2, "classifier-checks", classifiers);
  report(3, "knn-brute-force", knn);
  BenchRun run;
  try {
    run = run_table();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bench failed: %s\n", e.what());
  }
  auto need_bench = [&](auto fn) {
    return [&, fn] {
      if (!run.result) throw std::runtime_error("benchmark did not run");
      return fn(run);
    };
  };
  report(4, "model-comparison", need_bench(table_one));
  report(5, "per-class-f1", need_bench(table_two));
  report(6, "correction-properties", correction);
  report(7, "stream-replay", need_bench([](const BenchRun& r) { return replay(r.result->best_model); }));
  std::printf("%s: %d of 7 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}

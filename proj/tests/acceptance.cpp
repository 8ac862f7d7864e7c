// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "oracles.hpp"
#include "wzb/classify.hpp"
#include "wzb/endpoint.hpp"
#include "wzb/error.hpp"
#include "wzb/features.hpp"
#include "wzb/io.hpp"
#include "wzb/kde.hpp"
#include "wzb/pipeline.hpp"
#include "wzb/svm.hpp"
#include "wzb/synth.hpp"

using namespace wzb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

bool run(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0 && secs > limit_s) {
    o.pass = false;
    o.detail += fmt("; over the %.0f s budget", limit_s);
  }
  std::printf("criterion %d: %s  %s (%.2f s) %s\n", id, o.pass ? "PASS" : "FAIL", name, secs, o.detail.c_str());
  std::fflush(stdout);
  return o.pass;
}

std::vector<TrainingExample> examples_of(std::span<const SyntheticPass> passes, std::span<const LabeledPeriod> periods) {
  std::vector<Trajectory> trajs;
  for (const auto& p : passes) trajs.push_back(p.trajectory);
  return build_training_set(trajs, periods);
}

// ---------------------------------------------------------------- 1

Outcome table_percentages() {
  const Calibration cal{10.94e9};
  const double want[] = {4.6, 9.1, 13.7, 18.3, 22.9, 27.4, 32.0, 36.6, 41.1};
  for (int i = 0; i < 9; ++i) {
    const double got = std::round(to_percentage(0.5e9 * (i + 1), cal) * 10.0) / 10.0;
    if (got != want[i]) return {false, fmt("%.1f%% where %.1f%% expected", got, want[i])};
  }
  return {true, "9/9 values"};
}

// ---------------------------------------------------------------- 2

std::optional<SvmModel> trained_model;

Outcome svm_accuracy() {
  PipelineConfig cfg;
  cfg.synth.scenario = SynthScenario::Training;
  cfg.synth.per_class = 40;
  cfg.synth.seed = 11;
  const auto passes = synthesize(cfg);
  const auto periods = labeled_periods_from_truth(passes, kLabelSlackSeconds, cfg.synth.seed);
  const auto data = examples_of(passes, periods);

  const auto cs = default_c_grid();
  const auto gs = default_gamma_grid();
  const GridSearchResult grid = grid_search(data, cs, gs, cfg.svm_folds, cfg.svm_seed);
  trained_model = train_svm(data, grid.c, grid.gamma);

  // Fresh periods with the field-test class mix.
  const std::pair<BehaviorLabel, std::size_t> mix[] = {
      {BehaviorLabel::LA, 13}, {BehaviorLabel::LD, 9}, {BehaviorLabel::TRD, 3}, {BehaviorLabel::TLA, 2}};
  std::size_t right = 0, total = 0;
  std::uint64_t seed = 900;
  for (const auto& [label, n] : mix) {
    const BehaviorLabel one[] = {label};
    const auto fresh = generate_fleet(training_scripts(n, seed++, one), NoiseModel{});
    const auto fresh_periods = labeled_periods_from_truth(fresh, kLabelSlackSeconds, seed);
    for (const TrainingExample& e : examples_of(fresh, fresh_periods)) {
      right += trained_model->predict(e.features) == e.label;
      ++total;
    }
  }
  const double holdout = static_cast<double>(right) / static_cast<double>(total);
  Outcome o;
  o.pass = grid.cv_accuracy >= 0.90 && holdout >= 0.85 && total == 27;
  o.detail = fmt("C=%g gamma=%g", grid.c, grid.gamma) + fmt(" cv=%.3f holdout=%.3f", grid.cv_accuracy, holdout) +
             " (" + std::to_string(right) + "/" + std::to_string(total) + ")";
  return o;
}

// ---------------------------------------------------------------- 3

Outcome endpoint_recovery() {
  const std::size_t n = 1200, b0 = 560, b1 = 639;  // 60 s at 20 Hz, burst 28 s .. 32 s
  const std::size_t frame = 10;
  DetectorConfig cfg;
  cfg.mode = ThresholdMode::Determinative;
  cfg.accel_limit = 1.25;

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, NoiseModel{}.accel_noise_sd);
  std::size_t worst_clean = 0, worst_noisy = 0;
  for (Axis axis : {Axis::X, Axis::Y}) {
    for (bool noisy : {false, true}) {
      std::vector<double> s(n, 0.0);
      for (std::size_t i = b0; i <= b1; ++i) s[i] = 2.0;
      if (noisy)
        for (double& v : s) v += noise(rng);
      const auto pois = detect_axis(s, axis, cfg);
      if (pois.size() != 1)
        return {false, std::string(to_string(axis)) + (noisy ? " noisy" : " clean") + ": " +
                           std::to_string(pois.size()) + " POIs"};
      const auto diff = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
      const std::size_t off = std::max(diff(pois[0].interval.start_idx, b0), diff(pois[0].interval.end_idx, b1));
      (noisy ? worst_noisy : worst_clean) = std::max(noisy ? worst_noisy : worst_clean, off);
    }
  }
  if (worst_clean > frame || worst_noisy > 2 * frame)
    return {false, "boundary offsets " + std::to_string(worst_clean) + " / " + std::to_string(worst_noisy) + " samples"};

  std::uniform_int_distribution<std::size_t> len(30, 200), wdist(2, 30), gapd(0, 4), mind(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> base(0.0, 0.4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = len(rng);
    std::vector<double> s(m);
    for (double& v : s) v = base(rng);
    for (int b = 0; b < 3; ++b) {
      const std::size_t at = static_cast<std::size_t>(u(rng) * static_cast<double>(m));
      const std::size_t width = 1 + static_cast<std::size_t>(u(rng) * 30);
      const double amp = 0.5 + 3.0 * u(rng);
      for (std::size_t i = at; i < std::min(m, at + width); ++i) s[i] += amp;
    }
    const std::size_t w = std::min(wdist(rng), m);
    const std::size_t h = 1 + static_cast<std::size_t>(u(rng) * static_cast<double>(w - 1));
    const EnergySeries es = short_time_energy(s, {w, h});
    const double mx = *std::max_element(es.frames.begin(), es.frames.end());
    const double t2 = mx * (0.1 + 0.8 * u(rng));
    const double t1 = t2 * (0.05 + 0.95 * u(rng));
    const std::size_t gap = gapd(rng), min_len = mind(rng);
    const auto got = detect_frame_runs(es.frames, {t1, t2}, min_len, gap);
    const auto want = oracle::brute_force_runs(es.frames, t1, t2, min_len, gap);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i)
      same = got[i].first == want[i].first && got[i].last == want[i].last && got[i].peak == want[i].peak;
    if (!same) return {false, "brute-force mismatch on random signal " + std::to_string(trial)};
  }
  return {true, "offsets clean " + std::to_string(worst_clean) + ", noisy " + std::to_string(worst_noisy) +
                    " samples; 100/100 random signals agree"};
}

// ---------------------------------------------------------------- 4

Outcome smo_oracle() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<std::size_t> size(4, 40);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_obj = 0.0, worst_kkt = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t l = size(rng);
    std::vector<Point> pts(l, Point(5));
    std::vector<int> y(l);
    for (std::size_t i = 0; i < l; ++i) {
      y[i] = u(rng) < 0.5 ? 1 : -1;
      for (double& v : pts[i]) v = u(rng) + (y[i] > 0 ? 0.25 : 0.0);
    }
    if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
    if (std::count(y.begin(), y.end(), -1) == 0) y[0] = -1;
    const double c = std::pow(2.0, -2.0 + 6.0 * u(rng));
    const double gamma = std::pow(2.0, -2.0 + 5.0 * u(rng));
    const auto k = kernel_matrix(pts, gamma);
    const DualSolution sol = solve_dual(k, y, c);
    std::vector<double> q(l * l);
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < l; ++j) q[i * l + j] = y[i] * y[j] * oracle::rbf(pts[i], pts[j], gamma);
    const auto ref = oracle::projected_gradient(q, y, c);
    worst_obj = std::max(worst_obj, oracle::rel_diff(sol.objective, oracle::objective(q, ref)));
    worst_kkt = std::max(worst_kkt, kkt_violation(k, y, sol.alpha, c));
  }
  return {worst_obj <= 1e-4 && worst_kkt <= 1e-3, fmt("max objective rel diff %.2e, max KKT gap %.2e", worst_obj, worst_kkt)};
}

// ---------------------------------------------------------------- 5

BehaviorPoint pt(double x, double y, double w = 1.0) {
  BehaviorPoint p;
  p.x = x;
  p.y = y;
  p.weight = w;
  p.label = BehaviorLabel::LD;
  return p;
}

KdeConfig fixed(double x0, double y0, double x1, double y1, double cs, double r) {
  KdeConfig c;
  c.cell_size = cs;
  c.radius = r;
  c.bounds = Bounds{x0, y0, x1, y1};
  return c;
}

Outcome kde_oracle() {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> np(1, 50), dim(1, 40);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double cs = 0.5 + 2.0 * u(rng);
    const double r = cs * (1.0 + 8.0 * u(rng));
    const int nc = dim(rng), nr = dim(rng);
    const double xll = -50.0 + 100.0 * u(rng), yll = -50.0 + 100.0 * u(rng);
    std::vector<BehaviorPoint> pts;
    std::vector<oracle::Pt> ref;
    for (int i = np(rng); i > 0; --i) {
      const double x = xll - r + (nc * cs + 2 * r) * u(rng);
      const double y = yll - r + (nr * cs + 2 * r) * u(rng);
      const double w = 0.2 + 2.0 * u(rng);
      pts.push_back(pt(x, y, w));
      ref.push_back({x, y, w});
    }
    const DensityRaster got = kde(pts, fixed(xll, yll, xll + nc * cs, yll + nr * cs, cs, r));
    const auto want = oracle::naive_kde(ref, r, xll, yll, cs, static_cast<std::size_t>(nc), static_cast<std::size_t>(nr));
    if (got.values.size() != want.size()) return {false, "grid shape differs on instance " + std::to_string(trial)};
    for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, oracle::rel_diff(got.values[i], want[i]));
  }

  double worst_mass = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const double cs = 1.0 + u(rng), r = cs * (5.0 + 3.0 * u(rng));
    std::vector<BehaviorPoint> pts;
    double total = 0.0;
    for (int i = 0; i < 30; ++i) {
      const double w = 0.5 + u(rng);
      pts.push_back(pt(100.0 * u(rng), 100.0 * u(rng), w));
      total += w;
    }
    const DensityRaster d = kde(pts, fixed(-r - cs, -r - cs, 100 + r + cs, 100 + r + cs, cs, r));
    double s = 0.0;
    for (double v : d.values) s += v;
    worst_mass = std::max(worst_mass, std::abs(s * cs * cs - total) / total);
  }

  std::vector<BehaviorPoint> pts;
  for (int i = 0; i < 40; ++i) pts.push_back(pt(60.0 * u(rng), 60.0 * u(rng)));
  KdeConfig cfg;
  const double peak = to_percentage(kde(pts, cfg), calibrate_reference(pts, cfg)).max_value();

  Outcome o;
  o.pass = worst <= 1e-12 && worst_mass <= 0.02 && peak == 100.0;
  o.detail = fmt("max rel diff %.2e, max mass error %.4f", worst, worst_mass) + fmt(", self peak %.17g%%", peak);
  return o;
}

// ---------------------------------------------------------------- 6

// Arc length along a polyline to the vertex nearest (x, y).
double arc_position(const std::vector<LocalXY>& path, double x, double y) {
  double best = std::numeric_limits<double>::infinity(), at = 0.0, s = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) s += std::hypot(path[i].x - path[i - 1].x, path[i].y - path[i - 1].y);
    const double d = std::hypot(path[i].x - x, path[i].y - y);
    if (d < best) {
      best = d;
      at = s;
    }
  }
  return at;
}

// Centre of the highest cell over the given rasters.
std::optional<std::pair<double, double>> peak_of(const BehaviorDistribution& dist, std::initializer_list<BehaviorLabel> labels) {
  std::optional<std::pair<double, double>> out;
  double best = 0.0;
  for (BehaviorLabel l : labels) {
    const auto it = dist.rasters.find(l);
    if (it == dist.rasters.end()) continue;
    const DensityRaster& r = it->second;
    for (std::size_t row = 0; row < r.nrows; ++row)
      for (std::size_t col = 0; col < r.ncols; ++col)
        if (r.at(row, col) > best) {
          best = r.at(row, col);
          out = std::make_pair(r.center_x(col), r.center_y(row));
        }
  }
  return out;
}

Outcome work_zone() {
  if (!trained_model) return {false, "no model from criterion 2"};
  PipelineConfig cfg;  // work-zone scenario, 10 vehicles
  const auto passes = synthesize(cfg);
  std::vector<Trajectory> trajs;
  for (const auto& p : passes) trajs.push_back(p.trajectory);
  const auto timelines = classify_all(trajs, *trained_model, cfg);
  const KdeOutputs out = compute_kde(trajs, timelines, &*trained_model, cfg);

  PipelineConfig clean = cfg;
  clean.synth.noise = NoiseModel::none();
  clean.synth.vehicles = 1;
  const auto path = local_project(synthesize(clean)[0].trajectory, out.ref);

  const WorkZoneLayout layout;
  const double r = cfg.kde.radius;
  const auto ld = peak_of(out.distribution, {BehaviorLabel::LD});
  const auto tl = peak_of(out.distribution, {BehaviorLabel::TLA, BehaviorLabel::TLC, BehaviorLabel::TLD});
  if (!ld || !tl) return {false, "missing LD or TL* raster"};
  const double s_ld = arc_position(path, ld->first, ld->second);
  const double s_tl = arc_position(path, tl->first, tl->second);
  Outcome o;
  o.pass = s_ld < layout.work_start + r && s_tl >= layout.transition_start - r && s_tl <= layout.work_start + r;
  o.detail = fmt("LD peak at %.1f m, TL* peak at %.1f m", s_ld, s_tl) +
             fmt(" (closure %.0f m, transition from %.0f m)", layout.work_start, layout.transition_start);
  return o;
}

// ---------------------------------------------------------------- 7

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = io::read_file(e.path());
  return out;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "wzb_acceptance_determinism";
  fs::remove_all(dir);
  PipelineConfig train;
  train.synth.scenario = SynthScenario::Training;
  train.synth.per_class = 10;
  write_synth(synthesize(train), dir / "train");
  write_synth(synthesize(PipelineConfig{}), dir / "wz");

  PipelineConfig cfg;
  cfg.input_dir = (dir / "wz" / "trajectories").string();
  cfg.train_dir = (dir / "train" / "trajectories").string();
  cfg.labels = (dir / "train" / "labels.csv").string();
  cfg.output_dir = (dir / "out").string();
  run_pipeline(cfg);
  const auto first = tree(dir / "out");
  run_pipeline(cfg);
  const auto second = tree(dir / "out");
  fs::remove_all(dir);

  std::size_t rasters = 0;
  for (const auto& [name, body] : first) rasters += name.rfind("rasters/", 0) == 0;
  const bool has_manifest = first.count("manifest.json") == 1;
  return {first == second && has_manifest && rasters > 0,
          std::to_string(first.size()) + " files (" + std::to_string(rasters) + " rasters) compared byte for byte"};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  bool ok = true;
  ok &= run(1, "percentage table", 1.0, table_percentages);
  ok &= run(2, "classifier accuracy on synthetic corpus", 120.0, svm_accuracy);
  ok &= run(3, "endpoint detection recovery", 0.0, endpoint_recovery);
  ok &= run(4, "SMO against projected gradient", 0.0, smo_oracle);
  ok &= run(5, "KDE against naive loop", 0.0, kde_oracle);
  ok &= run(6, "work-zone behaviour map", 60.0, work_zone);
  ok &= run(7, "pipeline determinism", 0.0, determinism);
  return ok ? 0 : 1;
}

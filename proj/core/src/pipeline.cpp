#include "wzb/pipeline.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "wzb/error.hpp"
#include "wzb/io.hpp"
#include "wzb/parallel.hpp"

namespace wzb {
namespace fs = std::filesystem;

namespace {

// Re-raises with the stage name and input identifier prepended.
template <typename Fn>
auto in_stage(std::string_view stage, std::string_view input, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + std::string(stage) + "' on '" + std::string(input) + "': " + e.message());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::IoError, "stage '" + std::string(stage) + "' on '" + std::string(input) + "': " + e.what());
  }
}

OutputFile write_output(const fs::path& root, const std::string& rel, std::string_view content, std::size_t rows) {
  io::write_file_atomic(root / rel, content);
  return {rel, rows};
}

}  // namespace

std::vector<fs::path> list_csv(const fs::path& path) {
  std::vector<fs::path> out;
  if (fs::is_regular_file(path)) {
    out.push_back(path);
    return out;
  }
  if (!fs::is_directory(path)) return out;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Trajectory> load_trajectories(const fs::path& path, const PipelineConfig& cfg) {
  const auto files = list_csv(path);
  if (files.empty()) throw Error(ErrorCode::NoTrajectories, "no trajectories in " + path.string());
  std::vector<Trajectory> out(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    out[i] = in_stage("ingest", files[i].filename().string(),
                      [&] { return ingest_csv(files[i], cfg.schema, cfg.accel_hz, cfg.gps_hz); });
  });
  return out;
}

std::vector<SyntheticPass> synthesize(const PipelineConfig& cfg) {
  const SynthConfig& sc = cfg.synth;
  std::vector<ManeuverScript> scripts;
  switch (sc.scenario) {
    case SynthScenario::WorkZone:
      scripts = work_zone_scripts(sc.vehicles, sc.seed);
      break;
    case SynthScenario::Uniform:
      scripts = uniform_scripts(sc.vehicles, sc.seed);
      break;
    case SynthScenario::Training:
      scripts = training_scripts(sc.per_class, sc.seed, kPoiBehaviors);
      break;
    case SynthScenario::Script:
      for (std::size_t i = 0; i < sc.vehicles; ++i) {
        ManeuverScript s;
        s.steps = sc.script;
        s.initial_speed = sc.initial_speed;
        s.seed = sc.seed * 1000003ULL + i;
        s.id = "script" + std::to_string(i);
        scripts.push_back(std::move(s));
      }
      break;
  }
  for (ManeuverScript& s : scripts) s.origin = sc.origin;
  return generate_fleet(scripts, sc.noise, {cfg.accel_hz, cfg.gps_hz});
}

std::vector<OutputFile> write_synth(std::span<const SyntheticPass> passes, const fs::path& out_dir) {
  std::vector<OutputFile> out;
  for (const SyntheticPass& p : passes) {
    out.push_back(write_output(out_dir, "trajectories/" + p.trajectory.id + ".csv", to_csv(p.trajectory),
                               p.trajectory.size()));
    out.push_back(write_output(out_dir, "truth/" + p.truth.trajectory_id + ".csv", timeline_to_csv(p.truth),
                               p.truth.segments.size()));
  }
  const std::vector<LabeledPeriod> periods = labeled_periods_from_truth(passes, kLabelSlackSeconds);
  out.push_back(write_output(out_dir, "labels.csv", labeled_periods_to_csv(periods), periods.size()));
  return out;
}

std::string segment_csv(std::span<const Trajectory> trajectories, const PipelineConfig& cfg) {
  std::vector<std::string> parts(trajectories.size());
  parallel_for(trajectories.size(), [&](std::size_t i) {
    parts[i] = in_stage("segment", trajectories[i].id, [&] {
      return pois_to_csv(trajectories[i].id, segment_trajectory(trajectories[i], cfg.classify.detector), false);
    });
  });
  std::string out = "trajectory_id,axis,start_idx,end_idx,peak_energy\n";
  for (const std::string& p : parts) out += p;
  return out;
}

TrainResult train_from(std::span<const Trajectory> trajectories, std::span<const LabeledPeriod> periods,
                       const PipelineConfig& cfg) {
  return in_stage("train", "labels", [&] {
    const std::vector<TrainingExample> data = build_training_set(trajectories, periods);
    TrainResult result;
    double c = cfg.svm_c;
    double gamma = cfg.svm_gamma;
    if (cfg.svm_grid) {
      const auto cs = default_c_grid();
      const auto gs = default_gamma_grid();
      result.grid = grid_search(data, cs, gs, cfg.svm_folds, cfg.svm_seed);
      c = result.grid->c;
      gamma = result.grid->gamma;
      spdlog::info("grid search: C={} gamma={} cv_accuracy={:.4f}", c, gamma, result.grid->cv_accuracy);
    }
    result.model = train_svm(data, c, gamma);
    result.training_accuracy = accuracy(result.model, data);
    spdlog::info("trained {} pairwise machines on {} periods, training accuracy {:.4f}",
                 result.model.machines.size(), data.size(), result.training_accuracy);
    return result;
  });
}

std::vector<SegmentTimeline> classify_all(std::span<const Trajectory> trajectories, const SvmModel& model,
                                          const PipelineConfig& cfg) {
  std::vector<SegmentTimeline> out(trajectories.size());
  parallel_for(trajectories.size(), [&](std::size_t i) {
    out[i] = in_stage("classify", trajectories[i].id,
                      [&] { return classify_timeline(trajectories[i], model, cfg.classify); });
  });
  return out;
}

std::vector<OutputFile> write_timelines(std::span<const SegmentTimeline> timelines, const fs::path& out_dir) {
  std::vector<OutputFile> out;
  for (const SegmentTimeline& tl : timelines) {
    out.push_back(write_output(out_dir, "timelines/" + tl.trajectory_id + ".csv", timeline_to_csv(tl),
                               tl.segments.size()));
  }
  return out;
}

std::vector<SegmentTimeline> load_timelines(const fs::path& path) {
  std::vector<SegmentTimeline> out;
  for (const fs::path& f : list_csv(path)) {
    for (SegmentTimeline& tl : parse_timelines_csv(io::read_file(f))) out.push_back(std::move(tl));
  }
  return out;
}

GeoPoint reference_point(std::span<const Trajectory> trajectories, const PipelineConfig& cfg) {
  if (cfg.ref) return *cfg.ref;
  if (trajectories.empty() || trajectories.front().empty()) {
    throw Error(ErrorCode::NoTrajectories, "no trajectory to anchor the projection");
  }
  const TrajectorySample& s = trajectories.front().samples.front();
  return {s.lat, s.lon};
}

namespace {

std::vector<BehaviorPoint> points_for(std::span<const Trajectory> trajectories,
                                      std::span<const SegmentTimeline> timelines, GeoPoint ref, Placement placement) {
  std::map<std::string_view, const SegmentTimeline*> by_id;
  for (const SegmentTimeline& tl : timelines) by_id[tl.trajectory_id] = &tl;
  std::vector<BehaviorPoint> out;
  for (const Trajectory& t : trajectories) {
    const auto it = by_id.find(t.id);
    if (it == by_id.end()) throw Error(ErrorCode::InvalidArgument, "no timeline for trajectory '" + t.id + "'");
    auto pts = segment_to_points(t, *it->second, ref, placement);
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

KdeConfig calibration_geometry(const PipelineConfig& cfg) {
  KdeConfig k = cfg.kde;
  k.bounds.reset();
  return k;
}

}  // namespace

KdeOutputs compute_kde(std::span<const Trajectory> trajectories, std::span<const SegmentTimeline> timelines,
                       const SvmModel* model, const PipelineConfig& cfg) {
  KdeOutputs out;
  out.ref = reference_point(trajectories, cfg);
  out.points = in_stage("kde", "points", [&] { return points_for(trajectories, timelines, out.ref, cfg.placement); });

  CalibrationRecord& rec = out.calibration;
  rec.placement = cfg.placement;
  rec.cell_size = cfg.kde.cell_size;
  rec.radius = cfg.kde.radius;
  bool self_calibrate = false;
  if (!cfg.calibration_file.empty()) {
    rec = in_stage("calibrate", cfg.calibration_file,
                   [&] { return parse_calibration(io::read_file(cfg.calibration_file)); });
    if (rec.placement != cfg.placement || rec.cell_size != cfg.kde.cell_size || rec.radius != cfg.kde.radius) {
      throw Error(ErrorCode::ConfigError, "calibration file was measured with placement " +
                                              std::string(to_string(rec.placement)) + ", cell_size " +
                                              io::format_double(rec.cell_size) + ", radius " +
                                              io::format_double(rec.radius) + "; analysis must use the same");
    }
  } else if (!cfg.calibration_dir.empty()) {
    rec.calibration = in_stage("calibrate", cfg.calibration_dir, [&] {
      if (model == nullptr) throw Error(ErrorCode::InvalidArgument, "calibration corpus needs a model to classify it");
      const auto ref_trajs = load_trajectories(cfg.calibration_dir, cfg);
      const auto ref_timelines = classify_all(ref_trajs, *model, cfg);
      const GeoPoint ref = cfg.ref ? *cfg.ref : reference_point(ref_trajs, PipelineConfig{});
      std::vector<BehaviorPoint> pts = points_for(ref_trajs, ref_timelines, ref, cfg.placement);
      std::erase_if(pts, [&](const BehaviorPoint& p) { return p.label != cfg.calibration_label; });
      return calibrate_reference(pts, calibration_geometry(cfg));
    });
  } else {
    self_calibrate = true;
  }

  if (self_calibrate) {
    // Without a reference section the densest behaviour stands in for 100%.
    const BehaviorDistribution probe = build_distribution(out.points, cfg.kde, Calibration{1.0}, cfg.legend);
    double peak = 0.0;
    for (const auto& [label, r] : probe.rasters) peak = std::max(peak, r.max_value());
    if (!(peak > 0.0)) throw Error(ErrorCode::EmptyCalibrationSet, "analysis set has no density to calibrate against");
    rec.calibration.d_ref = peak;
    out.distribution = probe;
    out.distribution.calibration = rec.calibration;
  } else {
    out.distribution = build_distribution(out.points, cfg.kde, rec.calibration, cfg.legend);
  }
  return out;
}

std::vector<OutputFile> write_kde_outputs(const KdeOutputs& kde, const fs::path& out_dir) {
  std::vector<OutputFile> out;
  out.push_back(write_output(out_dir, "points.geojson", points_to_geojson(kde.points, kde.ref), kde.points.size()));
  for (const auto& [label, raster] : kde.distribution.rasters) {
    const std::string name(to_string(label));
    out.push_back(write_output(out_dir, "rasters/density_" + name + ".asc", to_esri_ascii(raster), raster.nrows));
    out.push_back(write_output(out_dir, "rasters/percent_" + name + ".asc",
                               to_esri_ascii(to_percentage(raster, kde.distribution.calibration)), raster.nrows));
  }
  out.push_back(
      write_output(out_dir, "legend.json", legend_to_json(kde.distribution), kde.distribution.legend_ranges.size()));
  out.push_back(write_output(out_dir, "calibration.cfg", format_calibration(kde.calibration), 1));
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "wzb";
  j["tool_version"] = tool_version;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (std::string_view line : io::lines(config_snapshot)) {
    const auto eq = line.find('=');
    if (eq != std::string_view::npos) config[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
  }
  j["config"] = std::move(config);
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  for (const auto& [name, digest] : input_digests) inputs.push_back({{"name", name}, {"sha256", digest}});
  j["inputs"] = std::move(inputs);
  nlohmann::ordered_json stages_json = nlohmann::ordered_json::array();
  for (const StageRecord& s : stages) {
    nlohmann::ordered_json outs = nlohmann::ordered_json::array();
    for (const OutputFile& f : s.outputs) outs.push_back({{"path", f.path}, {"rows", f.rows}});
    stages_json.push_back({{"stage", s.name}, {"outputs", std::move(outs)}});
  }
  j["stages"] = std::move(stages_json);
  return j.dump(1) + '\n';
}

RunManifest run_pipeline(const PipelineConfig& cfg) {
  throw_if_invalid(check_config(cfg));
  if (cfg.input_dir.empty()) throw Error(ErrorCode::ConfigError, "paths.input_dir is not set");
  if (cfg.output_dir.empty()) throw Error(ErrorCode::ConfigError, "paths.output_dir is not set");
  if (cfg.model.empty() && (cfg.train_dir.empty() || cfg.labels.empty())) {
    throw Error(ErrorCode::ConfigError, "set paths.model, or paths.train_dir and paths.labels");
  }

  const fs::path final_dir = cfg.output_dir;
  fs::path staging = final_dir;
  staging += ".staging";
  std::error_code ec;
  fs::remove_all(staging, ec);

  RunManifest manifest;
  manifest.config_snapshot = print_config(cfg);
  try {
    spdlog::info("ingesting {}", cfg.input_dir);
    const std::vector<Trajectory> trajectories = load_trajectories(cfg.input_dir, cfg);
    for (const fs::path& f : list_csv(cfg.input_dir)) {
      manifest.input_digests.emplace_back("input/" + f.filename().string(), sha256_hex(io::read_file(f)));
    }

    SvmModel model;
    if (!cfg.model.empty()) {
      model = in_stage("load-model", cfg.model, [&] { return load_model(cfg.model); });
      manifest.input_digests.emplace_back("model", sha256_hex(io::read_file(cfg.model)));
    } else {
      const auto train_trajs = load_trajectories(cfg.train_dir, cfg);
      const auto periods =
          in_stage("train", cfg.labels, [&] { return parse_labeled_periods(io::read_file(cfg.labels)); });
      for (const fs::path& f : list_csv(cfg.train_dir)) {
        manifest.input_digests.emplace_back("train/" + f.filename().string(), sha256_hex(io::read_file(f)));
      }
      manifest.input_digests.emplace_back("labels", sha256_hex(io::read_file(cfg.labels)));
      model = train_from(train_trajs, periods, cfg).model;
      manifest.stages.push_back(
          {"train", {write_output(staging, "model.svm", serialize_model(model), model.machines.size())}});
    }
    if (!cfg.calibration_file.empty()) {
      manifest.input_digests.emplace_back("calibration", sha256_hex(io::read_file(cfg.calibration_file)));
    }

    spdlog::info("classifying {} trajectories", trajectories.size());
    const std::vector<SegmentTimeline> timelines = classify_all(trajectories, model, cfg);
    manifest.stages.push_back({"classify", write_timelines(timelines, staging)});

    spdlog::info("kernel density");
    const KdeOutputs kde = compute_kde(trajectories, timelines, &model, cfg);
    manifest.stages.push_back({"kde", write_kde_outputs(kde, staging)});

    io::write_file_atomic(staging / "manifest.json", manifest.to_json());
    fs::remove_all(final_dir);
    fs::rename(staging, final_dir);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
  return manifest;
}

}  // namespace wzb

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wzb/classify.hpp"
#include "wzb/config.hpp"
#include "wzb/kde.hpp"
#include "wzb/svm.hpp"
#include "wzb/synth.hpp"

namespace wzb {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// A single .csv file, or every .csv directly inside a directory, sorted by name.
std::vector<std::filesystem::path> list_csv(const std::filesystem::path& path);

/// Throws NoTrajectories when nothing is found.
std::vector<Trajectory> load_trajectories(const std::filesystem::path& path, const PipelineConfig& cfg);

std::vector<SyntheticPass> synthesize(const PipelineConfig& cfg);

struct OutputFile {
  std::string path;  // relative to the stage's output directory
  std::size_t rows = 0;
};

/// trajectories/<id>.csv, truth/<id>.csv and labels.csv (POI periods from the truth).
std::vector<OutputFile> write_synth(std::span<const SyntheticPass> passes, const std::filesystem::path& out_dir);

/// POIs of both axes for every trajectory, as one CSV.
std::string segment_csv(std::span<const Trajectory> trajectories, const PipelineConfig& cfg);

struct TrainResult {
  SvmModel model;
  std::optional<GridSearchResult> grid;
  double training_accuracy = 0.0;
};

TrainResult train_from(std::span<const Trajectory> trajectories, std::span<const LabeledPeriod> periods,
                       const PipelineConfig& cfg);

std::vector<SegmentTimeline> classify_all(std::span<const Trajectory> trajectories, const SvmModel& model,
                                          const PipelineConfig& cfg);

/// timelines/<id>.csv per trajectory.
std::vector<OutputFile> write_timelines(std::span<const SegmentTimeline> timelines,
                                        const std::filesystem::path& out_dir);

/// Timelines read back from a directory of timeline CSVs.
std::vector<SegmentTimeline> load_timelines(const std::filesystem::path& path);

GeoPoint reference_point(std::span<const Trajectory> trajectories, const PipelineConfig& cfg);

struct KdeOutputs {
  BehaviorDistribution distribution;
  std::vector<BehaviorPoint> points;
  CalibrationRecord calibration;
  GeoPoint ref;
};

/// Points, per-label rasters and calibration. The calibration comes from
/// kde.calibration_file, else from kde.calibration_dir (classified with `model`), else
/// from the densest label of the analysis set itself.
KdeOutputs compute_kde(std::span<const Trajectory> trajectories, std::span<const SegmentTimeline> timelines,
                       const SvmModel* model, const PipelineConfig& cfg);

/// points.geojson, rasters/density_<L>.asc, rasters/percent_<L>.asc, legend.json, calibration.cfg.
std::vector<OutputFile> write_kde_outputs(const KdeOutputs& kde, const std::filesystem::path& out_dir);

struct StageRecord {
  std::string name;
  std::vector<OutputFile> outputs;
};

struct RunManifest {
  std::string config_snapshot;
  std::vector<std::pair<std::string, std::string>> input_digests;  // (name, sha256)
  std::string tool_version{kToolVersion};
  std::vector<StageRecord> stages;

  std::string to_json() const;
};

std::string sha256_hex(std::string_view data);

/// ingest -> (train) -> classify -> kde -> manifest. Outputs are assembled in a staging
/// directory and moved into paths.output_dir only on success.
RunManifest run_pipeline(const PipelineConfig& cfg);

}  // namespace wzb

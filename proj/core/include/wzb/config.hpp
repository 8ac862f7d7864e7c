#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wzb/classify.hpp"
#include "wzb/kde.hpp"
#include "wzb/synth.hpp"
#include "wzb/trajectory.hpp"

namespace wzb {

enum class SynthScenario { WorkZone, Uniform, Training, Script };
std::string_view to_string(SynthScenario s);

struct SynthConfig {
  SynthScenario scenario = SynthScenario::WorkZone;
  std::size_t vehicles = 10;
  std::size_t per_class = 40;
  std::uint64_t seed = 7;
  std::vector<ManeuverStep> script;  // Script scenario only
  double initial_speed = 20.0;
  GeoPoint origin{31.0, 121.0};
  NoiseModel noise;
};

/// Every tunable of every stage. Defaults are those of the owning modules.
struct PipelineConfig {
  // ingest
  CsvSchema schema;
  double accel_hz = 20.0;
  double gps_hz = 1.0;
  // segment + combine
  ClassifyConfig classify;
  // svm
  double svm_c = kDefaultC;
  double svm_gamma = kDefaultGamma;
  bool svm_grid = false;
  std::size_t svm_folds = 5;
  std::uint64_t svm_seed = 1;
  // kde
  KdeConfig kde;
  Placement placement = Placement::PerSecond;
  LegendMode legend = LegendMode::PerBehavior;
  std::optional<GeoPoint> ref;  // nullopt = first sample of the first trajectory
  std::string calibration_file;
  std::string calibration_dir;
  BehaviorLabel calibration_label = BehaviorLabel::LC;
  // synth
  SynthConfig synth;
  // paths
  std::string input_dir;
  std::string output_dir;
  std::string model;
  std::string train_dir;
  std::string labels;
};

struct Diagnostic {
  std::string key;
  std::string value;
  std::string rule;
};

std::string format_diagnostic(const Diagnostic& d);

/// Sets one key; returns a diagnostic instead of throwing when the key or value is bad.
std::optional<Diagnostic> set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value);

/// Cross-field rules (radius >= cell_size, hop <= frame_len, ...).
std::vector<Diagnostic> check_config(const PipelineConfig& cfg);

/// Applies a key=value text ('#' comments, blank lines ignored) on top of `cfg`.
std::vector<Diagnostic> apply_config_text(PipelineConfig& cfg, std::string_view text);

/// Empty iff every line parses and every rule holds. Throws UnreadableFile.
std::vector<Diagnostic> validate_config(const std::filesystem::path& path);

/// Defaults overlaid with the file; throws ConfigError carrying all diagnostics.
PipelineConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError if `diags` is non-empty.
void throw_if_invalid(const std::vector<Diagnostic>& diags);

/// Every key in canonical order, one key=value per line.
std::string print_config(const PipelineConfig& cfg);

std::vector<std::string> config_keys();

/// "LC:30,LD:5:2.0,LC:25" -> steps (label:duration[:accel[:radius]]).
std::vector<ManeuverStep> parse_script(std::string_view text);
std::string format_script(const std::vector<ManeuverStep>& steps);

/// Calibration persisted with the geometry and placement it was measured under.
struct CalibrationRecord {
  Calibration calibration;
  Placement placement = Placement::PerSecond;
  double cell_size = 2.0;
  double radius = 15.0;
};

std::string format_calibration(const CalibrationRecord& rec);
CalibrationRecord parse_calibration(std::string_view text);

}  // namespace wzb

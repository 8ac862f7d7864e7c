#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "wzb/behavior.hpp"

namespace wzb {

enum class Axis { X, Y, Combined };
std::string_view to_string(Axis axis);

enum class WindowKind { Rectangular };

/// Framing of the short-time energy: frame length and hop, both in samples.
struct EnergyFrameConfig {
  std::size_t frame_len = 20;
  std::size_t hop = 10;
  WindowKind window = WindowKind::Rectangular;
};

struct EnergySeries {
  std::vector<double> frames;  // E_n >= 0, m^2/s^4 summed over the frame
  EnergyFrameConfig config;
  Axis axis = Axis::X;
  std::size_t signal_length = 0;
};

enum class ThresholdMode { Adaptive, Determinative };

struct Thresholds {
  double t1 = 0.0;  // refines start/end points
  double t2 = 0.0;  // flags a period of interest
  ThresholdMode mode = ThresholdMode::Adaptive;
};

/// A period of interest on the accelerometer clock.
struct Poi {
  TimeInterval interval;
  Axis axis = Axis::X;
  double peak_energy = 0.0;
};

/// A POI in frame coordinates, before conversion to samples.
struct FrameRun {
  std::size_t first = 0;
  std::size_t last = 0;
  double peak = 0.0;
  friend bool operator==(const FrameRun&, const FrameRun&) = default;
};

/// E_n = sum of signal[i]^2 for i in [n*hop, n*hop + frame_len). Throws SignalTooShort.
EnergySeries short_time_energy(std::span<const double> signal, const EnergyFrameConfig& config,
                               Axis axis = Axis::X);

/// t2 = t2_frac * max E, t1 = t1_frac * max E. Throws AllZeroEnergy on a silent axis.
Thresholds adaptive_thresholds(const EnergySeries& energy, double t2_frac, double t1_frac);

/// Adaptive variant that takes fractions of max |a| and converts them to frame energy
/// (W * (frac * max|a|)^2).
Thresholds adaptive_thresholds_on_accel(std::span<const double> signal, const EnergyFrameConfig& config,
                                        double t2_frac, double t1_frac);

/// t2 = frame_len * accel_limit^2, the energy of a frame held at the limit; t1 = t1_frac * t2.
Thresholds determinative_threshold(double accel_limit, const EnergyFrameConfig& config, double t1_frac);

/// Bi-threshold detection in frame space: maximal runs of E >= t1 that contain a frame
/// with E >= t2; runs separated by fewer than merge_gap_frames quiet frames are merged,
/// then runs shorter than min_poi_frames are dropped.
std::vector<FrameRun> detect_frame_runs(std::span<const double> energy, const Thresholds& th,
                                        std::size_t min_poi_frames, std::size_t merge_gap_frames);

/// Frame run -> sample interval. A frame stands for its centre sample; a run that
/// touches the first/last frame extends to the signal edge.
TimeInterval frames_to_samples(const FrameRun& run, const EnergyFrameConfig& config, std::size_t frame_count,
                               std::size_t signal_length);

std::vector<Poi> detect_pois(const EnergySeries& energy, const Thresholds& th, std::size_t min_poi_frames = 2,
                             std::size_t merge_gap_frames = 2);

/// Centred moving average; the window shrinks at the edges.
std::vector<double> moving_average(std::span<const double> signal, std::size_t window);

/// Everything needed to run detection on one axis.
struct DetectorConfig {
  EnergyFrameConfig frame;
  ThresholdMode mode = ThresholdMode::Determinative;
  double t2_frac = 0.30;      // adaptive: fraction of the maximum
  double t1_frac = 0.25;      // t1 as a fraction of t2, both modes
  double accel_limit = 1.25;  // determinative limit, m/s^2
  std::size_t min_poi_frames = 2;
  std::size_t merge_gap_frames = 2;
  bool smooth = false;
  std::size_t smooth_window = 5;
  bool adaptive_on_accel = false;
};

Thresholds thresholds_for(std::span<const double> signal, const EnergySeries& energy, const DetectorConfig& cfg);

/// Full single-axis detection. A silent axis (AllZeroEnergy) yields no POIs.
std::vector<Poi> detect_axis(std::span<const double> signal, Axis axis, const DetectorConfig& cfg);

}  // namespace wzb

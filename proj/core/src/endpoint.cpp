#include "wzb/endpoint.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wzb/error.hpp"

namespace wzb {

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Combined: return "combined";
  }
  return "?";
}

EnergySeries short_time_energy(std::span<const double> signal, const EnergyFrameConfig& config, Axis axis) {
  const std::size_t w = config.frame_len;
  const std::size_t h = config.hop;
  if (h < 1 || h > w) throw Error(ErrorCode::InvalidArgument, "frame config requires 1 <= hop <= frame_len");
  if (signal.size() < w) {
    throw Error(ErrorCode::SignalTooShort, "signal of " + std::to_string(signal.size()) +
                                               " samples is shorter than one frame of " + std::to_string(w));
  }
  EnergySeries out;
  out.config = config;
  out.axis = axis;
  out.signal_length = signal.size();
  const std::size_t count = (signal.size() - w) / h + 1;
  out.frames.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    double e = 0.0;
    for (std::size_t i = n * h; i < n * h + w; ++i) e += signal[i] * signal[i];
    out.frames.push_back(e);
  }
  return out;
}

Thresholds adaptive_thresholds(const EnergySeries& energy, double t2_frac, double t1_frac) {
  if (!(t1_frac > 0.0 && t1_frac <= t2_frac && t2_frac <= 1.0)) {
    throw Error(ErrorCode::InvalidThresholds, "require 0 < t1_frac <= t2_frac <= 1");
  }
  const double peak = energy.frames.empty() ? 0.0 : *std::max_element(energy.frames.begin(), energy.frames.end());
  if (!(peak > 0.0)) throw Error(ErrorCode::AllZeroEnergy, "axis has no energy");
  return {t1_frac * peak, t2_frac * peak, ThresholdMode::Adaptive};
}

Thresholds adaptive_thresholds_on_accel(std::span<const double> signal, const EnergyFrameConfig& config,
                                        double t2_frac, double t1_frac) {
  if (!(t1_frac > 0.0 && t1_frac <= t2_frac && t2_frac <= 1.0)) {
    throw Error(ErrorCode::InvalidThresholds, "require 0 < t1_frac <= t2_frac <= 1");
  }
  double peak = 0.0;
  for (double a : signal) peak = std::max(peak, std::abs(a));
  if (!(peak > 0.0)) throw Error(ErrorCode::AllZeroEnergy, "axis has no energy");
  const auto w = static_cast<double>(config.frame_len);
  return {w * (t1_frac * peak) * (t1_frac * peak), w * (t2_frac * peak) * (t2_frac * peak),
          ThresholdMode::Adaptive};
}

Thresholds determinative_threshold(double accel_limit, const EnergyFrameConfig& config, double t1_frac) {
  if (!(accel_limit > 0.0)) throw Error(ErrorCode::InvalidThresholds, "accel_limit must be positive");
  if (!(t1_frac > 0.0 && t1_frac <= 1.0)) throw Error(ErrorCode::InvalidThresholds, "require 0 < t1_frac <= 1");
  const double t2 = static_cast<double>(config.frame_len) * accel_limit * accel_limit;
  return {t1_frac * t2, t2, ThresholdMode::Determinative};
}

std::vector<FrameRun> detect_frame_runs(std::span<const double> energy, const Thresholds& th,
                                        std::size_t min_poi_frames, std::size_t merge_gap_frames) {
  if (!(th.t1 > 0.0 && th.t1 <= th.t2)) throw Error(ErrorCode::InvalidThresholds, "require 0 < t1 <= t2");

  // Runs of E >= t1 that hold at least one frame at or above t2.
  std::vector<FrameRun> runs;
  std::size_t n = 0;
  while (n < energy.size()) {
    if (energy[n] < th.t1) {
      ++n;
      continue;
    }
    FrameRun run{n, n, energy[n]};
    while (run.last + 1 < energy.size() && energy[run.last + 1] >= th.t1) {
      ++run.last;
      run.peak = std::max(run.peak, energy[run.last]);
    }
    if (run.peak >= th.t2) runs.push_back(run);
    n = run.last + 1;
  }

  std::vector<FrameRun> merged;
  for (const FrameRun& r : runs) {
    if (!merged.empty() && r.first - merged.back().last - 1 < merge_gap_frames) {
      merged.back().last = r.last;
      merged.back().peak = std::max(merged.back().peak, r.peak);
    } else {
      merged.push_back(r);
    }
  }
  std::erase_if(merged, [&](const FrameRun& r) { return r.last - r.first + 1 < min_poi_frames; });
  return merged;
}

TimeInterval frames_to_samples(const FrameRun& run, const EnergyFrameConfig& config, std::size_t frame_count,
                               std::size_t signal_length) {
  const std::size_t w = config.frame_len;
  const std::size_t h = config.hop;
  TimeInterval iv;
  iv.start_idx = run.first == 0 ? 0 : run.first * h + (w - 1) / 2;
  iv.end_idx = run.last + 1 == frame_count ? signal_length - 1 : run.last * h + w / 2;
  return iv;
}

std::vector<Poi> detect_pois(const EnergySeries& energy, const Thresholds& th, std::size_t min_poi_frames,
                             std::size_t merge_gap_frames) {
  std::vector<Poi> out;
  for (const FrameRun& run : detect_frame_runs(energy.frames, th, min_poi_frames, merge_gap_frames)) {
    out.push_back({frames_to_samples(run, energy.config, energy.frames.size(), energy.signal_length), energy.axis,
                   run.peak});
  }
  return out;
}

std::vector<double> moving_average(std::span<const double> signal, std::size_t window) {
  if (window <= 1) return {signal.begin(), signal.end()};
  const std::size_t half = window / 2;
  std::vector<double> out(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(signal.size() - 1, i + (window - 1 - half));
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += signal[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

Thresholds thresholds_for(std::span<const double> signal, const EnergySeries& energy, const DetectorConfig& cfg) {
  if (cfg.mode == ThresholdMode::Determinative) {
    return determinative_threshold(cfg.accel_limit, cfg.frame, cfg.t1_frac);
  }
  if (cfg.adaptive_on_accel) {
    // t1_frac is an energy ratio; on the acceleration scale it becomes its square root.
    return adaptive_thresholds_on_accel(signal, cfg.frame, cfg.t2_frac, std::sqrt(cfg.t1_frac) * cfg.t2_frac);
  }
  return adaptive_thresholds(energy, cfg.t2_frac, cfg.t1_frac * cfg.t2_frac);
}

std::vector<Poi> detect_axis(std::span<const double> signal, Axis axis, const DetectorConfig& cfg) {
  std::vector<double> smoothed;
  if (cfg.smooth) {
    smoothed = moving_average(signal, cfg.smooth_window);
    signal = smoothed;
  }
  const EnergySeries energy = short_time_energy(signal, cfg.frame, axis);
  Thresholds th;
  try {
    th = thresholds_for(signal, energy, cfg);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AllZeroEnergy) return {};
    throw;
  }
  return detect_pois(energy, th, cfg.min_poi_frames, cfg.merge_gap_frames);
}

}  // namespace wzb

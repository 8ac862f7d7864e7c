#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "wzb/behavior.hpp"
#include "wzb/trajectory.hpp"

namespace wzb {

inline constexpr std::size_t kFeatureCount = 5;
using FeatureArray = std::array<double, kFeatureCount>;

/// Per-POI features, in the fixed order k, x_mean, x_std, y_mean, y_std.
struct FeatureVector {
  double k = 0.0;       // speed gradient, m/s^2
  double x_mean = 0.0;  // m/s^2
  double x_std = 0.0;
  double y_mean = 0.0;
  double y_std = 0.0;

  FeatureArray as_array() const { return {k, x_mean, x_std, y_mean, y_std}; }
  static FeatureVector from_array(const FeatureArray& a) { return {a[0], a[1], a[2], a[3], a[4]}; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Least-squares speed slope plus mean and population standard deviation of ax and ay.
/// Throws IntervalTooShort below two samples.
FeatureVector extract_features(const Trajectory& traj, TimeInterval interval);

/// Min-max mapping learned from training data; unseen values map linearly without clamping.
struct FeatureScaler {
  FeatureArray feat_min{};
  FeatureArray feat_max{};

  /// Throws DegenerateFeatureRange if any feature is constant across `data`.
  static FeatureScaler fit(std::span<const FeatureVector> data);

  FeatureArray normalize(const FeatureVector& f) const;
  FeatureVector denormalize(const FeatureArray& v) const;
};

FeatureArray normalize(const FeatureVector& f, const FeatureArray& feat_min, const FeatureArray& feat_max);

}  // namespace wzb

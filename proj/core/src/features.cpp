#include "wzb/features.hpp"

#include <cmath>
#include <string>

#include "wzb/error.hpp"

namespace wzb {
namespace {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};

MeanStd mean_std(const Trajectory& traj, TimeInterval iv, double TrajectorySample::*field) {
  const auto n = static_cast<double>(iv.size());
  double sum = 0.0;
  for (std::size_t i = iv.start_idx; i <= iv.end_idx; ++i) sum += traj.samples[i].*field;
  const double mean = sum / n;
  double ss = 0.0;
  for (std::size_t i = iv.start_idx; i <= iv.end_idx; ++i) {
    const double d = traj.samples[i].*field - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / n)};
}

}  // namespace

FeatureVector extract_features(const Trajectory& traj, TimeInterval iv) {
  if (iv.end_idx < iv.start_idx || iv.end_idx >= traj.size()) {
    throw Error(ErrorCode::InvalidArgument, "interval outside trajectory '" + traj.id + "'");
  }
  if (iv.size() < 2) throw Error(ErrorCode::IntervalTooShort, "feature extraction needs at least 2 samples");

  const auto n = static_cast<double>(iv.size());
  double t_mean = 0.0;
  double v_mean = 0.0;
  for (std::size_t i = iv.start_idx; i <= iv.end_idx; ++i) {
    t_mean += traj.samples[i].t;
    v_mean += traj.samples[i].speed;
  }
  t_mean /= n;
  v_mean /= n;
  double stt = 0.0;
  double stv = 0.0;
  for (std::size_t i = iv.start_idx; i <= iv.end_idx; ++i) {
    const double dt = traj.samples[i].t - t_mean;
    stt += dt * dt;
    stv += dt * (traj.samples[i].speed - v_mean);
  }

  FeatureVector f;
  f.k = stv / stt;
  const MeanStd x = mean_std(traj, iv, &TrajectorySample::ax);
  const MeanStd y = mean_std(traj, iv, &TrajectorySample::ay);
  f.x_mean = x.mean;
  f.x_std = x.stddev;
  f.y_mean = y.mean;
  f.y_std = y.stddev;
  return f;
}

FeatureScaler FeatureScaler::fit(std::span<const FeatureVector> data) {
  if (data.empty()) throw Error(ErrorCode::DegenerateFeatureRange, "no training data to fit normalization");
  FeatureScaler s;
  s.feat_min = data.front().as_array();
  s.feat_max = s.feat_min;
  for (const FeatureVector& f : data) {
    const FeatureArray a = f.as_array();
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      s.feat_min[i] = std::min(s.feat_min[i], a[i]);
      s.feat_max[i] = std::max(s.feat_max[i], a[i]);
    }
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!(s.feat_min[i] < s.feat_max[i])) {
      throw Error(ErrorCode::DegenerateFeatureRange, "feature " + std::to_string(i) + " is constant in training data");
    }
  }
  return s;
}

FeatureArray normalize(const FeatureVector& f, const FeatureArray& feat_min, const FeatureArray& feat_max) {
  const FeatureArray a = f.as_array();
  FeatureArray out{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!(feat_min[i] < feat_max[i])) {
      throw Error(ErrorCode::DegenerateFeatureRange, "feature " + std::to_string(i) + " has an empty range");
    }
    out[i] = (a[i] - feat_min[i]) / (feat_max[i] - feat_min[i]);
  }
  return out;
}

FeatureArray FeatureScaler::normalize(const FeatureVector& f) const { return wzb::normalize(f, feat_min, feat_max); }

FeatureVector FeatureScaler::denormalize(const FeatureArray& v) const {
  FeatureArray a{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) a[i] = feat_min[i] + v[i] * (feat_max[i] - feat_min[i]);
  return FeatureVector::from_array(a);
}

}  // namespace wzb

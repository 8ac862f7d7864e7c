#pragma once

#include <vector>

#include "wzb/classify.hpp"
#include "wzb/svm.hpp"
#include "wzb/synth.hpp"

namespace fixtures {

// A model trained once per test binary on a small synthetic corpus of all eight POI classes.
inline const wzb::SvmModel& small_model() {
  static const wzb::SvmModel model = [] {
    const auto passes = wzb::generate_fleet(wzb::training_scripts(20, 101, wzb::kPoiBehaviors), wzb::NoiseModel{});
    std::vector<wzb::Trajectory> trajs;
    for (const auto& p : passes) trajs.push_back(p.trajectory);
    const auto periods = wzb::labeled_periods_from_truth(passes, wzb::kLabelSlackSeconds);
    return wzb::train_svm(wzb::build_training_set(trajs, periods));
  }();
  return model;
}

inline wzb::ManeuverScript script(std::vector<wzb::ManeuverStep> steps, double v0, std::uint64_t seed = 1) {
  wzb::ManeuverScript s;
  s.steps = std::move(steps);
  s.initial_speed = v0;
  s.seed = seed;
  return s;
}

// Fraction of samples whose label in `got` equals the label in `truth`.
inline double label_agreement(const wzb::SegmentTimeline& got, const wzb::SegmentTimeline& truth, std::size_t n) {
  std::vector<wzb::BehaviorLabel> a(n), b(n);
  for (const auto& s : got.segments)
    for (std::size_t i = s.interval.start_idx; i <= s.interval.end_idx; ++i) a[i] = s.label;
  for (const auto& s : truth.segments)
    for (std::size_t i = s.interval.start_idx; i <= s.interval.end_idx; ++i) b[i] = s.label;
  std::size_t same = 0;
  for (std::size_t i = 0; i < n; ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(n);
}

}  // namespace fixtures

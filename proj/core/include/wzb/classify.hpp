#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wzb/behavior.hpp"
#include "wzb/endpoint.hpp"
#include "wzb/features.hpp"
#include "wzb/svm.hpp"
#include "wzb/trajectory.hpp"

namespace wzb {

enum class SegmentSource { Rule, Svm };
std::string_view to_string(SegmentSource s);

struct Segment {
  TimeInterval interval;
  BehaviorLabel label = BehaviorLabel::LC;
  SegmentSource source = SegmentSource::Rule;
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Labeled intervals that partition [0, N-1] of one trajectory.
struct SegmentTimeline {
  std::string trajectory_id;
  std::vector<Segment> segments;
};

/// Throws InvalidArgument unless segments are sorted, contiguous and cover [0, n-1].
void check_partition(const SegmentTimeline& timeline, std::size_t sample_count);

struct CombineConfig {
  double v_stop = 0.5;     // m/s
  double stop_hold = 2.0;  // s
};

struct CombinedSchemes {
  std::vector<TimeInterval> pois;
  std::vector<Segment> rule_segments;
};

/// Union of the x and y POI schemes; every other sample is Stopping when speed stays
/// below v_stop for at least stop_hold seconds, LC otherwise.
CombinedSchemes combine_schemes(const Trajectory& traj, std::span<const Poi> pois_x, std::span<const Poi> pois_y,
                                const CombineConfig& cfg = {});

/// Merges overlapping or adjacent intervals; the result is sorted.
std::vector<TimeInterval> interval_union(std::vector<TimeInterval> intervals);

struct ClassifyConfig {
  DetectorConfig detector;
  CombineConfig combine;
};

/// Endpoint detection on ax and ay, scheme combination, then one SVM label per POI.
SegmentTimeline classify_timeline(const Trajectory& traj, const SvmModel& model, const ClassifyConfig& cfg = {});

/// Both axes' POIs, in axis order; what the `segment` stage reports.
std::vector<Poi> segment_trajectory(const Trajectory& traj, const DetectorConfig& cfg);

std::string pois_to_csv(std::string_view trajectory_id, std::span<const Poi> pois, bool header = true);

/// trajectory_id,start_idx,end_idx,label,source
std::string timeline_to_csv(const SegmentTimeline& timeline, bool header = true);
std::vector<SegmentTimeline> parse_timelines_csv(std::string_view text);

/// A recorded training period: trajectory_id,start_idx,end_idx,label.
struct LabeledPeriod {
  std::string trajectory_id;
  TimeInterval interval;
  BehaviorLabel label = BehaviorLabel::LA;
};

std::vector<LabeledPeriod> parse_labeled_periods(std::string_view text);
std::string labeled_periods_to_csv(std::span<const LabeledPeriod> periods);

/// Features for each labeled period; trajectories are looked up by id.
std::vector<TrainingExample> build_training_set(std::span<const Trajectory> trajectories,
                                                std::span<const LabeledPeriod> periods);

}  // namespace wzb

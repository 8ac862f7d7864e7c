#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wzb/behavior.hpp"
#include "wzb/classify.hpp"
#include "wzb/trajectory.hpp"

namespace wzb {

/// One scripted manoeuvre. `accel` is the longitudinal magnitude (sign comes from the
/// label); `radius` is the turn radius for turning labels.
struct ManeuverStep {
  BehaviorLabel label = BehaviorLabel::LC;
  double duration = 1.0;  // s
  double accel = 0.0;     // m/s^2, >= 0
  double radius = 0.0;    // m, > 0 for turning labels
};

struct ManeuverScript {
  std::vector<ManeuverStep> steps;
  double initial_speed = 0.0;    // m/s
  double initial_heading = 0.0;  // rad, counter-clockwise from east
  GeoPoint origin{31.0, 121.0};
  std::uint64_t seed = 0;
  std::string id = "synth";
};

struct NoiseModel {
  double accel_noise_sd = 0.05;  // m/s^2
  double gps_pos_sd = 2.0;       // m
  double gps_speed_sd = 0.2;     // m/s

  static NoiseModel none() { return {0.0, 0.0, 0.0}; }
};

struct SampleRates {
  double accel_hz = 20.0;
  double gps_hz = 1.0;
};

/// Noise-free state at the end of the script (after the last integration step).
struct KinematicState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
};

struct SyntheticPass {
  Trajectory trajectory;
  SegmentTimeline truth;
  KinematicState final_state;
};

/// Transition ramps between setpoints last this long; truth boundaries sit at their midpoints.
inline constexpr double kRampSeconds = 0.5;

/// Throws InvalidScript on invalid steps and SpeedUnderflow when the script brakes below zero.
SyntheticPass generate(const ManeuverScript& script, const NoiseModel& noise, SampleRates rates = {});

/// Independent generation per script, deterministic given each script's seed.
std::vector<SyntheticPass> generate_fleet(std::span<const ManeuverScript> scripts, const NoiseModel& noise,
                                          SampleRates rates = {});

/// Lane-closure layout used by the scenario pack: distances along the road (m) from
/// the origin to the start of each zone.
struct WorkZoneLayout {
  double decel_start = 150.0;     // warning area begins slowing
  double transition_start = 250.0;  // upstream transition (merge left)
  double work_start = 320.0;        // closure begins
  double termination_start = 420.0;  // merge back right
};

/// Scripted passes through a lane closure: approach, decelerate, merge left, pass the work
/// area, merge right, accelerate away. Vehicles differ by small seeded perturbations.
std::vector<ManeuverScript> work_zone_scripts(std::size_t vehicles, std::uint64_t seed,
                                              const WorkZoneLayout& layout = {});

/// Straight constant-speed passes along one road; used as the 100% reference for calibration.
std::vector<ManeuverScript> uniform_scripts(std::size_t vehicles, std::uint64_t seed, double duration = 60.0);

/// Training corpus: for each POI label, `per_class` passes of LC / label / LC with
/// randomized magnitudes. Returns the scripts; the labeled periods come from the truth timelines.
std::vector<ManeuverScript> training_scripts(std::size_t per_class, std::uint64_t seed,
                                             std::span<const BehaviorLabel> labels);

/// Marking slack of the labels written next to synthetic corpora.
inline constexpr double kLabelSlackSeconds = 1.0;

/// Labeled periods (POI segments only) from ground-truth timelines. With a positive slack each
/// end is pushed outwards by a uniform draw from [0, slack] seconds, the way a person tapping
/// start and stop would mark them; draws are deterministic in `seed`.
std::vector<LabeledPeriod> labeled_periods_from_truth(std::span<const SyntheticPass> passes, double slack_s = 0.0,
                                                      std::uint64_t seed = 0);

}  // namespace wzb

#include "wzb/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "wzb/error.hpp"
#include "wzb/parallel.hpp"

namespace wzb {
namespace {

constexpr double kMaxScriptAccel = 5.0;
constexpr double kUnderflowTolerance = 1e-9;

bool is_accelerating(BehaviorLabel l) {
  return l == BehaviorLabel::LA || l == BehaviorLabel::TLA || l == BehaviorLabel::TRA;
}
bool is_decelerating(BehaviorLabel l) {
  return l == BehaviorLabel::LD || l == BehaviorLabel::TLD || l == BehaviorLabel::TRD;
}

double longitudinal_setpoint(const ManeuverStep& s) {
  if (is_accelerating(s.label)) return s.accel;
  if (is_decelerating(s.label)) return -s.accel;
  return 0.0;
}

double curvature_setpoint(const ManeuverStep& s) {
  if (is_left_turn(s.label)) return 1.0 / s.radius;
  if (is_right_turn(s.label)) return -1.0 / s.radius;
  return 0.0;
}

void check_script(const ManeuverScript& script) {
  if (script.steps.empty()) throw Error(ErrorCode::InvalidScript, "script '" + script.id + "' has no steps");
  if (!(script.initial_speed >= 0.0)) throw Error(ErrorCode::InvalidScript, "initial speed must be >= 0");
  for (const ManeuverStep& s : script.steps) {
    if (!(s.duration > 0.0)) throw Error(ErrorCode::InvalidScript, "step durations must be positive");
    if (!(s.accel >= 0.0 && s.accel <= kMaxScriptAccel)) {
      throw Error(ErrorCode::InvalidScript, "step acceleration must lie in [0, 5] m/s^2");
    }
    if ((is_left_turn(s.label) || is_right_turn(s.label)) && !(s.radius > 0.0)) {
      throw Error(ErrorCode::InvalidScript, "turning steps need a positive radius");
    }
  }
}

// Piecewise-constant setpoints joined by linear ramps centred on the step boundaries.
class SetpointSchedule {
 public:
  explicit SetpointSchedule(const ManeuverScript& script) {
    double t = 0.0;
    for (const ManeuverStep& s : script.steps) {
      starts_.push_back(t);
      t += s.duration;
      accel_.push_back(longitudinal_setpoint(s));
      curv_.push_back(curvature_setpoint(s));
      durations_.push_back(s.duration);
    }
  }

  double accel(double t) const { return value(accel_, t); }
  double curvature(double t) const { return value(curv_, t); }

  /// Times where the setpoints stop being linear (ramp ends), in (lo, hi).
  std::vector<double> knots(double lo, double hi) const {
    std::vector<double> out;
    for (std::size_t s = 1; s < starts_.size(); ++s) {
      const double half = half_ramp(s - 1, s);
      for (double k : {starts_[s] - half, starts_[s] + half}) {
        if (k > lo && k < hi) out.push_back(k);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  double value(const std::vector<double>& v, double t) const {
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    const std::size_t s = it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
    // Ramp into step s (across its start boundary).
    if (s > 0) {
      const double half = half_ramp(s - 1, s);
      if (t < starts_[s] + half) return ramp(v[s - 1], v[s], starts_[s], half, t);
    }
    if (s + 1 < starts_.size()) {
      const double half = half_ramp(s, s + 1);
      if (t >= starts_[s + 1] - half) return ramp(v[s], v[s + 1], starts_[s + 1], half, t);
    }
    return v[s];
  }

  double half_ramp(std::size_t a, std::size_t b) const {
    return std::min({kRampSeconds / 2.0, durations_[a] / 2.0, durations_[b] / 2.0});
  }

  static double ramp(double from, double to, double boundary, double half, double t) {
    const double w = (t - (boundary - half)) / (2.0 * half);
    return from + std::clamp(w, 0.0, 1.0) * (to - from);
  }

  std::vector<double> starts_;
  std::vector<double> accel_;
  std::vector<double> curv_;
  std::vector<double> durations_;
};

// Gauss-Legendre nodes and weights on [0, 1].
constexpr std::array<double, 6> kGaussNodes = {0.033765242898423987, 0.16939530676686776, 0.38069040695840156,
                                                0.61930959304159849, 0.83060469323313224, 0.96623475710157603};
constexpr std::array<double, 6> kGaussWeights = {0.085662246189585178, 0.18038078652406930, 0.23395696728634552,
                                                  0.23395696728634552, 0.18038078652406930, 0.085662246189585178};

struct State {
  double x, y, heading, v;
};

// Advances over [0, h] with acceleration and curvature linear in time: speed and heading
// in closed form, position by Gauss-Legendre quadrature of v(s) (cos, sin)(heading(s)).
State advance(const State& st, double h, double a0, double a1, double k0, double k1) {
  const double ar = (a1 - a0) / h;
  const double kr = (k1 - k0) / h;
  const auto speed = [&](double s) { return st.v + a0 * s + 0.5 * ar * s * s; };
  const auto heading = [&](double s) {
    return st.heading + k0 * st.v * s + (k0 * a0 + kr * st.v) * s * s / 2.0 +
           (k0 * ar / 2.0 + kr * a0) * s * s * s / 3.0 + kr * ar * s * s * s * s / 8.0;
  };
  State out = st;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
    const double s = kGaussNodes[i] * h;
    const double w = kGaussWeights[i] * h * speed(s);
    out.x += w * std::cos(heading(s));
    out.y += w * std::sin(heading(s));
  }
  out.v = speed(h);
  out.heading = heading(h);
  return out;
}

struct TruthSample {
  double t, x, y, speed;
};

TruthSample interpolate_truth(const std::vector<TruthSample>& truth, double t) {
  if (t <= truth.front().t) return truth.front();
  if (t >= truth.back().t) return truth.back();
  const auto hi = std::upper_bound(truth.begin(), truth.end(), t,
                                   [](double v, const TruthSample& s) { return v < s.t; });
  const TruthSample& b = *hi;
  const TruthSample& a = *(hi - 1);
  const double w = (t - a.t) / (b.t - a.t);
  if (w == 0.0) return a;
  return {t, a.x + w * (b.x - a.x), a.y + w * (b.y - a.y), a.speed + w * (b.speed - a.speed)};
}

}  // namespace

SyntheticPass generate(const ManeuverScript& script, const NoiseModel& noise, SampleRates rates) {
  check_script(script);
  if (!(rates.accel_hz > 0.0) || !(rates.gps_hz > 0.0) || rates.gps_hz > rates.accel_hz) {
    throw Error(ErrorCode::InvalidScript, "require accel_hz >= gps_hz > 0");
  }
  if (noise.accel_noise_sd < 0.0 || noise.gps_pos_sd < 0.0 || noise.gps_speed_sd < 0.0) {
    throw Error(ErrorCode::InvalidScript, "noise levels must be >= 0");
  }
  const double dt = 1.0 / rates.accel_hz;
  double total = 0.0;
  for (const ManeuverStep& s : script.steps) total += s.duration;
  const auto n = static_cast<std::size_t>(std::llround(total * rates.accel_hz));
  if (n < 2) throw Error(ErrorCode::InvalidScript, "script is shorter than two samples");

  const SetpointSchedule schedule(script);
  std::mt19937_64 rng(script.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  SyntheticPass pass;
  Trajectory& traj = pass.trajectory;
  traj.id = script.id;
  traj.accel_hz = rates.accel_hz;
  traj.gps_hz = rates.gps_hz;
  traj.samples.resize(n);

  std::vector<TruthSample> truth(n);
  State st{0.0, 0.0, script.initial_heading, script.initial_speed};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    truth[k] = {t, st.x, st.y, st.v};
    TrajectorySample& s = traj.samples[k];
    s.t = t;
    s.ax = schedule.accel(t);
    s.ay = st.v * st.v * schedule.curvature(t);
    s.az = 0.0;

    // Split the step at ramp ends so each piece is linear in time.
    const double t_next = static_cast<double>(k + 1) * dt;
    std::vector<double> cuts = schedule.knots(t, t_next);
    cuts.push_back(t_next);
    double lo = t;
    for (double hi : cuts) {
      st = advance(st, hi - lo, schedule.accel(lo), schedule.accel(hi), schedule.curvature(lo), schedule.curvature(hi));
      lo = hi;
    }
    if (st.v < 0.0) {
      if (st.v < -kUnderflowTolerance) {
        throw Error(ErrorCode::SpeedUnderflow, "script '" + script.id + "' brakes below zero speed at t=" +
                                                   std::to_string(t_next) + " s");
      }
      st.v = 0.0;
    }
  }
  pass.final_state = {st.x, st.y, st.heading, st.v};

  // Sensor noise: accelerometer first, then GPS, in a fixed draw order.
  if (noise.accel_noise_sd > 0.0) {
    for (TrajectorySample& s : traj.samples) {
      s.ax += noise.accel_noise_sd * unit(rng);
      s.ay += noise.accel_noise_sd * unit(rng);
      s.az += noise.accel_noise_sd * unit(rng);
    }
  }

  std::vector<GpsFix> fixes;
  const double t_last = truth.back().t;
  const auto add_fix = [&](double t) {
    TruthSample ts = interpolate_truth(truth, t);
    if (noise.gps_pos_sd > 0.0) {
      ts.x += noise.gps_pos_sd * unit(rng);
      ts.y += noise.gps_pos_sd * unit(rng);
    }
    if (noise.gps_speed_sd > 0.0) ts.speed = std::max(0.0, ts.speed + noise.gps_speed_sd * unit(rng));
    const GeoPoint g = unproject_point({ts.x, ts.y}, script.origin);
    fixes.push_back({t, g.lat, g.lon, ts.speed});
  };
  for (std::size_t j = 0;; ++j) {
    const double t = static_cast<double>(j) / rates.gps_hz;
    if (t >= t_last) break;
    add_fix(t);
  }
  add_fix(t_last);

  std::vector<AccelReading> accel;
  accel.reserve(n);
  for (const TrajectorySample& s : traj.samples) accel.push_back({s.t, s.ax, s.ay, s.az});
  traj = align_streams(script.id, accel, fixes, rates.accel_hz, rates.gps_hz);
  validate(traj);

  // Ground truth: sample k belongs to the step whose [start, end) holds t_k.
  pass.truth.trajectory_id = script.id;
  double step_start = 0.0;
  std::size_t k = 0;
  for (std::size_t si = 0; si < script.steps.size(); ++si) {
    const ManeuverStep& step = script.steps[si];
    const double step_end = step_start + step.duration;
    const std::size_t first = k;
    const bool last_step = si + 1 == script.steps.size();
    while (k < n && (last_step || static_cast<double>(k) * dt < step_end - 1e-9)) ++k;
    if (k > first) {
      pass.truth.segments.push_back({{first, k - 1},
                                     step.label,
                                     is_rule_label(step.label) ? SegmentSource::Rule : SegmentSource::Svm});
    }
    step_start = step_end;
  }
  return pass;
}

std::vector<SyntheticPass> generate_fleet(std::span<const ManeuverScript> scripts, const NoiseModel& noise,
                                          SampleRates rates) {
  if (scripts.empty()) throw Error(ErrorCode::InvalidScript, "fleet needs at least one script");
  std::vector<SyntheticPass> out(scripts.size());
  parallel_for(scripts.size(), [&](std::size_t i) { out[i] = generate(scripts[i], noise, rates); });
  return out;
}

namespace {

std::string vehicle_id(const char* prefix, std::size_t i) {
  std::string num = std::to_string(i);
  if (num.size() < 3) num.insert(0, 3 - num.size(), '0');
  return std::string(prefix) + num;
}

}  // namespace

std::vector<ManeuverScript> work_zone_scripts(std::size_t vehicles, std::uint64_t seed, const WorkZoneLayout& layout) {
  std::vector<ManeuverScript> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (std::size_t i = 0; i < vehicles; ++i) {
    ManeuverScript s;
    s.id = vehicle_id("wz", i);
    s.seed = seed * 1000003ULL + i;
    const double v0 = 22.0 + 0.5 * jitter(rng);
    const double v1 = 14.0 + 0.5 * jitter(rng);
    const double decel = 1.6 + 0.1 * jitter(rng);
    const double accel = 1.6 + 0.1 * jitter(rng);
    const double lateral = 2.0 + 0.1 * jitter(rng);
    const double merge_time = 2.5;
    s.initial_speed = v0;

    // Distance bookkeeping along the path; curvature only bends the dog-leg slightly.
    double pos = 0.0;
    const auto cruise_to = [&](double target, double speed) {
      const double d = std::max(target - pos, speed * 1.0);
      s.steps.push_back({BehaviorLabel::LC, d / speed, 0.0, 0.0});
      pos += d;
    };
    cruise_to(layout.decel_start, v0);
    const double t_decel = (v0 - v1) / decel;
    s.steps.push_back({BehaviorLabel::LD, t_decel, decel, 0.0});
    pos += (v0 + v1) / 2.0 * t_decel;
    cruise_to(layout.transition_start, v1);
    s.steps.push_back({BehaviorLabel::TLC, merge_time, 0.0, v1 * v1 / lateral});
    pos += v1 * merge_time;
    cruise_to(layout.termination_start, v1);
    s.steps.push_back({BehaviorLabel::TRC, merge_time, 0.0, v1 * v1 / lateral});
    pos += v1 * merge_time;
    cruise_to(pos + 3.0 * v1, v1);
    const double v2 = v0;
    s.steps.push_back({BehaviorLabel::LA, (v2 - v1) / accel, accel, 0.0});
    s.steps.push_back({BehaviorLabel::LC, 6.0, 0.0, 0.0});
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ManeuverScript> uniform_scripts(std::size_t vehicles, std::uint64_t seed, double duration) {
  std::vector<ManeuverScript> out;
  for (std::size_t i = 0; i < vehicles; ++i) {
    ManeuverScript s;
    s.id = vehicle_id("ref", i);
    s.seed = seed * 1000003ULL + i;
    s.initial_speed = 14.0;
    s.steps.push_back({BehaviorLabel::LC, duration, 0.0, 0.0});
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ManeuverScript> training_scripts(std::size_t per_class, std::uint64_t seed,
                                             std::span<const BehaviorLabel> labels) {
  std::vector<ManeuverScript> out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  std::size_t counter = 0;
  for (BehaviorLabel label : labels) {
    if (!is_poi_label(label)) throw Error(ErrorCode::InvalidScript, "training scripts need POI labels");
    for (std::size_t i = 0; i < per_class; ++i) {
      ManeuverScript s;
      s.id = std::string("train_") + std::string(to_string(label)) + "_" + vehicle_id("", i);
      s.seed = seed * 1000003ULL + counter++;
      s.initial_heading = uniform(0.0, 2.0 * std::numbers::pi);
      const double duration = uniform(3.0, 6.0);
      const double accel = (is_accelerating(label) || is_decelerating(label)) ? uniform(1.4, 3.0) : 0.0;
      double v0 = uniform(8.0, 20.0);
      if (is_decelerating(label)) v0 = std::max(v0, accel * duration + 3.0);
      double radius = 0.0;
      if (is_left_turn(label) || is_right_turn(label)) {
        // Lateral acceleration is drawn at the mid-manoeuvre speed, so it does not track the sign of ax.
        const double lateral = uniform(1.2, 5.0);
        const double signed_accel = is_decelerating(label) ? -accel : accel;
        const double v_mid = v0 + signed_accel * duration / 2.0;
        radius = v_mid * v_mid / lateral;
      }
      s.initial_speed = v0;
      s.steps.push_back({BehaviorLabel::LC, uniform(4.0, 6.0), 0.0, 0.0});
      s.steps.push_back({label, duration, accel, radius});
      s.steps.push_back({BehaviorLabel::LC, uniform(4.0, 6.0), 0.0, 0.0});
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<LabeledPeriod> labeled_periods_from_truth(std::span<const SyntheticPass> passes, double slack_s,
                                                      std::uint64_t seed) {
  if (!(slack_s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "label slack must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<LabeledPeriod> out;
  for (const SyntheticPass& p : passes) {
    const std::size_t last = p.trajectory.size() - 1;
    for (const Segment& seg : p.truth.segments) {
      if (!is_poi_label(seg.label)) continue;
      TimeInterval iv = seg.interval;
      if (slack_s > 0.0) {
        const auto draw = [&] { return static_cast<std::size_t>(std::floor(u01(rng) * slack_s * p.trajectory.accel_hz)); };
        const std::size_t before = draw();
        const std::size_t after = draw();
        iv.start_idx -= std::min(before, iv.start_idx);
        iv.end_idx = std::min(last, iv.end_idx + after);
      }
      out.push_back({p.truth.trajectory_id, iv, seg.label});
    }
  }
  return out;
}

}  // namespace wzb

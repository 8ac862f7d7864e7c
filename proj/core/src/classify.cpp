#include "wzb/classify.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "wzb/error.hpp"
#include "wzb/io.hpp"

namespace wzb {

std::string_view to_string(SegmentSource s) { return s == SegmentSource::Rule ? "rule" : "svm"; }

void check_partition(const SegmentTimeline& timeline, std::size_t sample_count) {
  std::size_t next = 0;
  for (const Segment& s : timeline.segments) {
    if (s.interval.start_idx != next || s.interval.end_idx < s.interval.start_idx) {
      throw Error(ErrorCode::InvalidArgument,
                  "timeline '" + timeline.trajectory_id + "' is not contiguous at sample " + std::to_string(next));
    }
    if ((s.source == SegmentSource::Rule) != is_rule_label(s.label)) {
      throw Error(ErrorCode::InvalidArgument, "segment source does not match its label");
    }
    next = s.interval.end_idx + 1;
  }
  if (next != sample_count) {
    throw Error(ErrorCode::InvalidArgument, "timeline '" + timeline.trajectory_id + "' covers " +
                                                std::to_string(next) + " of " + std::to_string(sample_count) +
                                                " samples");
  }
}

std::vector<TimeInterval> interval_union(std::vector<TimeInterval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const TimeInterval& a, const TimeInterval& b) { return a.start_idx < b.start_idx; });
  std::vector<TimeInterval> out;
  for (const TimeInterval& iv : intervals) {
    if (!out.empty() && iv.start_idx <= out.back().end_idx + 1) {
      out.back().end_idx = std::max(out.back().end_idx, iv.end_idx);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

CombinedSchemes combine_schemes(const Trajectory& traj, std::span<const Poi> pois_x, std::span<const Poi> pois_y,
                                const CombineConfig& cfg) {
  const std::size_t n = traj.size();
  std::vector<TimeInterval> all;
  for (const Poi& p : pois_x) all.push_back(p.interval);
  for (const Poi& p : pois_y) all.push_back(p.interval);
  for (const TimeInterval& iv : all) {
    if (iv.end_idx >= n || iv.end_idx < iv.start_idx) {
      throw Error(ErrorCode::InvalidArgument, "POI outside trajectory '" + traj.id + "'");
    }
  }

  CombinedSchemes out;
  out.pois = interval_union(std::move(all));

  // Stopping: runs of sub-threshold speed lasting at least stop_hold.
  std::vector<bool> stopped(n, false);
  for (std::size_t i = 0; i < n;) {
    if (!(traj.samples[i].speed < cfg.v_stop)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && traj.samples[j + 1].speed < cfg.v_stop) ++j;
    if (static_cast<double>(j - i + 1) / traj.accel_hz >= cfg.stop_hold) {
      std::fill(stopped.begin() + static_cast<std::ptrdiff_t>(i), stopped.begin() + static_cast<std::ptrdiff_t>(j + 1),
                true);
    }
    i = j + 1;
  }

  const auto emit_gap = [&](std::size_t from, std::size_t to) {  // inclusive
    std::size_t i = from;
    while (i <= to) {
      std::size_t j = i;
      while (j + 1 <= to && stopped[j + 1] == stopped[i]) ++j;
      out.rule_segments.push_back(
          {{i, j}, stopped[i] ? BehaviorLabel::Stopping : BehaviorLabel::LC, SegmentSource::Rule});
      i = j + 1;
    }
  };
  std::size_t cursor = 0;
  for (const TimeInterval& poi : out.pois) {
    if (poi.start_idx > cursor) emit_gap(cursor, poi.start_idx - 1);
    cursor = poi.end_idx + 1;
  }
  if (cursor < n) emit_gap(cursor, n - 1);
  return out;
}

std::vector<Poi> segment_trajectory(const Trajectory& traj, const DetectorConfig& cfg) {
  std::vector<double> ax(traj.size());
  std::vector<double> ay(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    ax[i] = traj.samples[i].ax;
    ay[i] = traj.samples[i].ay;
  }
  std::vector<Poi> out = detect_axis(ax, Axis::X, cfg);
  const std::vector<Poi> py = detect_axis(ay, Axis::Y, cfg);
  out.insert(out.end(), py.begin(), py.end());
  return out;
}

SegmentTimeline classify_timeline(const Trajectory& traj, const SvmModel& model, const ClassifyConfig& cfg) {
  std::vector<Poi> px;
  std::vector<Poi> py;
  for (const Poi& p : segment_trajectory(traj, cfg.detector)) {
    if (p.interval.size() < 2) continue;  // too short to describe; left to the speed rule
    (p.axis == Axis::X ? px : py).push_back(p);
  }
  const CombinedSchemes schemes = combine_schemes(traj, px, py, cfg.combine);

  SegmentTimeline tl;
  tl.trajectory_id = traj.id;
  tl.segments = schemes.rule_segments;
  for (const TimeInterval& iv : schemes.pois) {
    tl.segments.push_back({iv, model.predict(extract_features(traj, iv)), SegmentSource::Svm});
  }
  std::sort(tl.segments.begin(), tl.segments.end(),
            [](const Segment& a, const Segment& b) { return a.interval.start_idx < b.interval.start_idx; });
  check_partition(tl, traj.size());
  return tl;
}

std::string pois_to_csv(std::string_view trajectory_id, std::span<const Poi> pois, bool header) {
  std::string out = header ? "trajectory_id,axis,start_idx,end_idx,peak_energy\n" : "";
  for (const Poi& p : pois) {
    out += std::string(trajectory_id) + ',' + std::string(to_string(p.axis)) + ',' +
           std::to_string(p.interval.start_idx) + ',' + std::to_string(p.interval.end_idx) + ',' +
           io::format_double(p.peak_energy) + '\n';
  }
  return out;
}

std::string timeline_to_csv(const SegmentTimeline& timeline, bool header) {
  std::string out = header ? "trajectory_id,start_idx,end_idx,label,source\n" : "";
  for (const Segment& s : timeline.segments) {
    out += timeline.trajectory_id + ',' + std::to_string(s.interval.start_idx) + ',' +
           std::to_string(s.interval.end_idx) + ',' + std::string(to_string(s.label)) + ',' +
           std::string(to_string(s.source)) + '\n';
  }
  return out;
}

namespace {

std::size_t parse_index(std::string_view f, std::string_view what) {
  const long long v = io::parse_int(f, what);
  if (v < 0) throw Error(ErrorCode::MalformedField, std::string(what) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

BehaviorLabel parse_label_field(std::string_view f) {
  const auto label = parse_behavior(f);
  if (!label) throw Error(ErrorCode::MalformedField, "unknown behavior label '" + std::string(f) + "'");
  return *label;
}

}  // namespace

std::vector<SegmentTimeline> parse_timelines_csv(std::string_view text) {
  std::vector<SegmentTimeline> out;
  std::map<std::string, std::size_t> index;
  const auto rows = io::lines(text);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (io::trim(rows[r]).empty()) continue;
    const auto f = io::split_csv_line(rows[r]);
    if (f.size() < 5) throw Error(ErrorCode::MalformedField, "timeline row " + std::to_string(r) + " is short");
    const std::string id(f[0]);
    auto [it, inserted] = index.emplace(id, out.size());
    if (inserted) out.push_back({id, {}});
    Segment s;
    s.interval = {parse_index(f[1], "start_idx"), parse_index(f[2], "end_idx")};
    s.label = parse_label_field(f[3]);
    if (f[4] == "rule") {
      s.source = SegmentSource::Rule;
    } else if (f[4] == "svm") {
      s.source = SegmentSource::Svm;
    } else {
      throw Error(ErrorCode::MalformedField, "unknown segment source '" + std::string(f[4]) + "'");
    }
    out[it->second].segments.push_back(s);
  }
  return out;
}

std::vector<LabeledPeriod> parse_labeled_periods(std::string_view text) {
  std::vector<LabeledPeriod> out;
  const auto rows = io::lines(text);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (io::trim(rows[r]).empty()) continue;
    const auto f = io::split_csv_line(rows[r]);
    if (f.size() < 4) throw Error(ErrorCode::MalformedField, "label row " + std::to_string(r) + " is short");
    LabeledPeriod p;
    p.trajectory_id = std::string(f[0]);
    p.interval = {parse_index(f[1], "start_idx"), parse_index(f[2], "end_idx")};
    p.label = parse_label_field(f[3]);
    if (!is_poi_label(p.label)) {
      throw Error(ErrorCode::MalformedField, "labeled periods must carry one of the eight POI labels");
    }
    if (p.interval.end_idx < p.interval.start_idx) {
      throw Error(ErrorCode::MalformedField, "label row " + std::to_string(r) + " has end before start");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string labeled_periods_to_csv(std::span<const LabeledPeriod> periods) {
  std::string out = "trajectory_id,start_idx,end_idx,label\n";
  for (const LabeledPeriod& p : periods) {
    out += p.trajectory_id + ',' + std::to_string(p.interval.start_idx) + ',' + std::to_string(p.interval.end_idx) +
           ',' + std::string(to_string(p.label)) + '\n';
  }
  return out;
}

std::vector<TrainingExample> build_training_set(std::span<const Trajectory> trajectories,
                                                std::span<const LabeledPeriod> periods) {
  std::map<std::string_view, const Trajectory*> by_id;
  for (const Trajectory& t : trajectories) by_id[t.id] = &t;
  std::vector<TrainingExample> out;
  out.reserve(periods.size());
  for (const LabeledPeriod& p : periods) {
    const auto it = by_id.find(p.trajectory_id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::InvalidArgument, "labeled period refers to unknown trajectory '" + p.trajectory_id + "'");
    }
    out.push_back({extract_features(*it->second, p.interval), p.label});
  }
  return out;
}

}  // namespace wzb

#include "wzb/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <json.hpp>

#include "wzb/error.hpp"
#include "wzb/io.hpp"

namespace wzb {
namespace {

// Interpolated local position at time t (seconds since trajectory start).
LocalXY position_at(const Trajectory& traj, std::span<const LocalXY> xy, double t) {
  const auto& s = traj.samples;
  if (t <= s.front().t) return xy.front();
  if (t >= s.back().t) return xy.back();
  const auto hi = std::upper_bound(s.begin(), s.end(), t, [](double v, const TrajectorySample& x) { return v < x.t; });
  const auto j = static_cast<std::size_t>(hi - s.begin());
  const std::size_t i = j - 1;
  const double w = (t - s[i].t) / (s[j].t - s[i].t);
  return {xy[i].x + w * (xy[j].x - xy[i].x), xy[i].y + w * (xy[j].y - xy[i].y)};
}

ValueRange range_of(const DensityRaster& r) { return {r.min_value(), r.max_value()}; }

}  // namespace

std::string_view to_string(Placement p) { return p == Placement::Midpoint ? "midpoint" : "per_second"; }

std::optional<Placement> parse_placement(std::string_view text) {
  if (text == "midpoint") return Placement::Midpoint;
  if (text == "per_second") return Placement::PerSecond;
  return std::nullopt;
}

std::string_view to_string(LegendMode m) { return m == LegendMode::PerBehavior ? "per" : "unified"; }

std::optional<LegendMode> parse_legend_mode(std::string_view text) {
  if (text == "per" || text == "per_behavior") return LegendMode::PerBehavior;
  if (text == "unified") return LegendMode::Unified;
  return std::nullopt;
}

std::vector<BehaviorPoint> segment_to_points(const Trajectory& traj, const SegmentTimeline& timeline, GeoPoint ref,
                                             Placement placement) {
  if (timeline.trajectory_id != traj.id) {
    throw Error(ErrorCode::InvalidArgument,
                "timeline '" + timeline.trajectory_id + "' does not belong to trajectory '" + traj.id + "'");
  }
  check_partition(timeline, traj.size());
  const std::vector<LocalXY> xy = local_project(traj, ref);
  std::vector<BehaviorPoint> out;
  for (const Segment& seg : timeline.segments) {
    const double t0 = traj.samples[seg.interval.start_idx].t;
    const double duration = static_cast<double>(seg.interval.size()) / traj.accel_hz;
    const auto emit = [&](double t) {
      const LocalXY p = position_at(traj, xy, std::min(t, traj.samples[seg.interval.end_idx].t));
      out.push_back({p.x, p.y, seg.label, 1.0, traj.id});
    };
    if (placement == Placement::Midpoint) {
      emit(t0 + duration / 2.0);
    } else {
      const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration)));
      const double spacing = duration / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) emit(t0 + (static_cast<double>(i) + 0.5) * spacing);
    }
  }
  return out;
}

void validate(const KdeConfig& config) {
  if (!(config.cell_size > 0.0)) throw Error(ErrorCode::InvalidKdeConfig, "cell_size must be positive");
  if (!(config.radius >= config.cell_size)) throw Error(ErrorCode::InvalidKdeConfig, "radius must be >= cell_size");
  if (config.bounds) {
    const Bounds& b = *config.bounds;
    if (!(b.xmax > b.xmin) || !(b.ymax > b.ymin)) throw Error(ErrorCode::InvalidKdeConfig, "bounds are degenerate");
  }
}

Bounds auto_bounds(std::span<const BehaviorPoint> points, const KdeConfig& config) {
  const double cs = config.cell_size;
  if (points.empty()) return {0.0, 0.0, cs, cs};
  Bounds b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const BehaviorPoint& p : points) {
    b.xmin = std::min(b.xmin, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.xmax = std::max(b.xmax, p.x);
    b.ymax = std::max(b.ymax, p.y);
  }
  const double r = config.radius;
  return {std::floor((b.xmin - r) / cs) * cs, std::floor((b.ymin - r) / cs) * cs, std::ceil((b.xmax + r) / cs) * cs,
          std::ceil((b.ymax + r) / cs) * cs};
}

double DensityRaster::max_value() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

double DensityRaster::min_value() const {
  return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
}

DensityRaster make_grid(const Bounds& bounds, double cell_size) {
  DensityRaster r;
  r.xll = bounds.xmin;
  r.yll = bounds.ymin;
  r.cell_size = cell_size;
  // Tolerance keeps an exact multiple of the cell size from gaining a spurious column.
  r.ncols = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((bounds.xmax - bounds.xmin) / cell_size - 1e-9)));
  r.nrows = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((bounds.ymax - bounds.ymin) / cell_size - 1e-9)));
  r.values.assign(r.ncols * r.nrows, 0.0);
  return r;
}

double quadratic_kernel(double distance, double radius) {
  if (!(distance < radius)) return 0.0;
  const double u = distance / radius;
  const double s = 1.0 - u * u;
  return 3.0 / (std::numbers::pi * radius * radius) * s * s;
}

DensityRaster kde_on_grid(std::span<const BehaviorPoint> points, double radius, DensityRaster grid) {
  std::fill(grid.values.begin(), grid.values.end(), 0.0);
  const double cs = grid.cell_size;
  const double r2 = radius * radius;
  const double norm = 3.0 / (std::numbers::pi * r2);
  const auto clamp_index = [](double v, std::size_t n) -> std::ptrdiff_t {
    return static_cast<std::ptrdiff_t>(std::clamp(v, -1.0, static_cast<double>(n)));
  };
  // Point-major accumulation visits each cell's contributors in point order, so the
  // per-cell sum is the same as a cell-major double loop.
  for (const BehaviorPoint& p : points) {
    const std::ptrdiff_t c_lo = std::max<std::ptrdiff_t>(0, clamp_index(std::floor((p.x - radius - grid.xll) / cs - 0.5), grid.ncols));
    const std::ptrdiff_t c_hi = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(grid.ncols) - 1, clamp_index(std::ceil((p.x + radius - grid.xll) / cs - 0.5), grid.ncols));
    // Rows count down from the top edge.
    const double top = grid.yll + static_cast<double>(grid.nrows) * cs;
    const std::ptrdiff_t r_lo = std::max<std::ptrdiff_t>(0, clamp_index(std::floor((top - (p.y + radius)) / cs - 0.5), grid.nrows));
    const std::ptrdiff_t r_hi = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(grid.nrows) - 1, clamp_index(std::ceil((top - (p.y - radius)) / cs - 0.5), grid.nrows));
    for (std::ptrdiff_t row = r_lo; row <= r_hi; ++row) {
      const double dy = grid.center_y(static_cast<std::size_t>(row)) - p.y;
      for (std::ptrdiff_t col = c_lo; col <= c_hi; ++col) {
        const double dx = grid.center_x(static_cast<std::size_t>(col)) - p.x;
        const double d2 = dx * dx + dy * dy;
        if (d2 < r2) {
          const double s = 1.0 - d2 / r2;
          grid.values[static_cast<std::size_t>(row) * grid.ncols + static_cast<std::size_t>(col)] +=
              p.weight * norm * s * s;
        }
      }
    }
  }
  return grid;
}

DensityRaster kde(std::span<const BehaviorPoint> points, const KdeConfig& config) {
  validate(config);
  for (const BehaviorPoint& p : points) {
    if (!(p.weight > 0.0)) throw Error(ErrorCode::InvalidArgument, "point weights must be positive");
  }
  const Bounds b = config.bounds ? *config.bounds : auto_bounds(points, config);
  return kde_on_grid(points, config.radius, make_grid(b, config.cell_size));
}

Calibration calibrate_reference(std::span<const BehaviorPoint> uniform_points, const KdeConfig& config) {
  if (uniform_points.empty()) throw Error(ErrorCode::EmptyCalibrationSet, "calibration set is empty");
  for (const BehaviorPoint& p : uniform_points) {
    if (p.label != uniform_points.front().label) {
      throw Error(ErrorCode::MixedLabels, "calibration set must carry a single behaviour label");
    }
  }
  return {kde(uniform_points, config).max_value()};
}

double to_percentage(double density, const Calibration& cal) { return 100.0 * density / cal.d_ref; }

DensityRaster to_percentage(const DensityRaster& raster, const Calibration& cal) {
  DensityRaster out = raster;
  for (double& v : out.values) v = to_percentage(v, cal);
  return out;
}

BehaviorDistribution build_distribution(std::span<const BehaviorPoint> points, const KdeConfig& config,
                                        const Calibration& cal, LegendMode legend_mode) {
  validate(config);
  if (!(cal.d_ref > 0.0)) throw Error(ErrorCode::InvalidArgument, "calibration d_ref must be positive");
  BehaviorDistribution dist;
  dist.calibration = cal;
  dist.legend_mode = legend_mode;
  const Bounds b = config.bounds ? *config.bounds : auto_bounds(points, config);
  const DensityRaster grid = make_grid(b, config.cell_size);

  std::map<BehaviorLabel, std::vector<BehaviorPoint>> by_label;
  for (const BehaviorPoint& p : points) by_label[p.label].push_back(p);
  for (const auto& [label, pts] : by_label) dist.rasters.emplace(label, kde_on_grid(pts, config.radius, grid));

  if (legend_mode == LegendMode::PerBehavior) {
    for (const auto& [label, r] : dist.rasters) dist.legend_ranges[label] = range_of(r);
  } else {
    ValueRange shared{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& [label, r] : dist.rasters) {
      shared.min = std::min(shared.min, r.min_value());
      shared.max = std::max(shared.max, r.max_value());
    }
    for (const auto& [label, r] : dist.rasters) dist.legend_ranges[label] = shared;
  }
  return dist;
}

std::string to_esri_ascii(const DensityRaster& raster) {
  std::string out;
  out += "ncols " + std::to_string(raster.ncols) + '\n';
  out += "nrows " + std::to_string(raster.nrows) + '\n';
  out += "xllcorner " + io::format_fixed(raster.xll, 6) + '\n';
  out += "yllcorner " + io::format_fixed(raster.yll, 6) + '\n';
  out += "cellsize " + io::format_fixed(raster.cell_size, 6) + '\n';
  out += "NODATA_value -9999\n";
  out.reserve(out.size() + raster.values.size() * 13);
  for (std::size_t row = 0; row < raster.nrows; ++row) {
    for (std::size_t col = 0; col < raster.ncols; ++col) {
      const double v = raster.at(row, col);
      if (col) out += ' ';
      out += std::isfinite(v) ? io::format_scientific(v, 6) : "-9999";
    }
    out += '\n';
  }
  return out;
}

DensityRaster parse_esri_ascii(std::string_view text) {
  const auto rows = io::lines(text);
  if (rows.size() < 6) throw Error(ErrorCode::MalformedField, "ESRI grid header is incomplete");
  const auto header_value = [&](std::size_t i, std::string_view key) {
    const std::string_view line = rows[i];
    if (line.substr(0, key.size()) != key) {
      throw Error(ErrorCode::MalformedField, "expected ESRI header key " + std::string(key));
    }
    return io::parse_double(line.substr(key.size()), key);
  };
  DensityRaster r;
  r.ncols = static_cast<std::size_t>(header_value(0, "ncols"));
  r.nrows = static_cast<std::size_t>(header_value(1, "nrows"));
  r.xll = header_value(2, "xllcorner");
  r.yll = header_value(3, "yllcorner");
  r.cell_size = header_value(4, "cellsize");
  header_value(5, "NODATA_value");
  for (std::size_t i = 6; i < rows.size(); ++i) {
    std::size_t pos = 0;
    const std::string_view line = rows[i];
    while (pos < line.size()) {
      std::size_t sp = line.find(' ', pos);
      if (sp == std::string_view::npos) sp = line.size();
      if (sp > pos) {
        const double v = io::parse_double(line.substr(pos, sp - pos), "cell");
        r.values.push_back(v == DensityRaster::kNoData ? std::numeric_limits<double>::quiet_NaN() : v);
      }
      pos = sp + 1;
    }
  }
  if (r.values.size() != r.ncols * r.nrows) throw Error(ErrorCode::MalformedField, "ESRI grid cell count mismatch");
  return r;
}

std::string points_to_geojson(std::span<const BehaviorPoint> points, GeoPoint ref) {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (const BehaviorPoint& p : points) {
    const GeoPoint g = unproject_point({p.x, p.y}, ref);
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Point"}, {"coordinates", {g.lon, g.lat}}};
    f["properties"] = {{"label", std::string(to_string(p.label))},
                       {"trajectory_id", p.trajectory_id},
                       {"weight", p.weight}};
    fc["features"].push_back(std::move(f));
  }
  return fc.dump(1) + '\n';
}

std::string legend_to_json(const BehaviorDistribution& dist) {
  nlohmann::ordered_json j;
  j["legend"] = dist.legend_mode == LegendMode::PerBehavior ? "per_behavior" : "unified";
  j["d_ref"] = dist.calibration.d_ref;
  nlohmann::ordered_json ranges = nlohmann::ordered_json::object();
  for (const auto& [label, range] : dist.legend_ranges) {
    ranges[std::string(to_string(label))] = {{"min", range.min},
                                             {"max", range.max},
                                             {"min_percentage", to_percentage(range.min, dist.calibration)},
                                             {"max_percentage", to_percentage(range.max, dist.calibration)}};
  }
  j["ranges"] = std::move(ranges);
  return j.dump(1) + '\n';
}

}  // namespace wzb

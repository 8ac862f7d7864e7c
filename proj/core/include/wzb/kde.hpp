#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wzb/behavior.hpp"
#include "wzb/classify.hpp"
#include "wzb/trajectory.hpp"

namespace wzb {

struct BehaviorPoint {
  double x = 0.0;  // m east
  double y = 0.0;  // m north
  BehaviorLabel label = BehaviorLabel::LC;
  double weight = 1.0;
  std::string trajectory_id;
};

enum class Placement { Midpoint, PerSecond };
std::string_view to_string(Placement p);
std::optional<Placement> parse_placement(std::string_view text);

/// Converts timeline segments to map points. Midpoint: one point at the segment's
/// temporal midpoint. PerSecond: one point per second of duration, evenly spread.
std::vector<BehaviorPoint> segment_to_points(const Trajectory& traj, const SegmentTimeline& timeline, GeoPoint ref,
                                             Placement placement);

struct Bounds {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct KdeConfig {
  double cell_size = 2.0;  // m
  double radius = 15.0;    // m, kernel support
  std::optional<Bounds> bounds;  // nullopt = fit to the points plus one radius
};

/// Throws InvalidKdeConfig when cell_size <= 0, radius < cell_size or bounds are degenerate.
void validate(const KdeConfig& config);

/// Bounding box of the points grown by one radius and snapped outward to the cell grid.
Bounds auto_bounds(std::span<const BehaviorPoint> points, const KdeConfig& config);

/// Density grid, row-major with row 0 at the top (north) edge.
struct DensityRaster {
  static constexpr double kNoData = -9999.0;

  std::size_t ncols = 0;
  std::size_t nrows = 0;
  double xll = 0.0;
  double yll = 0.0;
  double cell_size = 1.0;
  std::vector<double> values;  // points per m^2

  double at(std::size_t row, std::size_t col) const { return values[row * ncols + col]; }
  double center_x(std::size_t col) const { return xll + (static_cast<double>(col) + 0.5) * cell_size; }
  double center_y(std::size_t row) const {
    return yll + (static_cast<double>(nrows - row) - 0.5) * cell_size;
  }
  double max_value() const;
  double min_value() const;
};

/// Empty all-zero raster covering `bounds`.
DensityRaster make_grid(const Bounds& bounds, double cell_size);

/// Quadratic kernel 3/(pi r^2) (1 - (d/r)^2)^2 for d < r, zero beyond.
double quadratic_kernel(double distance, double radius);

/// Sums the weighted quadratic kernel of every point at each cell centre.
DensityRaster kde(std::span<const BehaviorPoint> points, const KdeConfig& config);

/// Same, onto the geometry of `grid` (its values are overwritten).
DensityRaster kde_on_grid(std::span<const BehaviorPoint> points, double radius, DensityRaster grid);

/// Density reached when 100% of vehicles share one behaviour.
struct Calibration {
  double d_ref = 1.0;
};

/// d_ref = peak of the KDE of a single-labelled reference set.
Calibration calibrate_reference(std::span<const BehaviorPoint> uniform_points, const KdeConfig& config);

double to_percentage(double density, const Calibration& cal);
DensityRaster to_percentage(const DensityRaster& raster, const Calibration& cal);

enum class LegendMode { PerBehavior, Unified };
std::string_view to_string(LegendMode m);
std::optional<LegendMode> parse_legend_mode(std::string_view text);

struct ValueRange {
  double min = 0.0;
  double max = 0.0;
};

struct BehaviorDistribution {
  std::map<BehaviorLabel, DensityRaster> rasters;  // all share one geometry
  Calibration calibration;
  LegendMode legend_mode = LegendMode::PerBehavior;
  /// Per-label ranges in PerBehavior mode; every label maps to the shared range in Unified mode.
  std::map<BehaviorLabel, ValueRange> legend_ranges;
};

BehaviorDistribution build_distribution(std::span<const BehaviorPoint> points, const KdeConfig& config,
                                        const Calibration& cal, LegendMode legend_mode);

/// ESRI ASCII grid: six header lines then rows top first, values in %.5e.
std::string to_esri_ascii(const DensityRaster& raster);
DensityRaster parse_esri_ascii(std::string_view text);

/// GeoJSON FeatureCollection of points (lon/lat) with label, trajectory_id and weight.
std::string points_to_geojson(std::span<const BehaviorPoint> points, GeoPoint ref);

/// legend ranges, in density and percentage, as JSON.
std::string legend_to_json(const BehaviorDistribution& dist);

}  // namespace wzb

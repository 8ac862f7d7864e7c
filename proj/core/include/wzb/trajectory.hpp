#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wzb {

/// Sanity bound on any acceleration axis (5 g); anything above is a unit error.
inline constexpr double kMaxAbsAccel = 50.0;
inline constexpr double kEarthRadius = 6371000.0;

/// One time-aligned sample on the accelerometer clock.
struct TrajectorySample {
  double t = 0.0;      // s since trajectory start
  double lat = 0.0;    // deg
  double lon = 0.0;    // deg
  double speed = 0.0;  // m/s
  double ax = 0.0;     // m/s^2, forward positive
  double ay = 0.0;     // m/s^2, left positive
  double az = 0.0;     // m/s^2

  friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

/// One vehicle pass. Immutable after ingestion by convention; passed around by const ref.
struct Trajectory {
  std::string id;
  std::vector<TrajectorySample> samples;
  double accel_hz = 20.0;
  double gps_hz = 1.0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// Maps logical fields to CSV column names.
struct CsvSchema {
  std::string time = "t";
  std::string lat = "lat";
  std::string lon = "lon";
  std::string speed = "speed";
  std::string ax = "ax";
  std::string ay = "ay";
  std::string az = "az";
  /// false: every row is an accel-clock sample carrying all fields.
  /// true: raw dual-rate rows; accel-only rows leave GPS fields empty and
  /// GPS-only rows leave accel fields empty.
  bool dual_rate = false;
};

struct GpsFix {
  double t = 0.0;
  double lat = 0.0;
  double lon = 0.0;
  double speed = 0.0;
};

struct AccelReading {
  double t = 0.0;
  double ax = 0.0;
  double ay = 0.0;
  double az = 0.0;
};

/// Puts GPS fixes onto the accelerometer clock: linear interpolation between
/// bracketing fixes, nearest-fix hold before the first and after the last.
/// Times are shifted so the first accel reading is t = 0.
Trajectory align_streams(std::string id, std::span<const AccelReading> accel,
                         std::span<const GpsFix> gps, double accel_hz, double gps_hz);

Trajectory parse_trajectory_csv(std::string_view text, std::string id, const CsvSchema& schema,
                                double accel_hz = 20.0, double gps_hz = 1.0);

/// The trajectory id is the file stem.
Trajectory ingest_csv(const std::filesystem::path& path, const CsvSchema& schema,
                      double accel_hz = 20.0, double gps_hz = 1.0);

/// Canonical aligned form: header t,lat,lon,speed,ax,ay,az with round-trip precision.
std::string to_csv(const Trajectory& traj);

/// Throws on any violated sample invariant (time order, bounds, uniform spacing).
void validate(const Trajectory& traj);

/// Epoch seconds ("1556697600.25") or ISO-8601 ("2019-05-01T08:00:00.25Z", optional offset).
double parse_time(std::string_view text);

struct LocalXY {
  double x = 0.0;  // m east
  double y = 0.0;  // m north
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

/// Equirectangular tangent projection about a reference point; |ref_lat| < 85.
LocalXY project_point(GeoPoint p, GeoPoint ref);
GeoPoint unproject_point(LocalXY p, GeoPoint ref);
std::vector<LocalXY> local_project(const Trajectory& traj, GeoPoint ref);

/// x,y per row with six decimals.
std::string xy_to_csv(std::span<const LocalXY> xy);

}  // namespace wzb

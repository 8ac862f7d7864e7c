#include "wzb/trajectory.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "wzb/error.hpp"
#include "wzb/io.hpp"

namespace wzb {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kSpacingJitter = 0.10;

std::size_t find_column(const std::vector<std::string_view>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), std::string_view(name));
  if (it == header.end()) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not in header");
  return static_cast<std::size_t>(it - header.begin());
}

void check_sample_bounds(const TrajectorySample& s, std::size_t row) {
  const auto fail = [&](const char* what) {
    throw Error(ErrorCode::OutOfRangeValue, std::string(what) + " out of range at row " + std::to_string(row));
  };
  if (!std::isfinite(s.t) || !std::isfinite(s.lat) || !std::isfinite(s.lon) || !std::isfinite(s.speed) ||
      !std::isfinite(s.ax) || !std::isfinite(s.ay) || !std::isfinite(s.az)) {
    fail("non-finite value");
  }
  if (s.lat < -90.0 || s.lat > 90.0) fail("latitude");
  if (s.lon < -180.0 || s.lon > 180.0) fail("longitude");
  if (s.speed < 0.0) fail("speed");
  if (std::abs(s.ax) > kMaxAbsAccel) fail("ax");
  if (std::abs(s.ay) > kMaxAbsAccel) fail("ay");
  if (std::abs(s.az) > kMaxAbsAccel) fail("az");
}

// Days since 1970-01-01 for a proleptic Gregorian date.
double epoch_seconds(int y, unsigned mo, unsigned d, int h, int mi, double sec) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok()) throw Error(ErrorCode::MalformedField, "invalid calendar date");
  const auto days = sys_days(ymd).time_since_epoch().count();
  return static_cast<double>(days) * 86400.0 + h * 3600.0 + mi * 60.0 + sec;
}

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw Error(ErrorCode::MalformedField, "truncated timestamp");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') throw Error(ErrorCode::MalformedField, "bad timestamp '" + std::string(s) + "'");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

double parse_iso8601(std::string_view s) {
  // YYYY-MM-DD[T| ]HH:MM:SS[.fff][Z|+hh:mm|-hh:mm]
  const int y = digits(s, 0, 4);
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
      s[16] != ':') {
    throw Error(ErrorCode::MalformedField, "bad timestamp '" + std::string(s) + "'");
  }
  const int mo = digits(s, 5, 2);
  const int d = digits(s, 8, 2);
  const int h = digits(s, 11, 2);
  const int mi = digits(s, 14, 2);
  std::size_t pos = 19;
  while (pos < s.size() && (s[pos] == '.' || (s[pos] >= '0' && s[pos] <= '9'))) ++pos;
  const double sec = io::parse_double(s.substr(17, pos - 17), "timestamp seconds");
  double offset = 0.0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      offset = 0.0;
    } else if ((s[pos] == '+' || s[pos] == '-') && pos + 6 == s.size() && s[pos + 3] == ':') {
      const double mag = digits(s, pos + 1, 2) * 3600.0 + digits(s, pos + 4, 2) * 60.0;
      offset = s[pos] == '+' ? mag : -mag;
    } else {
      throw Error(ErrorCode::MalformedField, "bad timestamp zone in '" + std::string(s) + "'");
    }
  }
  if (mo < 1 || mo > 12 || h > 23 || mi > 59 || sec >= 61.0) {
    throw Error(ErrorCode::MalformedField, "timestamp field out of range in '" + std::string(s) + "'");
  }
  return epoch_seconds(y, static_cast<unsigned>(mo), static_cast<unsigned>(d), h, mi, sec) - offset;
}

}  // namespace

double parse_time(std::string_view text) {
  text = io::trim(text);
  const bool iso = text.size() >= 10 && text[4] == '-' && text[7] == '-';
  return iso ? parse_iso8601(text) : io::parse_double(text, "time");
}

Trajectory align_streams(std::string id, std::span<const AccelReading> accel, std::span<const GpsFix> gps,
                         double accel_hz, double gps_hz) {
  if (accel.empty() || gps.empty()) {
    throw Error(ErrorCode::EmptyFile, "trajectory '" + id + "' needs at least one accel reading and one GPS fix");
  }
  Trajectory traj;
  traj.id = std::move(id);
  traj.accel_hz = accel_hz;
  traj.gps_hz = gps_hz;
  traj.samples.reserve(accel.size());
  const double t0 = accel.front().t;
  for (const AccelReading& a : accel) {
    TrajectorySample s;
    s.t = a.t - t0;
    s.ax = a.ax;
    s.ay = a.ay;
    s.az = a.az;
    const auto hi = std::upper_bound(gps.begin(), gps.end(), a.t,
                                     [](double t, const GpsFix& f) { return t < f.t; });
    if (hi == gps.begin() || hi == gps.end()) {
      const GpsFix& f = hi == gps.begin() ? gps.front() : gps.back();
      s.lat = f.lat;
      s.lon = f.lon;
      s.speed = f.speed;
    } else {
      const GpsFix& f1 = *hi;
      const GpsFix& f0 = *(hi - 1);
      const double w = (a.t - f0.t) / (f1.t - f0.t);
      const auto lerp = [w](double u, double v) {
        return std::clamp(u + w * (v - u), std::min(u, v), std::max(u, v));
      };
      s.lat = lerp(f0.lat, f1.lat);
      s.lon = lerp(f0.lon, f1.lon);
      s.speed = lerp(f0.speed, f1.speed);
    }
    traj.samples.push_back(s);
  }
  return traj;
}

Trajectory parse_trajectory_csv(std::string_view text, std::string id, const CsvSchema& schema, double accel_hz,
                                double gps_hz) {
  if (!(accel_hz > 0.0) || !(gps_hz > 0.0) || accel_hz < gps_hz) {
    throw Error(ErrorCode::InvalidArgument, "require accel_hz >= gps_hz > 0");
  }
  const auto rows = io::lines(text);
  std::size_t first = 0;
  while (first < rows.size() && io::trim(rows[first]).empty()) ++first;
  if (first == rows.size()) throw Error(ErrorCode::EmptyFile, "no header in '" + id + "'");
  const auto header = io::split_csv_line(rows[first]);
  const std::size_t c_t = find_column(header, schema.time);
  const std::size_t c_lat = find_column(header, schema.lat);
  const std::size_t c_lon = find_column(header, schema.lon);
  const std::size_t c_v = find_column(header, schema.speed);
  const std::size_t c_ax = find_column(header, schema.ax);
  const std::size_t c_ay = find_column(header, schema.ay);
  const std::size_t c_az = find_column(header, schema.az);

  std::vector<AccelReading> accel;
  std::vector<GpsFix> gps;
  std::vector<TrajectorySample> aligned;
  std::optional<double> t_first;
  double t_prev = 0.0;

  for (std::size_t r = first + 1; r < rows.size(); ++r) {
    if (io::trim(rows[r]).empty()) continue;
    const std::size_t row_no = r - first;  // 1-based data row
    const auto f = io::split_csv_line(rows[r]);
    if (f.size() < header.size()) {
      throw Error(ErrorCode::MalformedField, "row " + std::to_string(row_no) + " has too few fields");
    }
    const double t = parse_time(f[c_t]);
    if (!schema.dual_rate) {
      TrajectorySample s{t,
                         io::parse_double(f[c_lat], "lat"),
                         io::parse_double(f[c_lon], "lon"),
                         io::parse_double(f[c_v], "speed"),
                         io::parse_double(f[c_ax], "ax"),
                         io::parse_double(f[c_ay], "ay"),
                         io::parse_double(f[c_az], "az")};
      if (!aligned.empty() && !(t > t_prev)) {
        throw Error(ErrorCode::NonMonotonicTime, "time does not increase at row " + std::to_string(row_no));
      }
      if (!t_first) t_first = t;
      t_prev = t;
      s.t = t - *t_first;
      check_sample_bounds(s, row_no);
      aligned.push_back(s);
      continue;
    }
    const bool has_accel = !f[c_ax].empty() && !f[c_ay].empty() && !f[c_az].empty();
    const bool has_gps = !f[c_lat].empty() && !f[c_lon].empty() && !f[c_v].empty();
    if (has_accel) {
      AccelReading a{t, io::parse_double(f[c_ax], "ax"), io::parse_double(f[c_ay], "ay"),
                     io::parse_double(f[c_az], "az")};
      if (!accel.empty() && !(t > accel.back().t)) {
        throw Error(ErrorCode::NonMonotonicTime, "accel time does not increase at row " + std::to_string(row_no));
      }
      check_sample_bounds(TrajectorySample{0, 0, 0, 0, a.ax, a.ay, a.az}, row_no);
      accel.push_back(a);
    }
    if (has_gps) {
      GpsFix g{t, io::parse_double(f[c_lat], "lat"), io::parse_double(f[c_lon], "lon"),
               io::parse_double(f[c_v], "speed")};
      if (!gps.empty() && !(t > gps.back().t)) {
        throw Error(ErrorCode::NonMonotonicTime, "GPS time does not increase at row " + std::to_string(row_no));
      }
      check_sample_bounds(TrajectorySample{0, g.lat, g.lon, g.speed, 0, 0, 0}, row_no);
      gps.push_back(g);
    }
  }

  Trajectory traj;
  if (schema.dual_rate) {
    if (accel.empty() || gps.empty()) throw Error(ErrorCode::EmptyFile, "no usable rows in '" + id + "'");
    traj = align_streams(std::move(id), accel, gps, accel_hz, gps_hz);
  } else {
    if (aligned.empty()) throw Error(ErrorCode::EmptyFile, "no data rows in '" + id + "'");
    traj.id = std::move(id);
    traj.samples = std::move(aligned);
    traj.accel_hz = accel_hz;
    traj.gps_hz = gps_hz;
  }
  validate(traj);
  return traj;
}

Trajectory ingest_csv(const std::filesystem::path& path, const CsvSchema& schema, double accel_hz, double gps_hz) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::UnreadableFile, "no such file " + path.string());
  return parse_trajectory_csv(io::read_file(path), path.stem().string(), schema, accel_hz, gps_hz);
}

void validate(const Trajectory& traj) {
  if (traj.samples.empty()) throw Error(ErrorCode::EmptyFile, "trajectory '" + traj.id + "' has no samples");
  const double step = 1.0 / traj.accel_hz;
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    check_sample_bounds(traj.samples[i], i + 1);
    if (i == 0) continue;
    const double dt = traj.samples[i].t - traj.samples[i - 1].t;
    if (!(dt > 0.0)) {
      throw Error(ErrorCode::NonMonotonicTime, "time does not increase at row " + std::to_string(i + 1));
    }
    if (std::abs(dt - step) > kSpacingJitter * step) {
      throw Error(ErrorCode::IrregularSampling,
                  "sample spacing " + io::format_double(dt) + " s at row " + std::to_string(i + 1) +
                      " deviates more than 10% from 1/accel_hz");
    }
  }
}

std::string to_csv(const Trajectory& traj) {
  std::string out = "t,lat,lon,speed,ax,ay,az\n";
  out.reserve(traj.samples.size() * 96);
  for (const TrajectorySample& s : traj.samples) {
    for (double v : {s.t, s.lat, s.lon, s.speed, s.ax, s.ay}) {
      out += io::format_double(v);
      out += ',';
    }
    out += io::format_double(s.az);
    out += '\n';
  }
  return out;
}

LocalXY project_point(GeoPoint p, GeoPoint ref) {
  return {(p.lon - ref.lon) * kDegToRad * kEarthRadius * std::cos(ref.lat * kDegToRad),
          (p.lat - ref.lat) * kDegToRad * kEarthRadius};
}

GeoPoint unproject_point(LocalXY p, GeoPoint ref) {
  return {ref.lat + p.y / (kDegToRad * kEarthRadius),
          ref.lon + p.x / (kDegToRad * kEarthRadius * std::cos(ref.lat * kDegToRad))};
}

std::vector<LocalXY> local_project(const Trajectory& traj, GeoPoint ref) {
  if (!(std::abs(ref.lat) < 85.0)) {
    throw Error(ErrorCode::InvalidArgument, "reference latitude must satisfy |lat| < 85");
  }
  std::vector<LocalXY> out;
  out.reserve(traj.samples.size());
  for (const TrajectorySample& s : traj.samples) out.push_back(project_point({s.lat, s.lon}, ref));
  return out;
}

std::string xy_to_csv(std::span<const LocalXY> xy) {
  std::string out = "x,y\n";
  for (const LocalXY& p : xy) {
    out += io::format_fixed(p.x, 6);
    out += ',';
    out += io::format_fixed(p.y, 6);
    out += '\n';
  }
  return out;
}

}  // namespace wzb

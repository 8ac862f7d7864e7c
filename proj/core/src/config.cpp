#include "wzb/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "wzb/error.hpp"
#include "wzb/io.hpp"

namespace wzb {
namespace {

// Thrown by setters; becomes a Diagnostic.
struct BadValue : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double to_double(std::string_view v) {
  try {
    return io::parse_double(v, "value");
  } catch (const Error&) {
    throw BadValue("must be a number");
  }
}

double positive(std::string_view v) {
  const double d = to_double(v);
  if (!(d > 0.0)) throw BadValue("must be > 0");
  return d;
}

double non_negative(std::string_view v) {
  const double d = to_double(v);
  if (!(d >= 0.0)) throw BadValue("must be >= 0");
  return d;
}

double fraction(std::string_view v) {
  const double d = to_double(v);
  if (!(d > 0.0 && d <= 1.0)) throw BadValue("must lie in (0, 1]");
  return d;
}

std::size_t count(std::string_view v, std::size_t min) {
  long long n = 0;
  try {
    n = io::parse_int(v, "value");
  } catch (const Error&) {
    throw BadValue("must be an integer");
  }
  if (n < static_cast<long long>(min)) throw BadValue("must be >= " + std::to_string(min));
  return static_cast<std::size_t>(n);
}

bool boolean(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw BadValue("must be true or false");
}

std::string fmt(double v) { return io::format_double(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

struct KeySpec {
  std::string_view key;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

#define WZB_STRING_KEY(name, member)                                      \
  KeySpec {                                                               \
    name, [](PipelineConfig& c, std::string_view v) { c.member = std::string(v); }, \
        [](const PipelineConfig& c) { return std::string(c.member); }    \
  }

const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> keys = {
      // ingest
      WZB_STRING_KEY("ingest.col.time", schema.time),
      WZB_STRING_KEY("ingest.col.lat", schema.lat),
      WZB_STRING_KEY("ingest.col.lon", schema.lon),
      WZB_STRING_KEY("ingest.col.speed", schema.speed),
      WZB_STRING_KEY("ingest.col.ax", schema.ax),
      WZB_STRING_KEY("ingest.col.ay", schema.ay),
      WZB_STRING_KEY("ingest.col.az", schema.az),
      {"ingest.dual_rate", [](auto& c, auto v) { c.schema.dual_rate = boolean(v); },
       [](const auto& c) { return fmt(c.schema.dual_rate); }},
      {"ingest.accel_hz", [](auto& c, auto v) { c.accel_hz = positive(v); },
       [](const auto& c) { return fmt(c.accel_hz); }},
      {"ingest.gps_hz", [](auto& c, auto v) { c.gps_hz = positive(v); }, [](const auto& c) { return fmt(c.gps_hz); }},
      // segment
      {"segment.frame_len", [](auto& c, auto v) { c.classify.detector.frame.frame_len = count(v, 1); },
       [](const auto& c) { return std::to_string(c.classify.detector.frame.frame_len); }},
      {"segment.hop", [](auto& c, auto v) { c.classify.detector.frame.hop = count(v, 1); },
       [](const auto& c) { return std::to_string(c.classify.detector.frame.hop); }},
      {"segment.mode",
       [](auto& c, auto v) {
         if (v == "adaptive") {
           c.classify.detector.mode = ThresholdMode::Adaptive;
         } else if (v == "determinative") {
           c.classify.detector.mode = ThresholdMode::Determinative;
         } else {
           throw BadValue("must be adaptive or determinative");
         }
       },
       [](const auto& c) {
         return std::string(c.classify.detector.mode == ThresholdMode::Adaptive ? "adaptive" : "determinative");
       }},
      {"segment.t2_frac", [](auto& c, auto v) { c.classify.detector.t2_frac = fraction(v); },
       [](const auto& c) { return fmt(c.classify.detector.t2_frac); }},
      {"segment.t1_frac", [](auto& c, auto v) { c.classify.detector.t1_frac = fraction(v); },
       [](const auto& c) { return fmt(c.classify.detector.t1_frac); }},
      {"segment.accel_limit", [](auto& c, auto v) { c.classify.detector.accel_limit = positive(v); },
       [](const auto& c) { return fmt(c.classify.detector.accel_limit); }},
      {"segment.min_poi", [](auto& c, auto v) { c.classify.detector.min_poi_frames = count(v, 0); },
       [](const auto& c) { return std::to_string(c.classify.detector.min_poi_frames); }},
      {"segment.merge_gap", [](auto& c, auto v) { c.classify.detector.merge_gap_frames = count(v, 0); },
       [](const auto& c) { return std::to_string(c.classify.detector.merge_gap_frames); }},
      {"segment.smooth", [](auto& c, auto v) { c.classify.detector.smooth = boolean(v); },
       [](const auto& c) { return fmt(c.classify.detector.smooth); }},
      {"segment.smooth_window", [](auto& c, auto v) { c.classify.detector.smooth_window = count(v, 1); },
       [](const auto& c) { return std::to_string(c.classify.detector.smooth_window); }},
      {"segment.adaptive_on_accel", [](auto& c, auto v) { c.classify.detector.adaptive_on_accel = boolean(v); },
       [](const auto& c) { return fmt(c.classify.detector.adaptive_on_accel); }},
      // combine
      {"combine.v_stop", [](auto& c, auto v) { c.classify.combine.v_stop = non_negative(v); },
       [](const auto& c) { return fmt(c.classify.combine.v_stop); }},
      {"combine.stop_hold", [](auto& c, auto v) { c.classify.combine.stop_hold = non_negative(v); },
       [](const auto& c) { return fmt(c.classify.combine.stop_hold); }},
      // svm
      {"svm.c", [](auto& c, auto v) { c.svm_c = positive(v); }, [](const auto& c) { return fmt(c.svm_c); }},
      {"svm.gamma", [](auto& c, auto v) { c.svm_gamma = positive(v); }, [](const auto& c) { return fmt(c.svm_gamma); }},
      {"svm.grid", [](auto& c, auto v) { c.svm_grid = boolean(v); }, [](const auto& c) { return fmt(c.svm_grid); }},
      {"svm.folds", [](auto& c, auto v) { c.svm_folds = count(v, 2); },
       [](const auto& c) { return std::to_string(c.svm_folds); }},
      {"svm.seed", [](auto& c, auto v) { c.svm_seed = count(v, 0); },
       [](const auto& c) { return std::to_string(c.svm_seed); }},
      // kde
      {"kde.cell_size", [](auto& c, auto v) { c.kde.cell_size = positive(v); },
       [](const auto& c) { return fmt(c.kde.cell_size); }},
      {"kde.radius", [](auto& c, auto v) { c.kde.radius = positive(v); }, [](const auto& c) { return fmt(c.kde.radius); }},
      {"kde.bounds",
       [](auto& c, auto v) {
         if (v == "auto") {
           c.kde.bounds.reset();
           return;
         }
         const auto parts = io::split_csv_line(v);
         if (parts.size() != 4) throw BadValue("must be auto or xmin,ymin,xmax,ymax");
         const Bounds b{to_double(parts[0]), to_double(parts[1]), to_double(parts[2]), to_double(parts[3])};
         if (!(b.xmax > b.xmin && b.ymax > b.ymin)) throw BadValue("KdeConfig: bounds must be non-degenerate");
         c.kde.bounds = b;
       },
       [](const auto& c) {
         if (!c.kde.bounds) return std::string("auto");
         const Bounds& b = *c.kde.bounds;
         return fmt(b.xmin) + "," + fmt(b.ymin) + "," + fmt(b.xmax) + "," + fmt(b.ymax);
       }},
      {"kde.placement",
       [](auto& c, auto v) {
         const auto p = parse_placement(v);
         if (!p) throw BadValue("must be midpoint or per_second");
         c.placement = *p;
       },
       [](const auto& c) { return std::string(to_string(c.placement)); }},
      {"kde.legend",
       [](auto& c, auto v) {
         const auto m = parse_legend_mode(v);
         if (!m) throw BadValue("must be per or unified");
         c.legend = *m;
       },
       [](const auto& c) { return std::string(to_string(c.legend)); }},
      {"kde.ref",
       [](auto& c, auto v) {
         if (v == "auto") {
           c.ref.reset();
           return;
         }
         const auto parts = io::split_csv_line(v);
         if (parts.size() != 2) throw BadValue("must be auto or lat,lon");
         const GeoPoint g{to_double(parts[0]), to_double(parts[1])};
         if (!(std::abs(g.lat) < 85.0)) throw BadValue("reference latitude must satisfy |lat| < 85");
         c.ref = g;
       },
       [](const auto& c) { return c.ref ? fmt(c.ref->lat) + "," + fmt(c.ref->lon) : std::string("auto"); }},
      WZB_STRING_KEY("kde.calibration_file", calibration_file),
      WZB_STRING_KEY("kde.calibration_dir", calibration_dir),
      {"kde.calibration_label",
       [](auto& c, auto v) {
         const auto l = parse_behavior(v);
         if (!l) throw BadValue("must be a behaviour label");
         c.calibration_label = *l;
       },
       [](const auto& c) { return std::string(to_string(c.calibration_label)); }},
      // synth
      {"synth.scenario",
       [](auto& c, auto v) {
         if (v == "work_zone") c.synth.scenario = SynthScenario::WorkZone;
         else if (v == "uniform") c.synth.scenario = SynthScenario::Uniform;
         else if (v == "training") c.synth.scenario = SynthScenario::Training;
         else if (v == "script") c.synth.scenario = SynthScenario::Script;
         else throw BadValue("must be work_zone, uniform, training or script");
       },
       [](const auto& c) { return std::string(to_string(c.synth.scenario)); }},
      {"synth.vehicles", [](auto& c, auto v) { c.synth.vehicles = count(v, 1); },
       [](const auto& c) { return std::to_string(c.synth.vehicles); }},
      {"synth.per_class", [](auto& c, auto v) { c.synth.per_class = count(v, 1); },
       [](const auto& c) { return std::to_string(c.synth.per_class); }},
      {"synth.seed", [](auto& c, auto v) { c.synth.seed = count(v, 0); },
       [](const auto& c) { return std::to_string(c.synth.seed); }},
      {"synth.script",
       [](auto& c, auto v) {
         try {
           c.synth.script = v.empty() ? std::vector<ManeuverStep>{} : parse_script(v);
         } catch (const Error& e) {
           throw BadValue(e.what());
         }
       },
       [](const auto& c) { return format_script(c.synth.script); }},
      {"synth.initial_speed", [](auto& c, auto v) { c.synth.initial_speed = non_negative(v); },
       [](const auto& c) { return fmt(c.synth.initial_speed); }},
      {"synth.origin",
       [](auto& c, auto v) {
         const auto parts = io::split_csv_line(v);
         if (parts.size() != 2) throw BadValue("must be lat,lon");
         c.synth.origin = {to_double(parts[0]), to_double(parts[1])};
       },
       [](const auto& c) { return fmt(c.synth.origin.lat) + "," + fmt(c.synth.origin.lon); }},
      {"synth.noise.accel_sd", [](auto& c, auto v) { c.synth.noise.accel_noise_sd = non_negative(v); },
       [](const auto& c) { return fmt(c.synth.noise.accel_noise_sd); }},
      {"synth.noise.gps_pos_sd", [](auto& c, auto v) { c.synth.noise.gps_pos_sd = non_negative(v); },
       [](const auto& c) { return fmt(c.synth.noise.gps_pos_sd); }},
      {"synth.noise.gps_speed_sd", [](auto& c, auto v) { c.synth.noise.gps_speed_sd = non_negative(v); },
       [](const auto& c) { return fmt(c.synth.noise.gps_speed_sd); }},
      // paths
      WZB_STRING_KEY("paths.input_dir", input_dir),
      WZB_STRING_KEY("paths.output_dir", output_dir),
      WZB_STRING_KEY("paths.model", model),
      WZB_STRING_KEY("paths.train_dir", train_dir),
      WZB_STRING_KEY("paths.labels", labels),
  };
  return keys;
}

#undef WZB_STRING_KEY

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string suggest(std::string_view key) {
  std::string best;
  std::size_t best_d = 3;  // only close matches are worth suggesting
  for (const KeySpec& spec : registry()) {
    const std::string_view full = spec.key;
    const std::string_view leaf = full.substr(full.rfind('.') + 1);
    const std::size_t d = std::min(edit_distance(key, full), edit_distance(key, leaf));
    if (d < best_d) {
      best_d = d;
      best = std::string(full);
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(SynthScenario s) {
  switch (s) {
    case SynthScenario::WorkZone: return "work_zone";
    case SynthScenario::Uniform: return "uniform";
    case SynthScenario::Training: return "training";
    case SynthScenario::Script: return "script";
  }
  return "?";
}

std::string format_diagnostic(const Diagnostic& d) {
  return d.key + "=" + d.value + ": " + d.rule;
}

std::optional<Diagnostic> set_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  const auto& keys = registry();
  const auto it = std::find_if(keys.begin(), keys.end(), [&](const KeySpec& s) { return s.key == key; });
  if (it == keys.end()) {
    std::string rule = "unknown key";
    const std::string hint = suggest(key);
    if (!hint.empty()) rule += "; did you mean '" + hint + "'?";
    return Diagnostic{std::string(key), std::string(value), rule};
  }
  try {
    it->set(cfg, value);
  } catch (const BadValue& e) {
    return Diagnostic{std::string(key), std::string(value), e.what()};
  }
  return std::nullopt;
}

std::vector<Diagnostic> check_config(const PipelineConfig& cfg) {
  std::vector<Diagnostic> out;
  const auto& det = cfg.classify.detector;
  if (det.frame.hop > det.frame.frame_len) {
    out.push_back({"segment.hop", std::to_string(det.frame.hop), "EnergyFrameConfig: hop must be <= frame_len"});
  }
  if (cfg.kde.radius < cfg.kde.cell_size) {
    out.push_back({"kde.radius", io::format_double(cfg.kde.radius), "KdeConfig: radius must be >= cell_size"});
  }
  if (cfg.accel_hz < cfg.gps_hz) {
    out.push_back({"ingest.gps_hz", io::format_double(cfg.gps_hz), "gps_hz must not exceed accel_hz"});
  }
  if (cfg.synth.scenario == SynthScenario::Script && cfg.synth.script.empty()) {
    out.push_back({"synth.script", "", "script scenario needs a non-empty synth.script"});
  }
  if (!is_rule_label(cfg.calibration_label) && !is_poi_label(cfg.calibration_label)) {
    out.push_back({"kde.calibration_label", std::string(to_string(cfg.calibration_label)), "not a behaviour"});
  }
  return out;
}

std::vector<Diagnostic> apply_config_text(PipelineConfig& cfg, std::string_view text) {
  std::vector<Diagnostic> out;
  std::size_t line_no = 0;
  for (std::string_view raw : io::lines(text)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = io::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      out.push_back({std::string(line), "", "line " + std::to_string(line_no) + " is not key=value"});
      continue;
    }
    if (auto d = set_config_value(cfg, io::trim(line.substr(0, eq)), io::trim(line.substr(eq + 1)))) {
      out.push_back(std::move(*d));
    }
  }
  auto cross = check_config(cfg);
  out.insert(out.end(), cross.begin(), cross.end());
  return out;
}

std::vector<Diagnostic> validate_config(const std::filesystem::path& path) {
  PipelineConfig cfg;
  return apply_config_text(cfg, io::read_file(path));
}

void throw_if_invalid(const std::vector<Diagnostic>& diags) {
  if (diags.empty()) return;
  std::string msg;
  for (const Diagnostic& d : diags) msg += "\n  " + format_diagnostic(d);
  throw Error(ErrorCode::ConfigError, "invalid configuration:" + msg);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  PipelineConfig cfg;
  throw_if_invalid(apply_config_text(cfg, io::read_file(path)));
  return cfg;
}

std::string print_config(const PipelineConfig& cfg) {
  std::string out;
  for (const KeySpec& spec : registry()) out += std::string(spec.key) + "=" + spec.get(cfg) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const KeySpec& spec : registry()) out.emplace_back(spec.key);
  return out;
}

std::vector<ManeuverStep> parse_script(std::string_view text) {
  std::vector<ManeuverStep> steps;
  for (std::string_view item : io::split_csv_line(text)) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
      const auto colon = item.find(':', pos);
      parts.push_back(io::trim(item.substr(pos, colon == std::string_view::npos ? colon : colon - pos)));
      if (colon == std::string_view::npos) break;
      pos = colon + 1;
    }
    if (parts.size() < 2 || parts.size() > 4) {
      throw Error(ErrorCode::InvalidScript, "script step '" + std::string(item) + "' is not label:duration[:accel[:radius]]");
    }
    const auto label = parse_behavior(parts[0]);
    if (!label) throw Error(ErrorCode::InvalidScript, "unknown label '" + std::string(parts[0]) + "'");
    ManeuverStep s;
    s.label = *label;
    s.duration = io::parse_double(parts[1], "duration");
    if (parts.size() > 2) s.accel = io::parse_double(parts[2], "accel");
    if (parts.size() > 3) s.radius = io::parse_double(parts[3], "radius");
    steps.push_back(s);
  }
  return steps;
}

std::string format_script(const std::vector<ManeuverStep>& steps) {
  std::string out;
  for (const ManeuverStep& s : steps) {
    if (!out.empty()) out += ',';
    out += std::string(to_string(s.label)) + ':' + io::format_double(s.duration) + ':' + io::format_double(s.accel) +
           ':' + io::format_double(s.radius);
  }
  return out;
}

std::string format_calibration(const CalibrationRecord& rec) {
  return "calibration.d_ref=" + io::format_double(rec.calibration.d_ref) + "\n" +
         "calibration.placement=" + std::string(to_string(rec.placement)) + "\n" +
         "calibration.cell_size=" + io::format_double(rec.cell_size) + "\n" +
         "calibration.radius=" + io::format_double(rec.radius) + "\n";
}

CalibrationRecord parse_calibration(std::string_view text) {
  CalibrationRecord rec;
  bool have_dref = false;
  for (std::string_view raw : io::lines(text)) {
    const std::string_view line = io::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::ConfigError, "calibration line is not key=value");
    const std::string_view key = io::trim(line.substr(0, eq));
    const std::string_view value = io::trim(line.substr(eq + 1));
    if (key == "calibration.d_ref") {
      rec.calibration.d_ref = io::parse_double(value, key);
      have_dref = true;
    } else if (key == "calibration.placement") {
      const auto p = parse_placement(value);
      if (!p) throw Error(ErrorCode::ConfigError, "bad calibration placement");
      rec.placement = *p;
    } else if (key == "calibration.cell_size") {
      rec.cell_size = io::parse_double(value, key);
    } else if (key == "calibration.radius") {
      rec.radius = io::parse_double(value, key);
    } else {
      throw Error(ErrorCode::ConfigError, "unknown calibration key '" + std::string(key) + "'");
    }
  }
  if (!have_dref || !(rec.calibration.d_ref > 0.0)) {
    throw Error(ErrorCode::ConfigError, "calibration file needs a positive calibration.d_ref");
  }
  return rec;
}

}  // namespace wzb

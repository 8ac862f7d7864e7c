// wzb: work-zone behaviour maps from GPS/accelerometer trajectories.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "wzb/config.hpp"
#include "wzb/error.hpp"
#include "wzb/io.hpp"
#include "wzb/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

int exit_code(wzb::ErrorClass c) {
  switch (c) {
    case wzb::ErrorClass::Config: return kExitConfig;
    case wzb::ErrorClass::Data: return kExitData;
    case wzb::ErrorClass::Internal: return kExitInternal;
  }
  return kExitInternal;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("wzb");
  logger->set_pattern("%^[%l]%$ %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("WZB_LOG_LEVEL"); lvl != nullptr && *lvl != '\0') {
    spdlog::set_level(spdlog::level::from_str(lvl));
  }
}

// Config file plus flag overrides, resolved once the command line is parsed.
struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> flags;

  void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        name, [this, key](const std::string& v) { flags.emplace_back(key, v); }, help);
  }

  wzb::PipelineConfig resolve() const {
    wzb::PipelineConfig cfg = config.empty() ? wzb::PipelineConfig{} : wzb::load_config(config);
    std::vector<wzb::Diagnostic> diags;
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        diags.push_back({s, "", "--set expects key=value"});
        continue;
      }
      if (auto d = wzb::set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1))) diags.push_back(*d);
    }
    for (const auto& [k, v] : flags) {
      if (auto d = wzb::set_config_value(cfg, k, v)) diags.push_back(*d);
    }
    for (auto& d : wzb::check_config(cfg)) diags.push_back(std::move(d));
    wzb::throw_if_invalid(diags);
    return cfg;
  }
};

void common(CLI::App* app, Options& o) {
  app->add_option("-c,--config", o.config, "key=value configuration file")->check(CLI::ExistingFile);
  app->add_option("--set", o.sets, "override one key (key=value), repeatable");
}

void print_outputs(const std::vector<wzb::OutputFile>& outs, const fs::path& dir) {
  for (const auto& f : outs) std::cout << (dir / f.path).string() << '\t' << f.rows << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Work-zone driving behaviour maps from GPS/accelerometer trajectories"};
  app.set_version_flag("--version", std::string(wzb::kToolVersion));
  app.require_subcommand(1);

  // ingest
  Options ingest_o;
  std::string ingest_in, ingest_out;
  bool ingest_xy = false;
  auto* ingest = app.add_subcommand("ingest", "Read, align and validate trajectory CSVs");
  common(ingest, ingest_o);
  ingest->add_option("-i,--input", ingest_in, "CSV file or directory")->required();
  ingest->add_option("-o,--out-dir", ingest_out, "output directory")->required();
  ingest->add_flag("--xy", ingest_xy, "also write local x,y projections");
  ingest_o.flag(ingest, "--ref", "kde.ref", "projection reference lat,lon");
  ingest_o.flag(ingest, "--dual-rate", "ingest.dual_rate", "raw dual-rate input rows (true|false)");

  // synth
  Options synth_o;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate synthetic trajectories with ground truth");
  common(synth, synth_o);
  synth->add_option("-o,--out-dir", synth_out, "output directory")->required();
  synth_o.flag(synth, "--scenario", "synth.scenario", "work_zone|uniform|training|script");
  synth_o.flag(synth, "--vehicles", "synth.vehicles", "number of passes");
  synth_o.flag(synth, "--per-class", "synth.per_class", "periods per class (training)");
  synth_o.flag(synth, "--seed", "synth.seed", "random seed");
  synth_o.flag(synth, "--script", "synth.script", "maneuver script, e.g. LC:30,LD:5:2,LC:25");

  // segment
  Options seg_o;
  std::string seg_in, seg_out;
  auto* segment = app.add_subcommand("segment", "Detect periods of interest on both axes");
  common(segment, seg_o);
  segment->add_option("-i,--input", seg_in, "CSV file or directory")->required();
  segment->add_option("-o,--out", seg_out, "POI CSV (stdout if omitted)");
  seg_o.flag(segment, "--frame-len", "segment.frame_len", "frame length in samples");
  seg_o.flag(segment, "--hop", "segment.hop", "hop in samples");
  seg_o.flag(segment, "--mode", "segment.mode", "adaptive|determinative");
  seg_o.flag(segment, "--t2-frac", "segment.t2_frac", "upper threshold fraction (adaptive)");
  seg_o.flag(segment, "--t1-frac", "segment.t1_frac", "lower threshold as a fraction of the upper");
  seg_o.flag(segment, "--accel-limit", "segment.accel_limit", "acceleration limit, m/s^2 (determinative)");
  seg_o.flag(segment, "--min-poi", "segment.min_poi", "minimum POI length in frames");
  seg_o.flag(segment, "--merge-gap", "segment.merge_gap", "merge POIs separated by fewer frames");
  seg_o.flag(segment, "--adaptive-on-accel", "segment.adaptive_on_accel", "adaptive fractions of max |a|");

  // train
  Options train_o;
  std::string train_in, train_labels, train_model;
  bool train_grid = false;
  auto* train = app.add_subcommand("train", "Train the behaviour SVM on labeled periods");
  common(train, train_o);
  train->add_option("-i,--input", train_in, "training trajectory CSV file or directory")->required();
  train->add_option("-l,--labels", train_labels, "labeled periods CSV")->required();
  train->add_option("-m,--model-out", train_model, "model file")->required();
  train->add_flag("--grid", train_grid, "grid search C and gamma");
  train_o.flag(train, "--svm-c", "svm.c", "penalty C");
  train_o.flag(train, "--gamma", "svm.gamma", "RBF gamma");
  train_o.flag(train, "--folds", "svm.folds", "cross-validation folds");

  // classify
  Options cls_o;
  std::string cls_in, cls_model, cls_out;
  auto* classify = app.add_subcommand("classify", "Segment and classify trajectories into timelines");
  common(classify, cls_o);
  classify->add_option("-i,--input", cls_in, "CSV file or directory")->required();
  classify->add_option("-m,--model", cls_model, "model file")->required()->check(CLI::ExistingFile);
  classify->add_option("-o,--out-dir", cls_out, "output directory")->required();

  // kde
  Options kde_o;
  std::string kde_in, kde_tl, kde_out, kde_model;
  auto* kde = app.add_subcommand("kde", "Behaviour density and percentage rasters");
  common(kde, kde_o);
  kde->add_option("-i,--input", kde_in, "trajectory CSV file or directory")->required();
  kde->add_option("-t,--timelines", kde_tl, "timeline CSV file or directory")->required();
  kde->add_option("-m,--model", kde_model, "model, needed with kde.calibration_dir");
  kde->add_option("-o,--out-dir", kde_out, "output directory")->required();
  kde_o.flag(kde, "--cell-size", "kde.cell_size", "raster cell size, m");
  kde_o.flag(kde, "--radius", "kde.radius", "search radius, m");
  kde_o.flag(kde, "--placement", "kde.placement", "per_second|midpoint");
  kde_o.flag(kde, "--calibration-file", "kde.calibration_file", "calibration.cfg from a reference run");
  kde_o.flag(kde, "--calibration-dir", "kde.calibration_dir", "uniform reference trajectories");
  kde_o.flag(kde, "--legend", "kde.legend", "per|unified");

  // pipeline
  Options pipe_o;
  auto* pipeline = app.add_subcommand("pipeline", "ingest, classify, kde and manifest in one run");
  common(pipeline, pipe_o);
  pipe_o.flag(pipeline, "-i,--input", "paths.input_dir", "trajectory directory");
  pipe_o.flag(pipeline, "-o,--out-dir", "paths.output_dir", "output directory");
  pipe_o.flag(pipeline, "-m,--model", "paths.model", "model file");
  pipe_o.flag(pipeline, "--train-dir", "paths.train_dir", "training trajectories");
  pipe_o.flag(pipeline, "--labels", "paths.labels", "training labels");

  // validate-config
  std::string vc_path;
  auto* validate = app.add_subcommand("validate-config", "Check a configuration file");
  validate->add_option("config", vc_path, "configuration file")->required();

  // print-config
  Options pc_o;
  auto* print = app.add_subcommand("print-config", "Print every key with its effective value");
  common(print, pc_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*ingest) {
      const auto cfg = ingest_o.resolve();
      const auto trajs = wzb::load_trajectories(ingest_in, cfg);
      const wzb::GeoPoint ref = wzb::reference_point(trajs, cfg);
      for (const auto& t : trajs) {
        wzb::io::write_file_atomic(fs::path(ingest_out) / "trajectories" / (t.id + ".csv"), wzb::to_csv(t));
        std::cout << (fs::path(ingest_out) / "trajectories" / (t.id + ".csv")).string() << '\t' << t.size() << '\n';
        if (ingest_xy) {
          const auto xy = wzb::local_project(t, ref);
          wzb::io::write_file_atomic(fs::path(ingest_out) / "xy" / (t.id + ".csv"), wzb::xy_to_csv(xy));
        }
      }
    } else if (*synth) {
      const auto cfg = synth_o.resolve();
      const auto passes = wzb::synthesize(cfg);
      print_outputs(wzb::write_synth(passes, synth_out), synth_out);
    } else if (*segment) {
      const auto cfg = seg_o.resolve();
      const auto csv = wzb::segment_csv(wzb::load_trajectories(seg_in, cfg), cfg);
      if (seg_out.empty()) {
        std::cout << csv;
      } else {
        wzb::io::write_file_atomic(seg_out, csv);
      }
    } else if (*train) {
      auto cfg = train_o.resolve();
      if (train_grid) cfg.svm_grid = true;
      const auto trajs = wzb::load_trajectories(train_in, cfg);
      const auto periods = wzb::parse_labeled_periods(wzb::io::read_file(train_labels));
      const auto result = wzb::train_from(trajs, periods, cfg);
      wzb::save_model(result.model, train_model);
      if (result.grid) {
        std::cout << "c=" << wzb::io::format_double(result.grid->c)
                  << " gamma=" << wzb::io::format_double(result.grid->gamma)
                  << " cv_accuracy=" << wzb::io::format_fixed(result.grid->cv_accuracy, 4) << '\n';
      }
      std::cout << "training_accuracy=" << wzb::io::format_fixed(result.training_accuracy, 4) << '\n';
    } else if (*classify) {
      const auto cfg = cls_o.resolve();
      const auto model = wzb::load_model(cls_model);
      const auto timelines = wzb::classify_all(wzb::load_trajectories(cls_in, cfg), model, cfg);
      print_outputs(wzb::write_timelines(timelines, cls_out), cls_out);
    } else if (*kde) {
      const auto cfg = kde_o.resolve();
      const auto trajs = wzb::load_trajectories(kde_in, cfg);
      const auto timelines = wzb::load_timelines(kde_tl);
      std::optional<wzb::SvmModel> model;
      if (!kde_model.empty()) model = wzb::load_model(kde_model);
      const auto out = wzb::compute_kde(trajs, timelines, model ? &*model : nullptr, cfg);
      print_outputs(wzb::write_kde_outputs(out, kde_out), kde_out);
    } else if (*pipeline) {
      const auto cfg = pipe_o.resolve();
      const auto manifest = wzb::run_pipeline(cfg);
      for (const auto& s : manifest.stages) print_outputs(s.outputs, cfg.output_dir);
    } else if (*validate) {
      const auto diags = wzb::validate_config(vc_path);
      for (const auto& d : diags) std::cout << wzb::format_diagnostic(d) << '\n';
      if (!diags.empty()) return kExitConfig;
      std::cout << "ok\n";
    } else if (*print) {
      std::cout << wzb::print_config(pc_o.resolve());
    }
  } catch (const wzb::Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.error_class());
  } catch (const std::exception& e) {
    spdlog::error("internal: {}", e.what());
    return kExitInternal;
  }
  return kExitOk;
}

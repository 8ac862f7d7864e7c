#include <doctest.h>

#include <filesystem>
#include <string>

#include "wzb/config.hpp"
#include "wzb/error.hpp"
#include "wzb/io.hpp"

using namespace wzb;

#ifndef WZB_SOURCE_DIR
#error "WZB_SOURCE_DIR must point at the source tree"
#endif

TEST_CASE("shipped configs are valid") {
  for (const char* name : {"default.cfg", "work_zone.cfg", "uniform.cfg", "training.cfg"}) {
    const auto diags = validate_config(std::filesystem::path(WZB_SOURCE_DIR) / "config" / name);
    CHECK_MESSAGE(diags.empty(), name);
  }
}

TEST_CASE("the shipped default config is the built-in default") {
  const PipelineConfig from_file = load_config(std::filesystem::path(WZB_SOURCE_DIR) / "config" / "default.cfg");
  CHECK(print_config(from_file) == print_config(PipelineConfig{}));
}

TEST_CASE("printed config reads back to itself") {
  PipelineConfig cfg;
  cfg.kde.radius = 20;
  cfg.synth.script = parse_script("LC:30,LD:5:2,TLC:3:0:40");
  cfg.ref = GeoPoint{31.5, 121.25};
  PipelineConfig back;
  CHECK(apply_config_text(back, print_config(cfg)).empty());
  CHECK(print_config(back) == print_config(cfg));
}

TEST_CASE("diagnostics") {
  PipelineConfig cfg;
  SUBCASE("radius below cell size") {
    const auto d = apply_config_text(cfg, "kde.radius=1\n");
    REQUIRE(d.size() == 1);
    CHECK(d[0].key == "kde.radius");
    CHECK(d[0].rule.find("KdeConfig") != std::string::npos);
  }
  SUBCASE("unknown key with a suggestion") {
    const auto d = apply_config_text(cfg, "framelen=20\n");
    REQUIRE(d.size() == 1);
    CHECK(d[0].key == "framelen");
    CHECK(d[0].rule.find("frame_len") != std::string::npos);
  }
  SUBCASE("bad values") {
    CHECK(apply_config_text(cfg, "segment.mode=sometimes\n").size() == 1);
    CHECK(apply_config_text(cfg, "svm.c=-1\n").size() == 1);
    CHECK(apply_config_text(cfg, "segment.t1_frac=1.5\n").size() == 1);
    CHECK(apply_config_text(cfg, "kde.bounds=1,2,3\n").size() == 1);
    CHECK(apply_config_text(cfg, "not a pair\n").size() == 1);
  }
  SUBCASE("hop longer than the frame") {
    const auto d = apply_config_text(cfg, "segment.frame_len=10\nsegment.hop=11\n");
    REQUIRE(d.size() == 1);
    CHECK(d[0].key == "segment.hop");
  }
  SUBCASE("comments and blanks") {
    CHECK(apply_config_text(cfg, "# comment\n\n  kde.radius = 20  \n").empty());
    CHECK(cfg.kde.radius == 20.0);
  }
  SUBCASE("load_config throws a config error") {
    const auto path = std::filesystem::temp_directory_path() / "wzb_bad.cfg";
    io::write_file_atomic(path, "kde.radius=1\n");
    try {
      load_config(path);
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
      CHECK(e.error_class() == ErrorClass::Config);
    }
    std::filesystem::remove(path);
  }
  SUBCASE("unreadable file") {
    CHECK_THROWS_AS(validate_config("/nonexistent/wzb.cfg"), Error);
  }
}

TEST_CASE("every key is printable and settable") {
  const PipelineConfig cfg;
  const std::string printed = print_config(cfg);
  for (const std::string& key : config_keys()) {
    CHECK(printed.find(key + "=") != std::string::npos);
  }
}

TEST_CASE("calibration records") {
  CalibrationRecord rec;
  rec.calibration.d_ref = 0.0123456789;
  rec.placement = Placement::Midpoint;
  rec.cell_size = 1.5;
  rec.radius = 12;
  const CalibrationRecord back = parse_calibration(format_calibration(rec));
  CHECK(back.calibration.d_ref == rec.calibration.d_ref);
  CHECK(back.placement == Placement::Midpoint);
  CHECK(back.cell_size == 1.5);
  CHECK(back.radius == 12.0);
}

TEST_CASE("maneuver scripts") {
  const auto steps = parse_script("LC:30,LD:5:2,TLC:3:0:40");
  REQUIRE(steps.size() == 3);
  CHECK(steps[1].label == BehaviorLabel::LD);
  CHECK(steps[1].accel == 2.0);
  CHECK(steps[2].radius == 40.0);
  CHECK(parse_script(format_script(steps)).size() == 3);
  CHECK_THROWS_AS(parse_script("LC"), Error);
  CHECK_THROWS_AS(parse_script("XX:3"), Error);
}

TEST_CASE("error classes") {
  CHECK(classify(ErrorCode::ConfigError) == ErrorClass::Config);
  CHECK(classify(ErrorCode::NonMonotonicTime) == ErrorClass::Data);
  CHECK(classify(ErrorCode::SolverNonConvergence) == ErrorClass::Internal);
  const Error e(ErrorCode::EmptyFile, "nothing");
  CHECK(std::string(e.what()) == "EmptyFile: nothing");
  CHECK(e.message() == "nothing");
}

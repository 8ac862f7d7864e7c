#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "wzb/classify.hpp"
#include "wzb/error.hpp"
#include "wzb/synth.hpp"

using namespace wzb;
using fixtures::script;

TEST_CASE("steady cruise") {
  const auto p = generate(script({{BehaviorLabel::LC, 60}}, 20.0), NoiseModel::none());
  CHECK(p.trajectory.size() == 1200);
  for (const auto& s : p.trajectory.samples) {
    CHECK(s.ax == 0.0);
    CHECK(s.ay == 0.0);
    CHECK(s.speed == 20.0);
  }
  REQUIRE(p.truth.segments.size() == 1);
  CHECK(p.truth.segments[0].label == BehaviorLabel::LC);
}

TEST_CASE("constant acceleration reaches v + a t") {
  const auto p = generate(script({{BehaviorLabel::LA, 5, 1.5}}, 10.0), NoiseModel::none());
  CHECK(p.final_state.speed == doctest::Approx(17.5).epsilon(1e-12));
  // Without ramps at the script edges, the travelled distance is v t + a t^2 / 2.
  CHECK(std::hypot(p.final_state.x, p.final_state.y) == doctest::Approx(10.0 * 5 + 0.75 * 25).epsilon(1e-9));
}

TEST_CASE("left turn lateral acceleration is v^2 / r") {
  const auto p = generate(script({{BehaviorLabel::TLC, 8, 0, 50}}, 15.0), NoiseModel::none());
  for (const auto& s : p.trajectory.samples) CHECK(s.ay == doctest::Approx(4.5).epsilon(1e-12));
  const auto r = generate(script({{BehaviorLabel::TRC, 8, 0, 50}}, 15.0), NoiseModel::none());
  for (const auto& s : r.trajectory.samples) CHECK(s.ay == doctest::Approx(-4.5).epsilon(1e-12));
}

TEST_CASE("braking below zero is an error") {
  try {
    generate(script({{BehaviorLabel::LD, 10, 3.0}}, 5.0), NoiseModel::none());
    FAIL("expected SpeedUnderflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpeedUnderflow);
  }
  CHECK_THROWS_AS(generate(script({}, 5.0), NoiseModel::none()), Error);
  CHECK_THROWS_AS(generate(script({{BehaviorLabel::LA, -1, 1}}, 5.0), NoiseModel::none()), Error);
  CHECK_THROWS_AS(generate(script({{BehaviorLabel::LA, 1, 6}}, 5.0), NoiseModel::none()), Error);
  CHECK_THROWS_AS(generate(script({{BehaviorLabel::TLC, 1, 0, 0}}, 5.0), NoiseModel::none()), Error);
}

TEST_CASE("identical seeds give bit-identical traces, distinct seeds differ") {
  const auto s = script({{BehaviorLabel::LC, 5}, {BehaviorLabel::TLA, 4, 1, 40}, {BehaviorLabel::LC, 5}}, 12.0, 42);
  std::vector<ManeuverScript> same(10, s);
  const auto fleet = generate_fleet(same, NoiseModel{});
  for (const auto& p : fleet) CHECK(p.trajectory.samples == fleet[0].trajectory.samples);

  std::vector<ManeuverScript> varied(10, s);
  for (std::size_t i = 0; i < varied.size(); ++i) varied[i].seed = 100 + i;
  const auto noisy = generate_fleet(varied, NoiseModel{});
  for (std::size_t i = 0; i < noisy.size(); ++i)
    for (std::size_t j = i + 1; j < noisy.size(); ++j) CHECK(noisy[i].trajectory.samples != noisy[j].trajectory.samples);
}

TEST_CASE("halving the integration step leaves the path unchanged") {
  const auto s = script({{BehaviorLabel::LC, 3},
                         {BehaviorLabel::TLA, 4, 1.2, 45},
                         {BehaviorLabel::LD, 3, 2.0},
                         {BehaviorLabel::TRC, 5, 0, 80},
                         {BehaviorLabel::LC, 3}},
                        14.0);
  const auto coarse = generate(s, NoiseModel::none(), {20, 1});
  const auto fine = generate(s, NoiseModel::none(), {40, 1});
  const double scale = std::hypot(coarse.final_state.x, coarse.final_state.y);
  CHECK(std::abs(coarse.final_state.x - fine.final_state.x) <= 1e-9 * scale);
  CHECK(std::abs(coarse.final_state.y - fine.final_state.y) <= 1e-9 * scale);
  CHECK(coarse.final_state.speed == doctest::Approx(fine.final_state.speed).epsilon(1e-12));
  for (std::size_t i = 0; i < coarse.trajectory.size(); ++i) {
    CHECK(coarse.trajectory.samples[i].speed ==
          doctest::Approx(fine.trajectory.samples[2 * i].speed).epsilon(1e-9));
  }
}

TEST_CASE("truth timelines follow the script") {
  const auto p = generate(script({{BehaviorLabel::LC, 30}, {BehaviorLabel::LD, 5, 2}, {BehaviorLabel::LC, 25}}, 20.0),
                          NoiseModel::none());
  REQUIRE(p.truth.segments.size() == 3);
  CHECK(p.truth.segments[0].interval == TimeInterval{0, 599});
  CHECK(p.truth.segments[1].interval == TimeInterval{600, 699});
  CHECK(p.truth.segments[2].interval == TimeInterval{700, 1199});
  CHECK(p.truth.segments[1].source == SegmentSource::Svm);
  CHECK_NOTHROW(check_partition(p.truth, p.trajectory.size()));
  // Ramps straddle the boundary: half a second on each side.
  CHECK(p.trajectory.samples[590].ax == 0.0);
  CHECK(p.trajectory.samples[600].ax == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(p.trajectory.samples[610].ax == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("work-zone passes carry the scripted behaviour sequence") {
  const auto passes = generate_fleet(work_zone_scripts(10, 7), NoiseModel{});
  REQUIRE(passes.size() == 10);
  for (const auto& p : passes) {
    std::vector<BehaviorLabel> seq;
    for (const auto& s : p.truth.segments)
      if (s.label != BehaviorLabel::LC) seq.push_back(s.label);
    CHECK(seq == std::vector<BehaviorLabel>{BehaviorLabel::LD, BehaviorLabel::TLC, BehaviorLabel::TRC, BehaviorLabel::LA});
  }
}

TEST_CASE("zero-noise passes are recovered by classification") {
  const std::vector<std::vector<ManeuverStep>> scripts = {
      {{BehaviorLabel::LC, 10}, {BehaviorLabel::LA, 5, 2.0}, {BehaviorLabel::LC, 10}},
      {{BehaviorLabel::LC, 10}, {BehaviorLabel::TRD, 4, 2.0, 40}, {BehaviorLabel::LC, 10}},
      {{BehaviorLabel::LC, 10}, {BehaviorLabel::TLC, 5, 0, 50}, {BehaviorLabel::LC, 10}},
  };
  for (const auto& steps : scripts) {
    const auto p = generate(script(steps, 15.0), NoiseModel::none());
    const auto tl = classify_timeline(p.trajectory, fixtures::small_model());
    CHECK(fixtures::label_agreement(tl, p.truth, p.trajectory.size()) >= 0.95);
  }
}

TEST_CASE("training corpus labels") {
  const auto scripts = training_scripts(3, 9, kPoiBehaviors);
  CHECK(scripts.size() == 24);
  const auto passes = generate_fleet(scripts, NoiseModel{});
  const auto periods = labeled_periods_from_truth(passes);
  CHECK(periods.size() == 24);
  for (const auto& lp : periods) CHECK(is_poi_label(lp.label));
}

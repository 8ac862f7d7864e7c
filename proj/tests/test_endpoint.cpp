#include <doctest.h>

#include <random>
#include <vector>

#include "oracles.hpp"
#include "wzb/endpoint.hpp"
#include "wzb/error.hpp"

using namespace wzb;

TEST_CASE("short-time energy") {
  SUBCASE("zero signal") {
    const std::vector<double> s(100, 0.0);
    for (double e : short_time_energy(s, {}).frames) CHECK(e == 0.0);
  }
  SUBCASE("constant 2 m/s^2 gives 80 per frame") {
    const std::vector<double> s(200, 2.0);
    const EnergySeries e = short_time_energy(s, {20, 10});
    CHECK(e.frames.size() == 19);
    for (double v : e.frames) CHECK(v == 80.0);
  }
  SUBCASE("hand example") {
    const std::vector<double> s = {1, 1, 0, 0};
    CHECK(short_time_energy(s, {2, 2}).frames == std::vector<double>{2.0, 0.0});
  }
  SUBCASE("frame count") {
    for (std::size_t n : {20u, 21u, 29u, 30u, 31u, 257u}) {
      const std::vector<double> s(n, 1.0);
      CHECK(short_time_energy(s, {20, 10}).frames.size() == (n - 20) / 10 + 1);
    }
  }
  SUBCASE("too short") {
    const std::vector<double> s(19, 1.0);
    CHECK_THROWS_AS(short_time_energy(s, {20, 10}), Error);
  }
}

TEST_CASE("scaling the signal by s scales every frame by s^2 exactly") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> s(300);
  for (double& v : s) v = n(rng);
  for (double scale : {2.0, 0.5, 4.0}) {
    std::vector<double> scaled = s;
    for (double& v : scaled) v *= scale;
    const auto a = short_time_energy(s, {}).frames;
    const auto b = short_time_energy(scaled, {}).frames;
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == a[i] * scale * scale);
  }
}

TEST_CASE("thresholds") {
  EnergySeries e;
  e.frames = {10, 100, 20};
  const Thresholds a = adaptive_thresholds(e, 0.30, 0.10);
  CHECK(a.t2 == doctest::Approx(30.0));
  CHECK(a.t1 == doctest::Approx(10.0));
  CHECK(a.mode == ThresholdMode::Adaptive);

  e.frames = {80, 1};
  const Thresholds b = adaptive_thresholds(e, 0.5, 0.5);
  CHECK(b.t1 == 40.0);
  CHECK(b.t2 == 40.0);

  e.frames = {0, 0};
  CHECK_THROWS_AS(adaptive_thresholds(e, 0.3, 0.1), Error);

  const Thresholds d = determinative_threshold(1.25, {20, 10}, 0.25);
  CHECK(d.t2 == 31.25);
  CHECK(d.t1 == 31.25 * 0.25);
  CHECK(determinative_threshold(1.0, {1, 1}, 0.25).t2 == 1.0);
  CHECK(determinative_threshold(1.0, {1, 1}, 1.0).t1 == 1.0);
}

TEST_CASE("bi-threshold detection in frame space") {
  const std::vector<double> e = {0, 0, 5, 50, 60, 8, 0};
  const auto runs = detect_frame_runs(e, {4, 40}, 0, 0);
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].first == 2);
  CHECK(runs[0].last == 5);
  CHECK(runs[0].peak == 60);

  CHECK(detect_frame_runs(std::vector<double>{1, 2, 3}, {4, 40}, 0, 0).empty());

  const std::vector<double> two = {0, 50, 50, 0, 50, 50, 0};
  CHECK(detect_frame_runs(two, {4, 40}, 0, 2).size() == 1);
  CHECK(detect_frame_runs(two, {4, 40}, 0, 1).size() == 2);
  CHECK(detect_frame_runs(two, {4, 40}, 3, 0).empty());
}

TEST_CASE("detection agrees with the brute-force reference on random signals") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(20, 200), wdist(1, 12), gapd(0, 3), mind(0, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = len(rng);
    std::vector<double> s(n);
    for (double& v : s) v = noise(rng);
    for (int b = 0; b < 3; ++b) {
      const std::size_t at = static_cast<std::size_t>(u(rng) * n);
      const std::size_t width = 1 + static_cast<std::size_t>(u(rng) * 30);
      const double amp = 0.5 + 3.0 * u(rng);
      for (std::size_t i = at; i < std::min(n, at + width); ++i) s[i] += amp;
    }
    const std::size_t w = std::min(wdist(rng), n);
    const std::size_t h = 1 + static_cast<std::size_t>(u(rng) * static_cast<double>(w - 1));
    const auto ref_e = oracle::energy(s, w, h);
    const EnergySeries es = short_time_energy(s, {w, h});
    REQUIRE(es.frames.size() == ref_e.size());
    double mx = 0.0;
    for (std::size_t i = 0; i < ref_e.size(); ++i) {
      CHECK(es.frames[i] == doctest::Approx(ref_e[i]).epsilon(1e-12));
      mx = std::max(mx, ref_e[i]);
    }
    const double t2 = mx * (0.1 + 0.8 * u(rng));
    const double t1 = t2 * (0.05 + 0.95 * u(rng));
    const std::size_t gap = gapd(rng), min_len = mind(rng);
    const auto got = detect_frame_runs(es.frames, {t1, t2}, min_len, gap);
    const auto want = oracle::brute_force_runs(es.frames, t1, t2, min_len, gap);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].first == want[i].first);
      CHECK(got[i].last == want[i].last);
      CHECK(got[i].peak == want[i].peak);
    }
  }
}

TEST_CASE("raising t2 never adds POIs, raising t1 never widens one") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(400);
    for (double& v : s) v = noise(rng);
    const auto e = short_time_energy(s, {}).frames;
    const double mx = *std::max_element(e.begin(), e.end());
    std::size_t prev_count = SIZE_MAX;
    for (double f = 0.2; f <= 1.0; f += 0.1) {
      const auto runs = detect_frame_runs(e, {0.1 * mx, f * mx}, 0, 0);
      CHECK(runs.size() <= prev_count);
      prev_count = runs.size();
    }
    const auto loose = detect_frame_runs(e, {0.1 * mx, 0.6 * mx}, 0, 0);
    const auto tight = detect_frame_runs(e, {0.3 * mx, 0.6 * mx}, 0, 0);
    for (const FrameRun& r : tight) {
      bool inside = false;
      for (const FrameRun& l : loose) inside = inside || (l.first <= r.first && r.last <= l.last);
      CHECK(inside);
    }
  }
}

TEST_CASE("POIs are disjoint, sorted and carry peaks above t2") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> noise(0.0, 1.2);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> s(1000);
    for (double& v : s) v = noise(rng);
    const EnergySeries es = short_time_energy(s, {});
    const Thresholds th = determinative_threshold(1.25, es.config, 0.25);
    const auto pois = detect_pois(es, th);
    for (std::size_t i = 0; i < pois.size(); ++i) {
      CHECK(pois[i].peak_energy >= th.t2);
      CHECK(pois[i].interval.start_idx <= pois[i].interval.end_idx);
      CHECK(pois[i].interval.end_idx < s.size());
      if (i > 0) CHECK(pois[i - 1].interval.end_idx < pois[i].interval.start_idx);
    }
  }
}

TEST_CASE("a sustained over-limit stretch is always covered") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> at(0, 900), width(20, 80);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::uniform_real_distribution<double> amp(1.25, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(1000);
    for (double& v : s) v = noise(rng);
    const std::size_t a = at(rng), w = width(rng);
    const double sign = trial % 2 ? 1.0 : -1.0;
    const double level = amp(rng);
    for (std::size_t i = a; i < std::min(s.size(), a + w); ++i) s[i] = sign * level;
    const auto pois = detect_axis(s, Axis::X, DetectorConfig{});
    // Every sample of every full frame held at or above the limit must be inside a POI.
    const EnergyFrameConfig f;
    for (std::size_t start = 0; start + f.frame_len <= s.size(); start += f.hop) {
      bool sustained = true;
      for (std::size_t i = start; i < start + f.frame_len; ++i) sustained = sustained && std::abs(s[i]) >= 1.25;
      if (!sustained) continue;
      for (std::size_t i = start; i < start + f.frame_len; ++i) {
        bool covered = false;
        for (const Poi& p : pois) covered = covered || p.interval.contains(i);
        CHECK(covered);
      }
    }
  }
}

TEST_CASE("silent axes produce no POIs") {
  const std::vector<double> s(300, 0.0);
  DetectorConfig cfg;
  cfg.mode = ThresholdMode::Adaptive;
  CHECK(detect_axis(s, Axis::Y, cfg).empty());
}

TEST_CASE("moving average") {
  const std::vector<double> s = {0, 0, 5, 0, 0};
  const auto m = moving_average(s, 5);
  CHECK(m[2] == 1.0);
  CHECK(m[0] == doctest::Approx(5.0 / 3.0));
  CHECK(moving_average(s, 1) == s);
}

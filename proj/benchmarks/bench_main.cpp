#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "wzb/classify.hpp"
#include "wzb/endpoint.hpp"
#include "wzb/kde.hpp"
#include "wzb/svm.hpp"
#include "wzb/synth.hpp"

using namespace wzb;

namespace {

std::vector<double> burst_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = noise(rng) + ((i / 400) % 2 == 1 && i % 400 < 80 ? 2.0 : 0.0);
  return s;
}

std::vector<TrainingExample> corpus(std::size_t per_class) {
  const auto passes = generate_fleet(training_scripts(per_class, 11, kPoiBehaviors), NoiseModel{});
  std::vector<Trajectory> trajs;
  for (const auto& p : passes) trajs.push_back(p.trajectory);
  return build_training_set(trajs, labeled_periods_from_truth(passes, kLabelSlackSeconds));
}

}  // namespace

static void BM_EnergyDetection(benchmark::State& state) {
  const auto s = burst_signal(static_cast<std::size_t>(state.range(0)), 1);
  const DetectorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(detect_axis(s, Axis::X, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EnergyDetection)->Arg(1200)->Arg(72000)->Arg(1440000);

static void BM_SvmTrain(benchmark::State& state) {
  const auto data = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(train_svm(data, 1.0, 4.0));
}
BENCHMARK(BM_SvmTrain)->Arg(10)->Arg(40)->Arg(160)->Unit(benchmark::kMillisecond);

static void BM_SvmPredict(benchmark::State& state) {
  const auto data = corpus(40);
  const SvmModel model = train_svm(data, 1.0, 4.0);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(data[i++ % data.size()].features));
}
BENCHMARK(BM_SvmPredict);

static void BM_Kde(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2000.0);
  std::vector<BehaviorPoint> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) {
    p.x = u(rng);
    p.y = u(rng) / 10.0;
  }
  KdeConfig cfg;
  cfg.radius = static_cast<double>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kde(pts, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Kde)->Args({1000, 15})->Args({10000, 15})->Args({10000, 50})->Unit(benchmark::kMillisecond);

static void BM_ClassifyTimeline(benchmark::State& state) {
  const SvmModel model = train_svm(corpus(20), 1.0, 4.0);
  const auto pass = generate_fleet(work_zone_scripts(1, 7), NoiseModel{});
  for (auto _ : state) benchmark::DoNotOptimize(classify_timeline(pass[0].trajectory, model));
}
BENCHMARK(BM_ClassifyTimeline)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();

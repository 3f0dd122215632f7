#include <benchmark/benchmark.h>

#include "hyper/config.hpp"
#include "hyper/labeling.hpp"
#include "hyper/model.hpp"
#include "hyper/nn.hpp"
#include "hyper/rng.hpp"
#include "hyper/selection.hpp"
#include "hyper/synthetic.hpp"
#include "hyper/trainer.hpp"

namespace {

using namespace hyper;

const SceneRecord& scene() {
  static const auto records = generate_synthetic(1, 7, default_mix());
  return records.front();
}

SampleSet random_set(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  SampleSet set;
  for (std::size_t i = 0; i < m; ++i) {
    HybridSequence s;
    for (int t = 0; t < 30; ++t) {
      s.steps.push_back({modes::kFastForward, Vec2(t + standard_normal(rng), standard_normal(rng) * t * 0.3)});
    }
    s.log_likelihood = -60.0 + standard_normal(rng);
    set.sequences.push_back(std::move(s));
    set.generation_order.push_back(i);
  }
  return set;
}

void fps_select(benchmark::State& state) {
  const auto set = random_set(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(select_fps(set, 6));
}
BENCHMARK(fps_select)->Arg(6)->Arg(50)->Arg(200);

void nms_select(benchmark::State& state) {
  const auto set = random_set(static_cast<std::size_t>(state.range(0)), 3);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(select_nms(set, 6, 2.0, rng));
}
BENCHMARK(nms_select)->Arg(50);

void auto_label_trajectory(benchmark::State& state) {
  std::vector<Vec2> traj = scene().observed;
  traj.insert(traj.end(), scene().future.begin(), scene().future.end());
  const LabelThresholds thresholds;
  for (auto _ : state) benchmark::DoNotOptimize(auto_label(traj, thresholds));
}
BENCHMARK(auto_label_trajectory);

void single_rollout(benchmark::State& state) {
  const PhaModel model(ModelConfig{}, 1);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(rollout(scene(), model, rng, {}));
}
BENCHMARK(single_rollout);

void generate_fifty(benchmark::State& state) {
  const PhaModel model(ModelConfig{}, 1);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(generate_samples(scene(), model, rng, 50));
}
BENCHMARK(generate_fifty)->Unit(benchmark::kMillisecond);

void training_example(benchmark::State& state) {
  PhaModel model(ModelConfig{}, 1);
  Rng rng(2);
  for (auto _ : state) {
    model.parameters().zero_grad();
    benchmark::DoNotOptimize(accumulate_gradients(scene(), model, rng, true));
  }
}
BENCHMARK(training_example)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <vector>

#include <benchmark/benchmark.h>

#include "inspect/conv_denoiser.hpp"
#include "inspect/rng.hpp"
#include "inspect/schedule.hpp"
#include "inspect/training.hpp"

namespace {

std::vector<inspect::PixelField> random_images(int count, int size) {
  inspect::Rng rng = inspect::Rng::derive(2, "bench/images");
  std::vector<inspect::PixelField> out;
  for (int i = 0; i < count; ++i) {
    inspect::PixelField img(inspect::Shape{1, size, size});
    for (double& v : img.values()) v = rng.uniform();
    out.push_back(std::move(img));
  }
  return out;
}

void BM_TrainStep(benchmark::State& state) {
  const auto images = random_images(64, 32);
  const auto set = inspect::TrainingSet::build(images, {}, inspect::StatsScope::Global);
  const auto sched = inspect::cosine_schedule(1000);
  inspect::TrainConfig cfg;
  cfg.batch_size = static_cast<int>(state.range(0));
  cfg.objective = state.range(1) ? inspect::Objective::Ddpm : inspect::Objective::Inspect;
  auto net = inspect::ConvDenoiser::initialised(inspect::ConvDenoiserConfig{}, 3);
  std::vector<inspect::TrainExample> batch;
  for (int i = 0; i < cfg.batch_size; ++i) batch.push_back({&set.samples[i], &set.stats[0]});
  inspect::Rng rng = inspect::Rng::derive(4, "bench/train");
  for (auto _ : state) {
    benchmark::DoNotOptimize(inspect::train_step(net, batch, sched, rng, cfg));
  }
  state.SetItemsProcessed(state.iterations() * cfg.batch_size);
}
BENCHMARK(BM_TrainStep)
    ->ArgNames({"batch", "ddpm"})
    ->Args({1, 0})
    ->Args({8, 0})
    ->Args({8, 1})
    ->Unit(benchmark::kMillisecond);

void BM_DenoiserForward(benchmark::State& state) {
  inspect::ConvDenoiserConfig cfg;
  cfg.hidden = static_cast<int>(state.range(0));
  const auto net = inspect::ConvDenoiser::initialised(cfg, 5);
  const auto img = random_images(1, 32).front();
  for (auto _ : state) benchmark::DoNotOptimize(net.predict(img, 500, 1000));
}
BENCHMARK(BM_DenoiserForward)->ArgName("hidden")->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMicrosecond);

}  // namespace

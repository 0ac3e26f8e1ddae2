#include <benchmark/benchmark.h>

#include "inspect/conv_denoiser.hpp"
#include "inspect/diffusion.hpp"
#include "inspect/rng.hpp"
#include "inspect/schedule.hpp"
#include "inspect/stats.hpp"

namespace {

inspect::ClassStats random_stats(const inspect::Shape& shape) {
  inspect::Rng rng = inspect::Rng::derive(6, "bench/stats");
  inspect::ClassStats st;
  st.shape = shape;
  st.count = 100;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    st.mean.push_back(0.01 * rng.normal());
    st.var.push_back(1e-4 * rng.uniform());
  }
  return st;
}

void BM_SampleTrajectory(benchmark::State& state) {
  const inspect::Shape shape{1, 32, 32};
  const auto stats = random_stats(shape);
  const auto sched = inspect::cosine_schedule(static_cast<int>(state.range(0)));
  inspect::ConvDenoiserConfig cfg;
  cfg.shape = shape;
  const auto net = inspect::ConvDenoiser::initialised(cfg, 7);
  std::uint64_t i = 0;
  for (auto _ : state) {
    inspect::Rng rng = inspect::Rng::derive(8, "bench/sample", i++);
    benchmark::DoNotOptimize(inspect::sample(net, stats, sched, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleTrajectory)->ArgName("T")->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_DdpmSampleTrajectory(benchmark::State& state) {
  const inspect::Shape shape{1, 32, 32};
  const auto sched = inspect::cosine_schedule(static_cast<int>(state.range(0)));
  inspect::ConvDenoiserConfig cfg;
  cfg.shape = shape;
  const auto net = inspect::ConvDenoiser::initialised(cfg, 7);
  std::uint64_t i = 0;
  for (auto _ : state) {
    inspect::Rng rng = inspect::Rng::derive(9, "bench/ddpm", i++);
    benchmark::DoNotOptimize(inspect::ddpm_sample(net, shape, sched, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DdpmSampleTrajectory)->ArgName("T")->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ForwardClosed(benchmark::State& state) {
  const inspect::Shape shape{1, 32, 32};
  const auto stats = random_stats(shape);
  const auto sched = inspect::cosine_schedule(1000);
  const inspect::SpectralField x0(shape, stats.mean);
  inspect::Rng rng = inspect::Rng::derive(10, "bench/forward");
  for (auto _ : state) benchmark::DoNotOptimize(inspect::forward_closed(x0, 500, stats, sched, rng));
}
BENCHMARK(BM_ForwardClosed)->Unit(benchmark::kMicrosecond);

}  // namespace

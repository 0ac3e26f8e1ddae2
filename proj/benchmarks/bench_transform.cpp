#include <benchmark/benchmark.h>

#include "inspect/rng.hpp"
#include "inspect/spectral.hpp"

namespace {

inspect::PixelField random_image(int size) {
  inspect::Rng rng = inspect::Rng::derive(1, "bench/image");
  inspect::PixelField img(inspect::Shape{1, size, size});
  for (double& v : img.values()) v = rng.uniform();
  return img;
}

void BM_ToSpectral(benchmark::State& state) {
  const auto img = random_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(inspect::to_spectral(img));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ToSpectral)->Arg(16)->Arg(32)->Arg(64)->Arg(128);

void BM_ToPixel(benchmark::State& state) {
  const auto spec = inspect::to_spectral(random_image(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(inspect::to_pixel(spec));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ToPixel)->Arg(16)->Arg(32)->Arg(64)->Arg(128);

void BM_SpectralAdjoint(benchmark::State& state) {
  const auto spec = inspect::to_spectral(random_image(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(inspect::spectral_adjoint(spec));
}
BENCHMARK(BM_SpectralAdjoint)->Arg(32);

void BM_RadialProfile(benchmark::State& state) {
  const auto spec = inspect::to_spectral(random_image(64));
  for (auto _ : state) benchmark::DoNotOptimize(inspect::radial_profile(spec, 32));
}
BENCHMARK(BM_RadialProfile);

}  // namespace

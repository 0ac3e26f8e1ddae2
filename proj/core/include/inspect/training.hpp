#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inspect/conv_denoiser.hpp"
#include "inspect/field.hpp"
#include "inspect/rng.hpp"
#include "inspect/schedule.hpp"
#include "inspect/stats.hpp"

namespace inspect {

inline constexpr double kDefaultVarianceFloor = 1e-3;

/// Frequency-weighted loss: mean over components (and channels) of
/// (pred - target)^2 / max(var_k, floor).
double weighted_loss(const SpectralField& pred, const SpectralField& target,
                     const ClassStats& stats, double floor = kDefaultVarianceFloor);

/// d weighted_loss / d pred.
SpectralField weighted_loss_gradient(const SpectralField& pred, const SpectralField& target,
                                     const ClassStats& stats,
                                     double floor = kDefaultVarianceFloor);

enum class StatsScope { Global, PerClass };
/// Which diffusion the denoiser is trained for. Ddpm noises in pixel space
/// towards N(0, I) and uses the unweighted pixel MSE (baseline).
enum class Objective { Inspect, Ddpm };

struct TrainConfig {
  int iterations = 2000;
  int batch_size = 8;
  double learning_rate = 0.05;
  double variance_floor = kDefaultVarianceFloor;
  std::uint64_t seed = 0;
  StatsScope scope = StatsScope::Global;
  Objective objective = Objective::Inspect;
  int threads = 1;
};

/// Clean spectra plus the statistics each one is noised with.
struct TrainingSet {
  std::vector<SpectralField> samples;
  std::vector<std::size_t> stats_index;  ///< per sample, into `stats`
  std::vector<ClassStats> stats;

  /// Fits global or per-label stats; labels may be empty for Global.
  static TrainingSet build(std::span<const PixelField> images, std::span<const int> labels,
                           StatsScope scope);
};

struct TrainExample {
  const SpectralField* x0 = nullptr;
  const ClassStats* stats = nullptr;
};

/// One gradient-descent update on a batch. For each example draws
/// t ~ U{1..T}, noises with the closed-form forward law, predicts x̂_0
/// through the pixel-space denoiser and evaluates the weighted loss.
/// Returns the mean pre-update loss. Throws NonFiniteError on NaN/inf loss.
double train_step(TrainableDenoiser& denoiser, std::span<const TrainExample> batch,
                  const NoiseSchedule& schedule, Rng& rng, const TrainConfig& config);

struct TrainResult {
  std::vector<double> history;  ///< loss per iteration, from start_iteration on
};

using CheckpointFn = std::function<void(int iteration, const TrainableDenoiser& denoiser,
                                        const std::vector<double>& history)>;

/// Runs iterations [start_iteration, config.iterations). Iteration i draws
/// its batch and noise from Rng::derive(seed, "train", i), so a run resumed
/// from a checkpoint continues bitwise identically.
TrainResult train_loop(const TrainConfig& config, const TrainingSet& data,
                       const NoiseSchedule& schedule, TrainableDenoiser& denoiser,
                       int start_iteration = 0, const CheckpointFn& on_checkpoint = {},
                       int checkpoint_every = 0);

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

/// Compares analytic gradients of the weighted loss against central
/// differences with step `h` on `count` randomly chosen parameters (all of
/// them if count >= the parameter count). Parameters are restored on return.
GradientCheckReport gradient_check(TrainableDenoiser& denoiser, const SpectralField& probe,
                                   const ClassStats& stats, int t,
                                   const NoiseSchedule& schedule, std::uint64_t seed,
                                   std::size_t count = 100, double h = 1e-5,
                                   double floor = kDefaultVarianceFloor);

}  // namespace inspect

#pragma once

#include <cstdint>
#include <vector>

#include "inspect/denoiser.hpp"
#include "inspect/field.hpp"
#include "inspect/rng.hpp"
#include "inspect/schedule.hpp"
#include "inspect/stats.hpp"

namespace inspect {

/// Spectral latent x̂_t at timestep t.
struct DiffusionState {
  SpectralField x;
  int t = 0;
};

/// Backward Gaussian N(mean, beta_hat * Sigma).
struct PosteriorParams {
  SpectralField mean;
  double beta_hat = 0.0;
};

// Feature-preserving chain. Every draw consumes one standard normal per
// component in storage order, including zero-variance components (which
// receive exactly zero noise), so noise streams line up across processes.

/// x̂_{t+1} = mu + sqrt(alpha)(x̂_t - mu) + N(0, (1 - alpha) Sigma).
DiffusionState forward_step(const DiffusionState& state, const ClassStats& stats,
                            const NoiseSchedule& schedule, Rng& rng);

/// Sample of N(sqrt(abar_t) x̂_0 + (1 - sqrt(abar_t)) mu, (1 - abar_t) Sigma).
DiffusionState forward_closed(const SpectralField& x0, int t, const ClassStats& stats,
                              const NoiseSchedule& schedule, Rng& rng);

/// Draw from N(mu, Sigma) labelled t = T.
DiffusionState terminal_sample(const ClassStats& stats, const NoiseSchedule& schedule,
                               Rng& rng);

PosteriorParams posterior_params(const SpectralField& xt, const SpectralField& x0, int t,
                                 const ClassStats& stats, const NoiseSchedule& schedule);

/// x̂_{t-1} = posterior mean (with the x̂_0 prediction) + N(0, beta_hat Sigma).
SpectralField backward_step(const SpectralField& xt, const SpectralField& x0_pred, int t,
                            const ClassStats& stats, const NoiseSchedule& schedule,
                            Rng& rng);

struct TrajectoryFrame {
  int t = 0;
  SpectralField state;
};

struct SampleOptions {
  bool record_trajectory = false;
  int max_frames = 32;
};

struct SampleResult {
  PixelField image;          ///< inverse transform of the last x̂_0 prediction
  SpectralField chain_end;   ///< x̂_0 reached by the chain itself
  std::vector<TrajectoryFrame> frames;
};

/// Full sampling loop: start at N(mu, Sigma), then for t = T..1 predict
/// x̂_0 through the pixel-space denoiser and take a backward step.
/// Throws ShapeError if the denoiser changes the shape.
SampleResult sample(const Denoiser& denoiser, const ClassStats& stats,
                    const NoiseSchedule& schedule, Rng& rng,
                    const SampleOptions& options = {});

/// Independent trajectories; trajectory i uses Rng::derive(seed, "sample", i).
std::vector<SampleResult> sample_batch(const Denoiser& denoiser, const ClassStats& stats,
                                       const NoiseSchedule& schedule, std::uint64_t seed,
                                       int count, int threads,
                                       const SampleOptions& options = {});

// DDPM baseline in pixel space (mu = 0, Sigma = I).

PixelField ddpm_forward_step(const PixelField& x, int t_next, const NoiseSchedule& schedule,
                             Rng& rng);
PixelField ddpm_forward_closed(const PixelField& x0, int t, const NoiseSchedule& schedule,
                               Rng& rng);
PixelField ddpm_backward_step(const PixelField& xt, const PixelField& x0_pred, int t,
                              const NoiseSchedule& schedule, Rng& rng);
/// Inverts x_t = sqrt(abar) x0 + sqrt(1 - abar) eps for x0.
PixelField ddpm_x0_from_eps(const PixelField& xt, const PixelField& eps, int t,
                            const NoiseSchedule& schedule);

struct PixelSampleResult {
  PixelField image;
  PixelField chain_end;
  std::vector<int> frame_steps;
  std::vector<PixelField> frames;
};

PixelSampleResult ddpm_sample(const Denoiser& denoiser, const Shape& shape,
                              const NoiseSchedule& schedule, Rng& rng,
                              const SampleOptions& options = {});

std::vector<PixelSampleResult> ddpm_sample_batch(const Denoiser& denoiser, const Shape& shape,
                                                 const NoiseSchedule& schedule,
                                                 std::uint64_t seed, int count, int threads,
                                                 const SampleOptions& options = {});

/// Timesteps recorded by a trajectory: T, ..., 0 decimated to max_frames.
std::vector<int> trajectory_steps(int steps, int max_frames);

}  // namespace inspect

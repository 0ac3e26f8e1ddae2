#include "inspect/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "inspect/parallel.hpp"
#include "inspect/spectral.hpp"

namespace inspect {

namespace {

void require_compatible(const SpectralField& x, const ClassStats& stats, const char* what) {
  require_same(x.shape(), stats.shape, what);
}

}  // namespace

DiffusionState forward_step(const DiffusionState& state, const ClassStats& stats,
                            const NoiseSchedule& schedule, Rng& rng) {
  if (state.t < 0 || state.t >= schedule.steps()) {
    throw DomainError("forward_step: state at t = " + std::to_string(state.t) +
                      " cannot advance past T = " + std::to_string(schedule.steps()));
  }
  require_compatible(state.x, stats, "forward_step");
  const double alpha = schedule.alpha(state.t + 1);
  const double sqrt_alpha = std::sqrt(alpha);
  const double noise_scale = 1.0 - alpha;

  DiffusionState next{SpectralField(state.x.shape()), state.t + 1};
  for (std::size_t k = 0; k < next.x.size(); ++k) {
    const double z = rng.normal();
    const double mu = stats.mean[k];
    // Centred form keeps a component sitting at its mean exactly there.
    next.x[k] = mu + sqrt_alpha * (state.x[k] - mu) + std::sqrt(noise_scale * stats.var[k]) * z;
  }
  return next;
}

DiffusionState forward_closed(const SpectralField& x0, int t, const ClassStats& stats,
                              const NoiseSchedule& schedule, Rng& rng) {
  require_compatible(x0, stats, "forward_closed");
  const double bar = schedule.alpha_bar(t);
  if (t == 0) return {x0, 0};
  const double sqrt_bar = std::sqrt(bar);
  const double noise_scale = 1.0 - bar;
  DiffusionState out{SpectralField(x0.shape()), t};
  for (std::size_t k = 0; k < x0.size(); ++k) {
    const double z = rng.normal();
    const double mu = stats.mean[k];
    out.x[k] = mu + sqrt_bar * (x0[k] - mu) + std::sqrt(noise_scale * stats.var[k]) * z;
  }
  return out;
}

DiffusionState terminal_sample(const ClassStats& stats, const NoiseSchedule& schedule,
                               Rng& rng) {
  DiffusionState out{SpectralField(stats.shape), schedule.steps()};
  for (std::size_t k = 0; k < out.x.size(); ++k) {
    const double z = rng.normal();
    out.x[k] = stats.mean[k] + std::sqrt(stats.var[k]) * z;
  }
  return out;
}

PosteriorParams posterior_params(const SpectralField& xt, const SpectralField& x0, int t,
                                 const ClassStats& stats, const NoiseSchedule& schedule) {
  require_compatible(xt, stats, "posterior_params");
  require_same(xt.shape(), x0.shape(), "posterior_params");
  const PosteriorCoeffs k = posterior_coeffs(schedule, t);
  PosteriorParams out{SpectralField(xt.shape()), k.beta_hat};
  // a + b + gamma = 1, so a*x_t + b*x_0 + gamma*mu == mu + a(x_t - mu) + b(x_0 - mu).
  for (std::size_t i = 0; i < xt.size(); ++i) {
    const double mu = stats.mean[i];
    out.mean[i] = mu + k.a * (xt[i] - mu) + k.b * (x0[i] - mu);
  }
  return out;
}

SpectralField backward_step(const SpectralField& xt, const SpectralField& x0_pred, int t,
                            const ClassStats& stats, const NoiseSchedule& schedule,
                            Rng& rng) {
  PosteriorParams post = posterior_params(xt, x0_pred, t, stats, schedule);
  for (std::size_t i = 0; i < post.mean.size(); ++i) {
    const double z = rng.normal();
    post.mean[i] += std::sqrt(post.beta_hat * stats.var[i]) * z;
  }
  return std::move(post.mean);
}

std::vector<int> trajectory_steps(int steps, int max_frames) {
  std::set<int, std::greater<>> picked;
  const int frames = std::clamp(max_frames, 2, steps + 1);
  for (int i = 0; i < frames; ++i) {
    const double frac = static_cast<double>(i) / (frames - 1);
    picked.insert(static_cast<int>(std::lround(steps * (1.0 - frac))));
  }
  return {picked.begin(), picked.end()};
}

namespace {

SpectralField predict_x0(const Denoiser& denoiser, const SpectralField& xt, int t,
                         int steps) {
  const PixelField noisy = to_pixel(xt);
  const PixelField pred = denoiser.predict(noisy, t, steps);
  if (pred.shape() != noisy.shape()) {
    throw ShapeError("denoiser returned shape " + pred.shape().str() + " for input " +
                     noisy.shape().str() + " at t = " + std::to_string(t));
  }
  return to_spectral(pred);
}

}  // namespace

SampleResult sample(const Denoiser& denoiser, const ClassStats& stats,
                    const NoiseSchedule& schedule, Rng& rng, const SampleOptions& options) {
  const int steps = schedule.steps();
  std::vector<int> keep;
  if (options.record_trajectory) keep = trajectory_steps(steps, options.max_frames);
  auto wanted = [&](int t) { return std::find(keep.begin(), keep.end(), t) != keep.end(); };

  SampleResult result;
  SpectralField x = terminal_sample(stats, schedule, rng).x;
  SpectralField x0_pred;
  for (int t = steps; t >= 1; --t) {
    if (wanted(t)) result.frames.push_back({t, x});
    x0_pred = predict_x0(denoiser, x, t, steps);
    x = backward_step(x, x0_pred, t, stats, schedule, rng);
  }
  if (wanted(0)) result.frames.push_back({0, x});
  result.image = to_pixel(x0_pred);
  result.chain_end = std::move(x);
  return result;
}

std::vector<SampleResult> sample_batch(const Denoiser& denoiser, const ClassStats& stats,
                                       const NoiseSchedule& schedule, std::uint64_t seed,
                                       int count, int threads, const SampleOptions& options) {
  std::vector<SampleResult> out(static_cast<std::size_t>(std::max(0, count)));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    Rng rng = Rng::derive(seed, "sample", i);
    out[i] = sample(denoiser, stats, schedule, rng, options);
  });
  return out;
}

PixelField ddpm_forward_step(const PixelField& x, int t_next, const NoiseSchedule& schedule,
                             Rng& rng) {
  const double alpha = schedule.alpha(t_next);
  const double sqrt_alpha = std::sqrt(alpha);
  const double scale = std::sqrt(1.0 - alpha);
  PixelField out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = rng.normal();
    out[i] = sqrt_alpha * x[i] + scale * z;
  }
  return out;
}

PixelField ddpm_forward_closed(const PixelField& x0, int t, const NoiseSchedule& schedule,
                               Rng& rng) {
  const double bar = schedule.alpha_bar(t);
  if (t == 0) return x0;
  const double sqrt_bar = std::sqrt(bar);
  const double scale = std::sqrt(1.0 - bar);
  PixelField out(x0.shape());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const double z = rng.normal();
    out[i] = sqrt_bar * x0[i] + scale * z;
  }
  return out;
}

PixelField ddpm_backward_step(const PixelField& xt, const PixelField& x0_pred, int t,
                              const NoiseSchedule& schedule, Rng& rng) {
  require_same(xt.shape(), x0_pred.shape(), "ddpm_backward_step");
  const PosteriorCoeffs k = ddpm_posterior_coeffs(schedule, t);
  const double scale = std::sqrt(k.beta_hat);
  PixelField out(xt.shape());
  for (std::size_t i = 0; i < xt.size(); ++i) {
    const double z = rng.normal();
    out[i] = k.a * xt[i] + k.b * x0_pred[i] + scale * z;
  }
  return out;
}

PixelField ddpm_x0_from_eps(const PixelField& xt, const PixelField& eps, int t,
                            const NoiseSchedule& schedule) {
  require_same(xt.shape(), eps.shape(), "ddpm_x0_from_eps");
  const double bar = schedule.alpha_bar(t);
  const double sqrt_bar = std::sqrt(bar);
  const double scale = std::sqrt(1.0 - bar);
  PixelField out(xt.shape());
  for (std::size_t i = 0; i < xt.size(); ++i) out[i] = (xt[i] - scale * eps[i]) / sqrt_bar;
  return out;
}

PixelSampleResult ddpm_sample(const Denoiser& denoiser, const Shape& shape,
                              const NoiseSchedule& schedule, Rng& rng,
                              const SampleOptions& options) {
  const int steps = schedule.steps();
  std::vector<int> keep;
  if (options.record_trajectory) keep = trajectory_steps(steps, options.max_frames);
  auto wanted = [&](int t) { return std::find(keep.begin(), keep.end(), t) != keep.end(); };

  PixelSampleResult result;
  PixelField x(shape);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
  PixelField x0_pred;
  for (int t = steps; t >= 1; --t) {
    if (wanted(t)) {
      result.frame_steps.push_back(t);
      result.frames.push_back(x);
    }
    x0_pred = denoiser.predict(x, t, steps);
    if (x0_pred.shape() != shape) {
      throw ShapeError("denoiser returned shape " + x0_pred.shape().str() + " for input " +
                       shape.str());
    }
    x = ddpm_backward_step(x, x0_pred, t, schedule, rng);
  }
  if (wanted(0)) {
    result.frame_steps.push_back(0);
    result.frames.push_back(x);
  }
  result.image = std::move(x0_pred);
  result.chain_end = std::move(x);
  return result;
}

std::vector<PixelSampleResult> ddpm_sample_batch(const Denoiser& denoiser, const Shape& shape,
                                                 const NoiseSchedule& schedule,
                                                 std::uint64_t seed, int count, int threads,
                                                 const SampleOptions& options) {
  std::vector<PixelSampleResult> out(static_cast<std::size_t>(std::max(0, count)));
  parallel_for(out.size(), threads, [&](std::size_t i) {
    Rng rng = Rng::derive(seed, "sample-ddpm", i);
    out[i] = ddpm_sample(denoiser, shape, schedule, rng, options);
  });
  return out;
}

}  // namespace inspect

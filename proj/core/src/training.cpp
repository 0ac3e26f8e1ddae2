#include "inspect/training.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "inspect/diffusion.hpp"
#include "inspect/parallel.hpp"
#include "inspect/spectral.hpp"

namespace inspect {

double weighted_loss(const SpectralField& pred, const SpectralField& target,
                     const ClassStats& stats, double floor) {
  require_same(pred.shape(), target.shape(), "weighted_loss");
  require_same(pred.shape(), stats.shape, "weighted_loss");
  if (!(floor > 0.0)) throw DomainError("weighted_loss: floor must be > 0");
  double acc = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double d = pred[k] - target[k];
    acc += d * d / std::max(stats.var[k], floor);
  }
  return acc / static_cast<double>(pred.size());
}

SpectralField weighted_loss_gradient(const SpectralField& pred, const SpectralField& target,
                                     const ClassStats& stats, double floor) {
  require_same(pred.shape(), target.shape(), "weighted_loss");
  require_same(pred.shape(), stats.shape, "weighted_loss");
  SpectralField g(pred.shape());
  const double scale = 2.0 / static_cast<double>(pred.size());
  for (std::size_t k = 0; k < pred.size(); ++k) {
    g[k] = scale * (pred[k] - target[k]) / std::max(stats.var[k], floor);
  }
  return g;
}

TrainingSet TrainingSet::build(std::span<const PixelField> images, std::span<const int> labels,
                               StatsScope scope) {
  if (images.empty()) throw DomainError("training set is empty");
  if (scope == StatsScope::PerClass && labels.size() != images.size()) {
    throw DomainError("per-class statistics need one label per image");
  }
  TrainingSet set;
  set.samples.reserve(images.size());
  for (const auto& img : images) set.samples.push_back(to_spectral(img));

  if (scope == StatsScope::Global) {
    set.stats.push_back(fit_class_stats(set.samples));
    set.stats_index.assign(set.samples.size(), 0);
    return set;
  }
  std::map<int, StatsAccumulator> shards;
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    shards.try_emplace(labels[i], set.samples[i].shape()).first->second.add(set.samples[i]);
  }
  std::map<int, std::size_t> slot;
  for (const auto& [label, acc] : shards) {
    slot[label] = set.stats.size();
    set.stats.push_back(acc.finish(std::to_string(label)));
  }
  set.stats_index.reserve(labels.size());
  for (int label : labels) set.stats_index.push_back(slot.at(label));
  return set;
}

namespace {

struct ExampleResult {
  double loss = 0.0;
  std::vector<double> grad;
};

ExampleResult example_loss_and_grad(const TrainableDenoiser& denoiser, const TrainExample& ex,
                                    int t, Rng& rng, const NoiseSchedule& schedule,
                                    const TrainConfig& config, std::size_t n_params) {
  ExampleResult r;
  r.grad.assign(n_params, 0.0);
  const int steps = schedule.steps();
  if (config.objective == Objective::Inspect) {
    const DiffusionState noisy = forward_closed(*ex.x0, t, *ex.stats, schedule, rng);
    const auto pass = denoiser.forward(to_pixel(noisy.x), t, steps);
    const SpectralField pred = to_spectral(pass.output);
    r.loss = weighted_loss(pred, *ex.x0, *ex.stats, config.variance_floor);
    const SpectralField g =
        weighted_loss_gradient(pred, *ex.x0, *ex.stats, config.variance_floor);
    denoiser.backward(pass, spectral_adjoint(g), r.grad);
  } else {
    const PixelField x0 = to_pixel(*ex.x0);
    const PixelField noisy = ddpm_forward_closed(x0, t, schedule, rng);
    const auto pass = denoiser.forward(noisy, t, steps);
    PixelField g(x0.shape());
    const double n = static_cast<double>(x0.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < x0.size(); ++i) {
      const double d = pass.output[i] - x0[i];
      acc += d * d;
      g[i] = 2.0 * d / n;
    }
    r.loss = acc / n;
    denoiser.backward(pass, g, r.grad);
  }
  return r;
}

}  // namespace

double train_step(TrainableDenoiser& denoiser, std::span<const TrainExample> batch,
                  const NoiseSchedule& schedule, Rng& rng, const TrainConfig& config) {
  if (batch.empty()) throw DomainError("train_step: empty batch");
  const std::size_t n_params = denoiser.parameters().size();

  // Draw all randomness up front so per-example work can run in any order.
  std::vector<int> ts(batch.size());
  std::vector<std::uint64_t> noise_keys(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ts[i] = static_cast<int>(rng.uniform_int(1, schedule.steps()));
    noise_keys[i] = rng.next_u64();
  }
  std::vector<ExampleResult> results(batch.size());
  parallel_for(batch.size(), config.threads, [&](std::size_t i) {
    Rng noise(noise_keys[i], i);
    results[i] = example_loss_and_grad(denoiser, batch[i], ts[i], noise, schedule, config,
                                       n_params);
  });

  // Fixed-order reduction.
  double loss = 0.0;
  std::vector<double> grad(n_params, 0.0);
  for (const auto& r : results) {
    loss += r.loss;
    for (std::size_t p = 0; p < n_params; ++p) grad[p] += r.grad[p];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  loss *= inv;
  if (!std::isfinite(loss)) {
    throw NonFiniteError("train_step: non-finite loss (" + std::to_string(loss) + ")");
  }
  auto params = denoiser.parameters();
  for (std::size_t p = 0; p < n_params; ++p) {
    params[p] -= config.learning_rate * (grad[p] * inv);
  }
  return loss;
}

TrainResult train_loop(const TrainConfig& config, const TrainingSet& data,
                       const NoiseSchedule& schedule, TrainableDenoiser& denoiser,
                       int start_iteration, const CheckpointFn& on_checkpoint,
                       int checkpoint_every) {
  if (data.samples.empty()) throw DomainError("train_loop: dataset is empty");
  if (config.batch_size < 1) throw DomainError("train_loop: batch_size must be >= 1");
  TrainResult result;
  std::vector<TrainExample> batch(config.batch_size);
  const auto n = static_cast<std::int64_t>(data.samples.size());
  for (int it = start_iteration; it < config.iterations; ++it) {
    Rng rng = Rng::derive(config.seed, "train", static_cast<std::uint64_t>(it));
    for (auto& ex : batch) {
      const auto idx = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
      ex = {&data.samples[idx], &data.stats[data.stats_index[idx]]};
    }
    result.history.push_back(train_step(denoiser, batch, schedule, rng, config));
    if (on_checkpoint && checkpoint_every > 0 && (it + 1) % checkpoint_every == 0) {
      on_checkpoint(it + 1, denoiser, result.history);
    }
  }
  return result;
}

GradientCheckReport gradient_check(TrainableDenoiser& denoiser, const SpectralField& probe,
                                   const ClassStats& stats, int t,
                                   const NoiseSchedule& schedule, std::uint64_t seed,
                                   std::size_t count, double h, double floor) {
  Rng rng = Rng::derive(seed, "gradient-check");
  const SpectralField noisy = forward_closed(probe, t, stats, schedule, rng).x;
  const PixelField input = to_pixel(noisy);
  const int steps = schedule.steps();

  const auto pass = denoiser.forward(input, t, steps);
  const SpectralField pred = to_spectral(pass.output);
  std::vector<double> grad(denoiser.parameters().size(), 0.0);
  denoiser.backward(pass, spectral_adjoint(weighted_loss_gradient(pred, probe, stats, floor)),
                    grad);

  auto params = denoiser.parameters();
  const auto loss_at = [&] {
    return weighted_loss(to_spectral(denoiser.predict(input, t, steps)), probe, stats, floor);
  };

  GradientCheckReport report;
  const std::size_t n = params.size();
  for (std::size_t c = 0; c < std::min(count, n); ++c) {
    const auto p = count >= n ? c : static_cast<std::size_t>(rng.uniform_int(0, n - 1));
    const double saved = params[p];
    params[p] = saved + h;
    const double up = loss_at();
    params[p] = saved - h;
    const double down = loss_at();
    params[p] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(grad[p]), std::abs(numeric), 1e-10});
    report.max_relative_error =
        std::max(report.max_relative_error, std::abs(grad[p] - numeric) / scale);
    ++report.checked;
  }
  return report;
}

}  // namespace inspect

#include "inspect/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "inspect/errors.hpp"

namespace inspect {

NoiseSchedule::NoiseSchedule(std::vector<double> alphas) : alpha_(std::move(alphas)) {
  if (alpha_.empty()) throw DomainError("noise schedule needs at least one step");
  alpha_bar_.reserve(alpha_.size() + 1);
  alpha_bar_.push_back(1.0);
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    const double a = alpha_[i];
    if (!(a > 0.0 && a <= 1.0)) {
      throw DomainError("alpha_" + std::to_string(i + 1) + " = " + std::to_string(a) +
                        " outside (0, 1]");
    }
    alpha_bar_.push_back(alpha_bar_.back() * a);
  }
}

double NoiseSchedule::alpha(int t) const {
  if (t < 1 || t > steps()) {
    throw DomainError("timestep " + std::to_string(t) + " outside [1, " +
                      std::to_string(steps()) + "]");
  }
  return alpha_[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > steps()) {
    throw DomainError("timestep " + std::to_string(t) + " outside [0, " +
                      std::to_string(steps()) + "]");
  }
  return alpha_bar_[t];
}

NoiseSchedule cosine_schedule(int steps, double terminal_eps) {
  if (steps < 1) throw DomainError("cosine_schedule: T must be >= 1");
  if (!(terminal_eps > 0.0 && terminal_eps < 1.0)) {
    throw DomainError("cosine_schedule: terminal_eps must lie in (0, 1)");
  }
  const auto f = [&](int t) {
    const double u = (static_cast<double>(t) / steps + kCosineOffset) / (1.0 + kCosineOffset);
    const double c = std::cos(u * std::numbers::pi / 2.0);
    return c * c;
  };
  std::vector<double> alphas(steps);
  double prev = 1.0;
  double bar = 1.0;
  for (int t = 1; t <= steps; ++t) {
    const double target = f(t) / f(0);
    alphas[t - 1] = std::clamp(target / prev, kMinAlpha, kMaxAlpha);
    prev = target;
    bar *= alphas[t - 1];
  }
  if (bar > terminal_eps) {
    const double before_last = bar / alphas.back();
    alphas.back() = std::max(kMinAlpha, terminal_eps / before_last);
  }
  return NoiseSchedule(std::move(alphas));
}

namespace {

void require_step(const NoiseSchedule& schedule, int t) {
  if (t < 1 || t > schedule.steps()) {
    throw DomainError("posterior: timestep " + std::to_string(t) + " outside [1, " +
                      std::to_string(schedule.steps()) + "]");
  }
  if (1.0 - schedule.alpha_bar(t) == 0.0) {
    throw DomainError("posterior: degenerate step " + std::to_string(t) +
                      " (alpha_bar == 1, no noise added)");
  }
}

}  // namespace

PosteriorCoeffs posterior_coeffs(const NoiseSchedule& schedule, int t) {
  require_step(schedule, t);
  const double alpha = schedule.alpha(t);
  const double beta = 1.0 - alpha;
  const double bar_prev = schedule.alpha_bar(t - 1);
  const double denom = 1.0 - schedule.alpha_bar(t);
  const double sqrt_alpha = std::sqrt(alpha);
  const double sqrt_bar_prev = std::sqrt(bar_prev);

  PosteriorCoeffs k;
  k.a = sqrt_alpha * (1.0 - bar_prev) / denom;
  k.b = sqrt_bar_prev * beta / denom;
  k.gamma = (1.0 - sqrt_bar_prev) * beta / denom -
            (1.0 - bar_prev) * (sqrt_alpha - alpha) / denom;
  k.beta_hat = beta * (1.0 - bar_prev) / denom;
  return k;
}

PosteriorCoeffs ddpm_posterior_coeffs(const NoiseSchedule& schedule, int t) {
  require_step(schedule, t);
  const double beta = schedule.beta(t);
  const double bar_prev = schedule.alpha_bar(t - 1);
  const double bar = schedule.alpha_bar(t);
  PosteriorCoeffs k;
  k.a = std::sqrt(schedule.alpha(t)) * (1.0 - bar_prev) / (1.0 - bar);
  k.b = std::sqrt(bar_prev) * beta / (1.0 - bar);
  k.beta_hat = (1.0 - bar_prev) / (1.0 - bar) * beta;
  return k;
}

DriftSequence DriftSequence::mean_reverting(const NoiseSchedule& schedule) {
  DriftSequence d;
  d.lambda.reserve(schedule.steps());
  for (double a : schedule.alphas()) d.lambda.push_back(1.0 - std::sqrt(a));
  return d;
}

DriftSequence DriftSequence::geometric(int steps, double first, double ratio) {
  DriftSequence d;
  d.lambda.reserve(steps);
  double v = first;
  for (int t = 0; t < steps; ++t, v *= ratio) d.lambda.push_back(v);
  return d;
}

DriftSequence DriftSequence::constant(int steps, double value) {
  return DriftSequence{std::vector<double>(steps, value)};
}

std::vector<double> drift_coefficient_sequence(const NoiseSchedule& schedule,
                                               const DriftSequence& drift, int t) {
  if (t < 1 || t > schedule.steps() || t > static_cast<int>(drift.lambda.size())) {
    throw DomainError("drift_coefficient_sum: timestep " + std::to_string(t) +
                      " outside the schedule/drift range");
  }
  std::vector<double> out(t);
  double m = 0.0;
  for (int s = 1; s <= t; ++s) {
    m = std::sqrt(schedule.alpha(s)) * m + drift.at(s);
    out[s - 1] = m;
  }
  return out;
}

double drift_coefficient_sum(const NoiseSchedule& schedule, const DriftSequence& drift,
                             int t) {
  return drift_coefficient_sequence(schedule, drift, t).back();
}

}  // namespace inspect

#pragma once

#include <span>
#include <vector>

namespace inspect {

/// Per-step retention factors alpha_t and their cumulative products.
/// Timesteps are 1-indexed; alpha_bar(0) == 1.
class NoiseSchedule {
 public:
  /// Validates every alpha_t in (0, 1] and T >= 1.
  explicit NoiseSchedule(std::vector<double> alphas);

  [[nodiscard]] int steps() const { return static_cast<int>(alpha_.size()); }
  [[nodiscard]] double alpha(int t) const;
  [[nodiscard]] double beta(int t) const { return 1.0 - alpha(t); }
  [[nodiscard]] double alpha_bar(int t) const;

  [[nodiscard]] std::span<const double> alphas() const { return alpha_; }
  /// alpha_bar(0..T), length T + 1.
  [[nodiscard]] std::span<const double> alpha_bars() const { return alpha_bar_; }

 private:
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
};

inline constexpr double kDefaultTerminalEps = 1e-5;
inline constexpr double kCosineOffset = 0.008;
inline constexpr double kMinAlpha = 1e-8;
inline constexpr double kMaxAlpha = 0.9999;

/// Squared-cosine schedule: alpha_bar(t) = f(t)/f(0) with
/// f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2), per-step alpha clipped to
/// [kMinAlpha, kMaxAlpha]. If alpha_bar(T) still exceeds terminal_eps, the
/// last step is clamped so that alpha_bar(T) <= terminal_eps.
NoiseSchedule cosine_schedule(int steps, double terminal_eps = kDefaultTerminalEps);

/// Weights of the Gaussian q(x_{t-1} | x_t, x_0):
/// mean = a * x_t + b * x_0 + gamma * mu, variance = beta_hat * Sigma.
struct PosteriorCoeffs {
  double a = 0.0;
  double b = 0.0;
  double gamma = 0.0;
  double beta_hat = 0.0;
};

/// Mean-shifted posterior of the feature-preserving chain.
/// Throws DomainError for t outside [1, T] or when 1 - alpha_bar(t) == 0.
PosteriorCoeffs posterior_coeffs(const NoiseSchedule& schedule, int t);

/// Standard DDPM posterior (gamma == 0); beta_hat is the DDPM beta-tilde.
PosteriorCoeffs ddpm_posterior_coeffs(const NoiseSchedule& schedule, int t);

/// Generalised per-step mean drift lambda_t (1-indexed, length T).
struct DriftSequence {
  std::vector<double> lambda;

  [[nodiscard]] double at(int t) const { return lambda.at(t - 1); }

  /// lambda_t = 1 - sqrt(alpha_t), the choice that pulls the chain to mu.
  static DriftSequence mean_reverting(const NoiseSchedule& schedule);
  /// lambda_t = first * ratio^(t-1).
  static DriftSequence geometric(int steps, double first, double ratio);
  static DriftSequence constant(int steps, double value);
};

/// Multiplier of mu in the closed-form mean of the drifted chain,
/// sqrt(alpha_bar_t) * sum_{s<=t} lambda_s / sqrt(alpha_bar_s), evaluated by
/// the equivalent recursion m_t = sqrt(alpha_t) m_{t-1} + lambda_t.
double drift_coefficient_sum(const NoiseSchedule& schedule, const DriftSequence& drift,
                             int t);

/// All multipliers m_1..m_t in one pass.
std::vector<double> drift_coefficient_sequence(const NoiseSchedule& schedule,
                                               const DriftSequence& drift, int t);

}  // namespace inspect

#include "inspect/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "inspect/diffusion.hpp"
#include "inspect/rng.hpp"
#include "inspect/spectral.hpp"

namespace inspect {

namespace {

ClassStats uniform_stats(const Shape& shape, double mu, double var) {
  ClassStats s;
  s.shape = shape;
  s.mean.assign(shape.size(), mu);
  s.var.assign(shape.size(), var);
  s.count = 1;
  return s;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

// Shifted by the first value, so identical inputs give exactly zero variance.
Moments moments_of(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double shift = xs[0];
  double sum = 0.0;
  for (double x : xs) sum += x - shift;
  const double mean_c = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - shift - mean_c) * (x - shift - mean_c);
  return {shift + mean_c, ss / n};
}

double relative_or_absolute(double measured, double exact) {
  const double err = std::abs(measured - exact);
  return exact == 0.0 ? err : err / std::abs(exact);
}

}  // namespace

double normal_two_sided_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile: p must lie in (0, 1)");
  // P(|Z| > z) = erfc(z / sqrt 2), decreasing in z; bisection is plenty.
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erfc(mid / std::sqrt(2.0)) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

OracleReport mc_forward_consistency(const NoiseSchedule& schedule, double mu, double var,
                                    double x0, std::size_t n_paths,
                                    std::vector<int> checkpoints, std::uint64_t seed,
                                    double tolerance) {
  if (n_paths < 2) throw DomainError("mc_forward_consistency: need paths");
  const std::size_t paths = n_paths + (n_paths % 2);
  // Each component of a 2 x paths/2 field is one independent scalar chain.
  const Shape shape{1, 2, static_cast<int>(paths / 2)};
  const ClassStats stats = uniform_stats(shape, mu, var);

  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::remove_if(checkpoints.begin(), checkpoints.end(),
                                   [&](int t) { return t < 1 || t > schedule.steps(); }),
                    checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

  OracleReport report;
  report.check = "forward_consistency";
  report.params = {{"mu", mu}, {"var", var}, {"x0", x0}, {"T", schedule.steps()}};
  report.samples = paths;

  Rng rng = Rng::derive(seed, "verify/forward");
  DiffusionState state{SpectralField(shape, x0), 0};
  double abar = 1.0;
  double worst = 0.0;
  std::size_t next = 0;
  const auto alphas = schedule.alphas();
  for (int t = 1; next < checkpoints.size(); ++t) {
    state = forward_step(state, stats, schedule, rng);
    abar *= alphas[t - 1];
    if (t != checkpoints[next]) continue;
    ++next;
    const Moments m = moments_of(state.x.values());
    const double exact_mean = std::sqrt(abar) * x0 + (1.0 - std::sqrt(abar)) * mu;
    const double exact_var = (1.0 - abar) * var;
    const double mean_err = relative_or_absolute(m.mean, exact_mean);
    const double var_err = relative_or_absolute(m.var, exact_var);
    worst = std::max({worst, mean_err, var_err});
    report.params.push_back({"t", t});
    report.params.push_back({"mean_rel_err", mean_err});
    report.params.push_back({"var_rel_err", var_err});
  }
  report.set_result(worst, tolerance);
  return report;
}

namespace {

struct Quadrature {
  double mean = 0.0;
  double var = 0.0;
  std::size_t points = 0;
};

// Posterior of x_{t-1} from the two Gaussian factors, by trapezoid rule.
Quadrature integrate_posterior(double alpha, double abar_prev, double mu, double var,
                               double x0, double xt, std::size_t grid_n) {
  const double sa = std::sqrt(alpha);
  const double sab = std::sqrt(abar_prev);
  const double lik_var = (1.0 - alpha) * var;        // of x_t given x_{t-1}
  const double prior_var = (1.0 - abar_prev) * var;  // of x_{t-1} given x_0
  const double prior_mean = sab * x0 + (1.0 - sab) * mu;
  const auto log_density = [&](double y) {
    const double r1 = xt - sa * y - (1.0 - sa) * mu;
    const double r2 = y - prior_mean;
    return -0.5 * r1 * r1 / lik_var - 0.5 * r2 * r2 / prior_var;
  };

  const double s_prior = std::sqrt(prior_var);
  const double lik_center = (xt - (1.0 - sa) * mu) / sa;
  const double s_lik = std::sqrt(lik_var) / sa;
  double lo = std::min(prior_mean - 8.0 * s_prior, lik_center - 8.0 * s_lik);
  double hi = std::max(prior_mean + 8.0 * s_prior, lik_center + 8.0 * s_lik);

  Quadrature q;
  std::vector<double> ys(grid_n), ls(grid_n);
  for (int pass = 0; pass < 12; ++pass) {
    const double h = (hi - lo) / static_cast<double>(grid_n - 1);
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_n; ++i) {
      ys[i] = lo + h * static_cast<double>(i);
      ls[i] = log_density(ys[i]);
      lmax = std::max(lmax, ls[i]);
    }
    double z = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < grid_n; ++i) {
      const double w = (i == 0 || i + 1 == grid_n ? 0.5 : 1.0) * std::exp(ls[i] - lmax);
      z += w;
      m1 += w * ys[i];
    }
    const double mean = m1 / z;
    double m2 = 0.0;
    for (std::size_t i = 0; i < grid_n; ++i) {
      const double w = (i == 0 || i + 1 == grid_n ? 0.5 : 1.0) * std::exp(ls[i] - lmax);
      m2 += w * (ys[i] - mean) * (ys[i] - mean);
    }
    q = {mean, m2 / z, grid_n};
    const double sd = std::sqrt(q.var);
    // A coarse grid can under-resolve the peak; never zoom in past 50 old steps.
    const double half = std::max(8.0 * sd, 50.0 * h);
    const double new_lo = mean - half;
    const double new_hi = mean + half;
    const bool settled = std::abs(new_lo - lo) <= 1e-3 * sd && std::abs(new_hi - hi) <= 1e-3 * sd;
    lo = new_lo;
    hi = new_hi;
    if (settled) break;
  }
  return q;
}

}  // namespace

OracleReport posterior_bayes_oracle(double alpha_t, double alpha_bar_prev, double mu,
                                    double var, double x0, double xt, std::size_t grid_n,
                                    PosteriorReference reference, double tolerance) {
  if (!(alpha_bar_prev < 1.0) || !(var > 0.0)) {
    throw DomainError("posterior_bayes_oracle: needs alpha_bar_prev < 1 and var > 0");
  }
  grid_n = std::max<std::size_t>(grid_n, 10000);
  const Quadrature q = integrate_posterior(alpha_t, alpha_bar_prev, mu, var, x0, xt, grid_n);

  // Two-step schedule whose first step reproduces alpha_bar_prev.
  const NoiseSchedule schedule({alpha_bar_prev, alpha_t});
  double closed_mean = 0.0;
  double closed_var = 0.0;
  if (reference == PosteriorReference::Inspect) {
    const Shape shape{1, 2, 2};
    const ClassStats stats = uniform_stats(shape, mu, var);
    const PosteriorParams post = posterior_params(SpectralField(shape, xt),
                                                  SpectralField(shape, x0), 2, stats, schedule);
    closed_mean = post.mean[0];
    closed_var = post.beta_hat * var;
  } else {
    const PosteriorCoeffs k = ddpm_posterior_coeffs(schedule, 2);
    closed_mean = k.a * xt + k.b * x0;
    closed_var = k.beta_hat * var;
  }

  OracleReport report;
  report.check = reference == PosteriorReference::Inspect ? "posterior_bayes" : "posterior_bayes_ddpm";
  report.params = {{"alpha_t", alpha_t}, {"alpha_bar_prev", alpha_bar_prev}, {"mu", mu},
                   {"var", var}, {"x0", x0}, {"xt", xt},
                   {"quadrature_mean", q.mean}, {"quadrature_var", q.var},
                   {"closed_mean", closed_mean}, {"closed_var", closed_var}};
  report.samples = q.points;
  report.set_result(std::max(std::abs(q.mean - closed_mean), std::abs(q.var - closed_var)),
                    tolerance);
  return report;
}

OracleReport posterior_oracle_sweep(std::size_t draws, std::uint64_t seed, double tolerance) {
  Rng rng = Rng::derive(seed, "verify/posterior-sweep");
  OracleReport worst;
  worst.check = "posterior_bayes_sweep";
  double max_disc = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double alpha = 0.5 + 0.4999 * rng.uniform();
    const double abar_prev = 1e-4 + (0.999 - 1e-4) * rng.uniform();
    const double mu = -2.0 + 4.0 * rng.uniform();
    const double var = std::exp(std::log(0.01) + (std::log(4.0) - std::log(0.01)) * rng.uniform());
    const double x0 = -3.0 + 6.0 * rng.uniform();
    const double xt = -3.0 + 6.0 * rng.uniform();
    const OracleReport r = posterior_bayes_oracle(alpha, abar_prev, mu, var, x0, xt, 20000,
                                                  PosteriorReference::Inspect, tolerance);
    if (i == 0 || r.discrepancy > max_disc) {
      max_disc = r.discrepancy;
      worst.params = r.params;
    }
  }
  worst.params.push_back({"draws", static_cast<double>(draws)});
  worst.samples = draws;
  worst.note = "params are those of the worst draw";
  worst.set_result(max_disc, tolerance);
  return worst;
}

OracleReport coefficient_identity_sweep(std::size_t pairs, std::uint64_t seed, double tolerance) {
  Rng rng = Rng::derive(seed, "verify/coefficients");
  double worst_sum = 0.0;
  double worst_var = 0.0;
  double worst_precision = 0.0;
  double worst_first = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const int steps = static_cast<int>(rng.uniform_int(1, 1000));
    std::vector<double> alphas(steps);
    if (rng.uniform() < 0.5) {
      for (double& a : alphas) a = 0.9 + 0.09999 * rng.uniform();
    } else {
      const auto s = cosine_schedule(steps);
      std::copy(s.alphas().begin(), s.alphas().end(), alphas.begin());
    }
    const NoiseSchedule schedule(std::move(alphas));
    const int t = static_cast<int>(rng.uniform_int(1, steps));
    const PosteriorCoeffs k = posterior_coeffs(schedule, t);
    const PosteriorCoeffs d = ddpm_posterior_coeffs(schedule, t);
    const double alpha = schedule.alpha(t);
    const double precision = alpha / (1.0 - alpha) + 1.0 / (1.0 - schedule.alpha_bar(t - 1));
    worst_sum = std::max(worst_sum, std::abs(k.a + k.b + k.gamma - 1.0));
    worst_var = std::max(worst_var, std::abs(k.beta_hat - d.beta_hat));
    worst_precision = std::max(worst_precision, std::abs(k.beta_hat - 1.0 / precision));
    const PosteriorCoeffs first = posterior_coeffs(schedule, 1);
    worst_first = std::max({worst_first, std::abs(first.gamma), std::abs(first.beta_hat)});
  }
  OracleReport report;
  report.check = "coefficient_identities";
  report.params = {{"max_abs_sum_minus_one", worst_sum},
                   {"max_abs_beta_hat_minus_ddpm", worst_var},
                   {"max_abs_beta_hat_minus_precision_route", worst_precision},
                   {"max_abs_gamma1_beta_hat1", worst_first}};
  report.samples = pairs;
  // gamma_1 and beta_hat_1 must be exactly zero.
  report.set_result(worst_first == 0.0 ? std::max({worst_sum, worst_var, worst_precision})
                                       : std::numeric_limits<double>::infinity(),
                    tolerance);
  return report;
}

OracleReport terminal_law_check(const ClassStats& stats, const NoiseSchedule& schedule,
                                std::size_t n_draws, std::uint64_t seed) {
  stats.validate();
  const int T = schedule.steps();
  const double abar = schedule.alpha_bar(T);
  if (abar > kDefaultTerminalEps) {
    throw DomainError("terminal_law_check: alpha_bar_T = " + std::to_string(abar) +
                      " exceeds the terminal bound");
  }
  const double sqrt_abar = std::sqrt(abar);
  const std::size_t K = stats.components();
  const double n = static_cast<double>(n_draws);

  // Starting points: all zeros, mean + 3 sd, and a draw around the mean.
  Rng start_rng = Rng::derive(seed, "verify/terminal-start");
  std::vector<SpectralField> starts(3, SpectralField(stats.shape));
  for (std::size_t k = 0; k < K; ++k) {
    const double sd = std::sqrt(stats.var[k]);
    starts[1][k] = stats.mean[k] + 3.0 * sd;
    starts[2][k] = stats.mean[k] + sd * start_rng.normal();
  }

  // Three starts x K components x (mean, variance) tests, plus pairwise mean
  // differences: Bonferroni over all of them.
  const double family = static_cast<double>(K) * (2.0 * starts.size() + 2.0);
  const double z_crit = std::max(3.0, normal_two_sided_quantile(0.0027 / family));

  double worst = 0.0;
  bool frozen_ok = true;
  std::vector<std::vector<double>> means(starts.size());
  for (std::size_t s = 0; s < starts.size(); ++s) {
    Rng rng = Rng::derive(seed, "verify/terminal", s);
    std::vector<double> sum(K, 0.0), sumsq(K, 0.0);
    for (std::size_t i = 0; i < n_draws; ++i) {
      const DiffusionState d = forward_closed(starts[s], T, stats, schedule, rng);
      for (std::size_t k = 0; k < K; ++k) {
        if (stats.var[k] == 0.0) {
          // Frozen components may only carry the deterministic sqrt(abar) pull.
          const double expect = stats.mean[k] + sqrt_abar * (starts[s][k] - stats.mean[k]);
          if (d.x[k] != expect) frozen_ok = false;
          continue;
        }
        const double c = d.x[k] - stats.mean[k];
        sum[k] += c;
        sumsq[k] += c * c;
      }
    }
    means[s].resize(K);
    for (std::size_t k = 0; k < K; ++k) {
      const double v = stats.var[k];
      means[s][k] = stats.mean[k] + sum[k] / n;
      if (v == 0.0) continue;
      const double mean_c = sum[k] / n;
      const double var_hat = sumsq[k] / n - mean_c * mean_c;
      const double bias = sqrt_abar * std::abs(starts[s][k] - stats.mean[k]);
      const double z_mean = std::max(0.0, std::abs(mean_c) - bias) / std::sqrt(v / n);
      const double z_var =
          std::max(0.0, std::abs(var_hat - v) - abar * v) / (v * std::sqrt(2.0 / (n - 1.0)));
      worst = std::max({worst, z_mean, z_var});
    }
  }
  // Dependence on the start is bounded by sqrt(abar) |delta x0| + MC noise.
  for (std::size_t s = 1; s < starts.size(); ++s) {
    for (std::size_t k = 0; k < K; ++k) {
      const double v = stats.var[k];
      if (v == 0.0) continue;
      const double bound = sqrt_abar * std::abs(starts[s][k] - starts[0][k]);
      const double z = std::max(0.0, std::abs(means[s][k] - means[0][k]) - bound) /
                       std::sqrt(2.0 * v / n);
      worst = std::max(worst, z);
    }
  }

  OracleReport report;
  report.check = "terminal_law";
  report.params = {{"T", T}, {"alpha_bar_T", abar}, {"components", static_cast<double>(K)},
                   {"z_critical", z_crit}};
  report.samples = n_draws;
  report.note = frozen_ok ? "discrepancy = worst excess |z| beyond the sqrt(abar_T) bias"
                          : "zero-variance component left its deterministic path";
  report.set_result(frozen_ok ? worst : std::numeric_limits<double>::infinity(), z_crit);
  return report;
}

namespace {

// sqrt(abar_t) * sum_{s<=t} lambda_s / sqrt(abar_s), straight from the sum.
std::vector<double> direct_drift_sum(const DriftSequence& drift, const NoiseSchedule& schedule,
                                     int horizon) {
  std::vector<double> out(horizon);
  double abar = 1.0;
  std::vector<double> sqrt_abar(horizon + 1, 1.0);
  for (int t = 1; t <= horizon; ++t) {
    abar *= schedule.alphas()[t - 1];
    sqrt_abar[t] = std::sqrt(abar);
  }
  double acc = 0.0;
  for (int t = 1; t <= horizon; ++t) {
    acc += drift.lambda[t - 1] / sqrt_abar[t];
    out[t - 1] = sqrt_abar[t] * acc;
  }
  return out;
}

}  // namespace

OracleReport drift_convergence_check(const DriftSequence& drift, const NoiseSchedule& schedule,
                                     int horizon) {
  if (horizon < 100) throw DomainError("drift_convergence_check: horizon must be >= 100");
  if (horizon > schedule.steps() || horizon > static_cast<int>(drift.lambda.size())) {
    throw DomainError("drift_convergence_check: horizon exceeds schedule or drift length");
  }
  const std::vector<double> direct = direct_drift_sum(drift, schedule, horizon);
  const std::vector<double> recursive = drift_coefficient_sequence(schedule, drift, horizon);

  OracleReport report;
  report.check = "drift_convergence";
  report.samples = static_cast<std::size_t>(horizon);
  double route_gap = 0.0;
  for (int t = 0; t < horizon; ++t) {
    route_gap = std::max(route_gap, std::abs(direct[t] - recursive[t]) /
                                        std::max(1.0, std::abs(direct[t])));
  }

  double p_observed = 0.0;
  for (int t = 1; t < horizon; ++t) {
    const double prev = drift.lambda[t - 1];
    // Ratios of subnormal weights are rounding noise; the sequence has vanished there.
    if (std::isnormal(prev) && prev > 0.0) {
      p_observed = std::max(p_observed, drift.lambda[t] / prev);
    }
  }
  double sup = 0.0;
  for (double m : recursive) sup = std::max(sup, std::abs(m));
  report.params = {{"horizon", horizon}, {"p_observed", p_observed}, {"sup", sup},
                   {"route_gap", route_gap}};

  if (!(p_observed < 1.0)) {
    report.note = "condition not satisfied: lambda ratio reaches " + std::to_string(p_observed) +
                  "; boundedness not asserted";
    report.set_result(route_gap, 1e-12);
    return report;
  }

  double lambda_total = 0.0;
  for (int t = 0; t < horizon; ++t) lambda_total += std::abs(drift.lambda[t]);
  double violation = 0.0;
  for (int t = 1; t < horizon; ++t) {
    const double m = recursive[t - 1];
    const double lam = drift.lambda[t - 1];
    if (m <= 0.0 || lam <= 0.0 || !std::isnormal(lam)) continue;
    const double lhs = recursive[t] / m;
    const double rhs = std::sqrt(schedule.alpha(t + 1)) + drift.lambda[t] / lam;
    violation = std::max(violation, (lhs - rhs) / rhs);
  }
  // Geometric fit of |m_{t+1} - m_t| over the second half of the horizon.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, cnt = 0.0;
  for (int t = horizon / 2; t < horizon - 1; ++t) {
    const double inc = std::abs(recursive[t + 1] - recursive[t]);
    if (!(inc > 0.0) || !std::isnormal(inc)) continue;
    const double x = t;
    const double y = std::log(inc);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    cnt += 1.0;
  }
  double fitted_ratio = 0.0;
  if (cnt >= 2.0) fitted_ratio = std::exp((cnt * sxy - sx * sy) / (cnt * sxx - sx * sx));
  report.params.push_back({"lambda_total", lambda_total});
  report.params.push_back({"fitted_increment_ratio", fitted_ratio});
  report.params.push_back({"ratio_inequality_violation", violation});

  const bool bounded = std::isfinite(sup) && sup <= lambda_total * (1.0 + 1e-12);
  const bool shrinking = fitted_ratio < 1.0;
  report.note = "condition satisfied";
  report.set_result(bounded && shrinking ? std::max({route_gap, violation, 0.0})
                                         : std::numeric_limits<double>::infinity(),
                    1e-12);
  return report;
}

OracleReport drift_identity_check(const NoiseSchedule& schedule, double tolerance) {
  const int T = schedule.steps();
  const DriftSequence drift = DriftSequence::mean_reverting(schedule);
  const std::vector<double> direct = direct_drift_sum(drift, schedule, T);
  const std::vector<double> recursive = drift_coefficient_sequence(schedule, drift, T);
  double worst = 0.0;
  double sup = 0.0;
  double abar = 1.0;
  for (int t = 1; t <= T; ++t) {
    abar *= schedule.alphas()[t - 1];
    const double exact = 1.0 - std::sqrt(abar);
    worst = std::max({worst, std::abs(recursive[t - 1] - exact), std::abs(direct[t - 1] - exact)});
    sup = std::max(sup, recursive[t - 1]);
  }
  OracleReport report;
  report.check = "drift_identity";
  report.params = {{"T", T}, {"sup", sup}};
  report.samples = static_cast<std::size_t>(T);
  report.set_result(sup <= 1.0 ? worst : std::numeric_limits<double>::infinity(), tolerance);
  return report;
}

OracleReport ddpm_reduction_check(const NoiseSchedule& schedule, const Shape& shape,
                                  std::uint64_t seed, double tolerance) {
  const ClassStats white = uniform_stats(shape, 0.0, 1.0);
  const int T = schedule.steps();
  Rng init = Rng::derive(seed, "verify/reduction-init");
  PixelField x0(shape);
  for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = init.uniform();

  double worst = 0.0;
  // Forward: step by step from x0 under one shared stream per process.
  {
    Rng a = Rng::derive(seed, "verify/reduction-forward");
    Rng b = a;
    DiffusionState s{SpectralField(shape, std::vector<double>(x0.values().begin(), x0.values().end())), 0};
    PixelField p = x0;
    for (int t = 1; t <= T; ++t) {
      s = forward_step(s, white, schedule, a);
      p = ddpm_forward_step(p, t, schedule, b);
      for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(s.x[i] - p[i]));
    }
  }
  // Backward: same start, same x0 prediction, shared noise.
  {
    Rng a = Rng::derive(seed, "verify/reduction-backward");
    Rng b = a;
    Rng start = Rng::derive(seed, "verify/reduction-start");
    PixelField p(shape);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = start.normal();
    SpectralField s(shape, std::vector<double>(p.values().begin(), p.values().end()));
    const SpectralField x0_as_spec(shape, std::vector<double>(x0.values().begin(), x0.values().end()));
    for (int t = T; t >= 1; --t) {
      s = backward_step(s, x0_as_spec, t, white, schedule, a);
      p = ddpm_backward_step(p, x0, t, schedule, b);
      for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(s[i] - p[i]));
    }
  }
  OracleReport report;
  report.check = "ddpm_reduction";
  report.params = {{"T", T}, {"components", static_cast<double>(shape.size())}};
  report.samples = static_cast<std::size_t>(T);
  report.set_result(worst, tolerance);
  return report;
}

double spectral_moment_distance(std::span<const PixelField> generated,
                                const ClassStats& reference) {
  if (generated.size() < 32) {
    throw DomainError("spectral_moment_distance: need >= 32 samples, got " +
                      std::to_string(generated.size()));
  }
  const std::size_t K = reference.components();
  const double n = static_cast<double>(generated.size());
  std::vector<double> sum(K, 0.0), sumsq(K, 0.0);
  for (const auto& img : generated) {
    require_same(img.shape(), reference.shape, "spectral_moment_distance");
    const SpectralField s = to_spectral(img);
    for (std::size_t k = 0; k < K; ++k) {
      const double c = s[k] - reference.mean[k];
      sum[k] += c;
      sumsq[k] += c * c;
    }
  }
  constexpr double eps = 1e-12;
  double gap = 0.0, total_var = 0.0, log_ratio = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double d = sum[k] / n;
    const double var_g = std::max(0.0, sumsq[k] / n - d * d);
    gap += d * d;
    total_var += reference.var[k];
    log_ratio += std::abs(std::log((var_g + eps) / (reference.var[k] + eps)));
  }
  const double mean_term = total_var > 0.0 ? std::sqrt(gap / total_var) : std::sqrt(gap);
  return mean_term + log_ratio / static_cast<double>(K);
}

}  // namespace inspect

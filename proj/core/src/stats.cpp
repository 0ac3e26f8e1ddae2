#include "inspect/stats.hpp"

#include <algorithm>
#include <cmath>

namespace inspect {

void ClassStats::validate() const {
  require_valid(shape);
  if (mean.size() != shape.size() || var.size() != shape.size()) {
    throw ShapeError("class stats: vectors do not match shape " + shape.str());
  }
  if (count < 1) throw DomainError("class stats: sample count must be >= 1");
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (!std::isfinite(mean[i]) || !std::isfinite(var[i])) {
      throw NonFiniteError("class stats: non-finite entry at component " + std::to_string(i));
    }
    if (var[i] < 0.0) throw DomainError("class stats: negative variance");
  }
}

StatsAccumulator::StatsAccumulator(Shape shape)
    : shape_(shape), mean_(shape.size(), 0.0), m2_(shape.size(), 0.0) {
  require_valid(shape);
}

void StatsAccumulator::add(const SpectralField& sample) {
  require_same(shape_, sample.shape(), "fit_class_stats");
  ++count_;
  const double n = static_cast<double>(count_);
  const auto x = sample.values();
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double delta = x[i] - mean_[i];
    mean_[i] += delta / n;
    m2_[i] += delta * (x[i] - mean_[i]);
  }
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  require_same(shape_, other.shape_, "stats merge");
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double delta = other.mean_[i] - mean_[i];
    mean_[i] = (na * mean_[i] + nb * other.mean_[i]) / n;
    m2_[i] += other.m2_[i] + delta * delta * na * nb / n;
  }
  count_ += other.count_;
}

ClassStats StatsAccumulator::finish(std::optional<std::string> label) const {
  if (count_ == 0) throw DomainError("fit_class_stats: empty sample stream");
  ClassStats stats;
  stats.label = std::move(label);
  stats.shape = shape_;
  stats.mean = mean_;
  stats.var.resize(m2_.size());
  const double n = static_cast<double>(count_);
  std::transform(m2_.begin(), m2_.end(), stats.var.begin(),
                 [n](double m2) { return std::max(0.0, m2 / n); });
  stats.count = count_;
  return stats;
}

ClassStats fit_class_stats(std::span<const SpectralField> samples,
                           std::optional<std::string> label) {
  if (samples.empty()) throw DomainError("fit_class_stats: empty sample stream");
  StatsAccumulator acc(samples.front().shape());
  for (const auto& s : samples) acc.add(s);
  return acc.finish(std::move(label));
}

InvarianceReport count_invariant(const ClassStats& stats, double threshold) {
  if (!(threshold >= 0.0)) throw DomainError("count_invariant: threshold must be >= 0");
  InvarianceReport report;
  report.threshold = threshold;
  report.total = stats.var.size();
  for (double v : stats.var) {
    const double sd = std::sqrt(v);
    if (sd == 0.0) ++report.exact_zero;
    if (sd <= threshold) ++report.near_zero;
  }
  return report;
}

PowerLawFit power_law_fit(const RadialProfile& profile, double k_min, double k_max) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& bin : profile) {
    if (bin.radius >= k_min && bin.radius <= k_max && bin.radius > 0.0 &&
        bin.mean_power > 0.0) {
      xs.push_back(std::log(bin.radius));
      ys.push_back(std::log(bin.mean_power));
    }
  }
  if (xs.size() < 3) {
    throw DomainError("power_law_fit: need >= 3 positive bins in [" + std::to_string(k_min) +
                      ", " + std::to_string(k_max) + "], found " + std::to_string(xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw DomainError("power_law_fit: all bins share one radius");
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (my + slope * (xs[i] - mx));
    rss += r * r;
  }
  return {-slope, k_min, k_max, std::sqrt(rss / n), xs.size()};
}

std::vector<double> smooth_profile(const RadialProfile& profile, int window) {
  const int n = static_cast<int>(profile.size());
  const int half = std::max(0, window / 2);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (int j = lo; j <= hi; ++j) acc += profile[j].mean_power;
    out[i] = acc / (hi - lo + 1);
  }
  return out;
}

double excess_kurtosis(std::span<const double> values) {
  if (values.size() < 4) throw DomainError("excess_kurtosis: need >= 4 values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  if (m2 == 0.0) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

}  // namespace inspect

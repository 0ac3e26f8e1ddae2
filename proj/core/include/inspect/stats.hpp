#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inspect/field.hpp"
#include "inspect/spectral.hpp"

namespace inspect {

/// Component-wise spectral mean and diagonal variance of one class (or of a
/// whole dataset when label is empty).
struct ClassStats {
  std::optional<std::string> label;
  Shape shape;
  std::vector<double> mean;
  std::vector<double> var;  ///< population variance, never floored
  std::size_t count = 0;
  int padding = 0;  ///< zero border added to each side before transforming

  [[nodiscard]] std::size_t components() const { return mean.size(); }
  [[nodiscard]] SpectralField mean_field() const { return SpectralField(shape, mean); }
  /// Throws unless sizes match the shape, variances are >= 0 and all finite.
  void validate() const;
};

/// One-pass Welford accumulator per component; shards merge with Chan's
/// pairwise update.
class StatsAccumulator {
 public:
  explicit StatsAccumulator(Shape shape);

  void add(const SpectralField& sample);
  void merge(const StatsAccumulator& other);

  [[nodiscard]] std::size_t count() const { return count_; }
  [[nodiscard]] const Shape& shape() const { return shape_; }
  /// Throws DomainError when no sample was added.
  [[nodiscard]] ClassStats finish(std::optional<std::string> label = std::nullopt) const;

 private:
  Shape shape_;
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

ClassStats fit_class_stats(std::span<const SpectralField> samples,
                           std::optional<std::string> label = std::nullopt);

struct InvarianceReport {
  std::size_t exact_zero = 0;  ///< components with std == 0
  std::size_t near_zero = 0;   ///< components with std <= threshold
  double threshold = 1e-3;
  std::size_t total = 0;
};

InvarianceReport count_invariant(const ClassStats& stats, double threshold = 1e-3);

struct PowerLawFit {
  double exponent = 0.0;  ///< gamma in |x̂|^2 ~ |k|^-gamma
  double k_min = 0.0;
  double k_max = 0.0;
  double residual = 0.0;  ///< RMS residual of the log-log fit
  std::size_t bins_used = 0;
};

/// Least-squares slope of log(mean power) against log(radius) over bins with
/// radius in [k_min, k_max] and positive power. Needs at least 3 such bins.
PowerLawFit power_law_fit(const RadialProfile& profile, double k_min, double k_max);

/// Centred moving average of the bin powers (window shrinks at the ends).
std::vector<double> smooth_profile(const RadialProfile& profile, int window);

double excess_kurtosis(std::span<const double> values);

}  // namespace inspect

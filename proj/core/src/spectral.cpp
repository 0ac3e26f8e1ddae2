#include "inspect/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace inspect {

namespace {

// FFTW planning is not thread-safe, executing a plan on new arrays is.
// Plans are created once per grid size and kept for the process lifetime.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

const PlanPair& plans_for(int rows, int cols) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({rows, cols});
  if (it != cache.end()) return it->second;

  const int half = cols / 2 + 1;
  std::vector<double> real(static_cast<std::size_t>(rows) * cols);
  std::vector<std::complex<double>> complex(static_cast<std::size_t>(rows) * half);
  auto* cplx = reinterpret_cast<fftw_complex*>(complex.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair plans;
  plans.forward = fftw_plan_dft_r2c_2d(rows, cols, real.data(), cplx, flags);
  plans.inverse = fftw_plan_dft_c2r_2d(rows, cols, cplx, real.data(), flags);
  return cache.emplace(std::make_pair(rows, cols), plans).first->second;
}

enum class SlotKind { Real, Sine };

// Which coefficient a slot stores: (kind, row, col) of the half-plane
// coefficient H[row][col] with col in [0, N2/2].
struct SlotSource {
  SlotKind kind;
  int row;
  int col;
};

SlotSource slot_source(int r, int c, int n1, int n2) {
  const int k2 = signed_frequency(c, n2);
  if (k2 > 0 && k2 < n2 / 2) return {SlotKind::Real, r, c};
  if (k2 < 0) return {SlotKind::Sine, r, n2 - c};
  const int k1 = signed_frequency(r, n1);
  if (k1 > 0 && k1 < n1 / 2) return {SlotKind::Real, r, c};
  if (k1 < 0) return {SlotKind::Sine, n1 - r, c};
  return {SlotKind::Real, r, c};
}

}  // namespace

bool self_conjugate(int row, int col, const Shape& shape) {
  return (row == 0 || row == shape.height / 2) && (col == 0 || col == shape.width / 2);
}

double packing_weight(int row, int col, const Shape& shape) {
  return self_conjugate(row, col, shape) ? 1.0 : 2.0;
}

SpectralField to_spectral(const PixelField& image) {
  const Shape& shape = image.shape();
  require_even(shape);
  if (!image.all_finite()) throw NonFiniteError("to_spectral: non-finite pixel value");

  const int n1 = shape.height;
  const int n2 = shape.width;
  const int half = n2 / 2 + 1;
  const double norm = 1.0 / static_cast<double>(shape.plane());
  const PlanPair& plans = plans_for(n1, n2);

  SpectralField out(shape);
  std::vector<double> in(shape.plane());
  std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(n1) * half);
  for (int ch = 0; ch < shape.channels; ++ch) {
    const auto src = image.channel(ch);
    std::copy(src.begin(), src.end(), in.begin());
    fftw_execute_dft_r2c(plans.forward, in.data(),
                         reinterpret_cast<fftw_complex*>(coeffs.data()));
    for (int r = 0; r < n1; ++r) {
      for (int c = 0; c < n2; ++c) {
        const SlotSource s = slot_source(r, c, n1, n2);
        const std::complex<double> x = coeffs[static_cast<std::size_t>(s.row) * half + s.col];
        // X = R - iI, so the sine part is -Im X.
        out.at(ch, r, c) = (s.kind == SlotKind::Real ? x.real() : -x.imag()) * norm;
      }
    }
  }
  return out;
}

namespace {

// Rebuilds the half-plane coefficients H[r][c], c in [0, N2/2], of one channel.
void fill_half_plane(const SpectralField& spec, int ch,
                     std::vector<std::complex<double>>& half_plane) {
  const Shape& shape = spec.shape();
  const int n1 = shape.height;
  const int n2 = shape.width;
  const int half = n2 / 2 + 1;
  for (int r = 0; r < n1; ++r) {
    for (int c = 0; c < half; ++c) {
      double re = 0.0;
      double sine = 0.0;
      const int k2 = signed_frequency(c, n2);
      if (k2 > 0 && k2 < n2 / 2) {
        re = spec.at(ch, r, c);
        sine = spec.at(ch, r, n2 - c);
      } else {
        const int k1 = signed_frequency(r, n1);
        if (k1 > 0 && k1 < n1 / 2) {
          re = spec.at(ch, r, c);
          sine = spec.at(ch, n1 - r, c);
        } else if (k1 < 0) {
          // conjugate of the positive-k1 partner
          re = spec.at(ch, n1 - r, c);
          sine = -spec.at(ch, r, c);
        } else {
          re = spec.at(ch, r, c);
        }
      }
      half_plane[static_cast<std::size_t>(r) * half + c] = {re, -sine};
    }
  }
}

}  // namespace

PixelField to_pixel(const SpectralField& spec) {
  const Shape& shape = spec.shape();
  require_even(shape);
  const int n1 = shape.height;
  const int n2 = shape.width;
  const int half = n2 / 2 + 1;
  const PlanPair& plans = plans_for(n1, n2);

  PixelField out(shape);
  std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(n1) * half);
  std::vector<double> result(shape.plane());
  for (int ch = 0; ch < shape.channels; ++ch) {
    fill_half_plane(spec, ch, coeffs);
    fftw_execute_dft_c2r(plans.inverse, reinterpret_cast<fftw_complex*>(coeffs.data()),
                         result.data());
    std::copy(result.begin(), result.end(), out.channel(ch).begin());
  }
  return out;
}

PixelField spectral_adjoint(const SpectralField& grad) {
  const Shape& shape = grad.shape();
  require_even(shape);
  // to_pixel synthesises each packed value with its packing weight, so the
  // adjoint of the normalised analysis is to_pixel(g / w) / N.
  SpectralField scaled = grad;
  const double norm = 1.0 / static_cast<double>(shape.plane());
  for (int ch = 0; ch < shape.channels; ++ch) {
    for (int r = 0; r < shape.height; ++r) {
      for (int c = 0; c < shape.width; ++c) {
        scaled.at(ch, r, c) *= norm / packing_weight(r, c, shape);
      }
    }
  }
  return to_pixel(scaled);
}

double packed_energy(const SpectralField& spec) {
  const Shape& shape = spec.shape();
  double energy = 0.0;
  for (int ch = 0; ch < shape.channels; ++ch) {
    for (int r = 0; r < shape.height; ++r) {
      for (int c = 0; c < shape.width; ++c) {
        const double v = spec.at(ch, r, c);
        energy += packing_weight(r, c, shape) * v * v;
      }
    }
  }
  return energy;
}

ComplexSpectrum unpack(const SpectralField& spec) {
  const Shape& shape = spec.shape();
  require_even(shape);
  const int n1 = shape.height;
  const int n2 = shape.width;
  const int half = n2 / 2 + 1;
  ComplexSpectrum out{shape, std::vector<std::complex<double>>(shape.size())};
  std::vector<std::complex<double>> coeffs(static_cast<std::size_t>(n1) * half);
  for (int ch = 0; ch < shape.channels; ++ch) {
    fill_half_plane(spec, ch, coeffs);
    for (int r = 0; r < n1; ++r) {
      for (int c = 0; c < n2; ++c) {
        std::complex<double> x;
        if (c < half) {
          x = coeffs[static_cast<std::size_t>(r) * half + c];
        } else {
          const int mr = (n1 - r) % n1;
          x = std::conj(coeffs[static_cast<std::size_t>(mr) * half + (n2 - c)]);
        }
        out.values[(static_cast<std::size_t>(ch) * n1 + r) * n2 + c] = x;
      }
    }
  }
  return out;
}

std::vector<double> power_spectrum(const SpectralField& spec) {
  const ComplexSpectrum full = unpack(spec);
  std::vector<double> power(full.values.size());
  std::transform(full.values.begin(), full.values.end(), power.begin(),
                 [](std::complex<double> x) { return std::norm(x); });
  return power;
}

RadialProfile radial_profile_of_power(std::span<const double> power, const Shape& shape,
                                      int n_bins) {
  require_even(shape);
  if (n_bins < 2) throw DomainError("radial_profile: need at least 2 bins");
  if (power.size() != shape.size()) throw ShapeError("radial_profile: power length mismatch");

  const int n1 = shape.height;
  const int n2 = shape.width;
  const double r_max = std::hypot(n1 / 2.0, n2 / 2.0);
  std::vector<double> radius_sum(n_bins, 0.0);
  std::vector<double> power_sum(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  for (int r = 0; r < n1; ++r) {
    for (int c = 0; c < n2; ++c) {
      const double radius = std::hypot(signed_frequency(r, n1), signed_frequency(c, n2));
      const int bin = std::min(n_bins - 1, static_cast<int>(radius / r_max * n_bins));
      radius_sum[bin] += radius;
      ++count[bin];
      for (int ch = 0; ch < shape.channels; ++ch) {
        power_sum[bin] += power[(static_cast<std::size_t>(ch) * n1 + r) * n2 + c];
      }
    }
  }
  RadialProfile profile;
  for (int b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    const double n = static_cast<double>(count[b]);
    profile.push_back({radius_sum[b] / n, power_sum[b] / (n * shape.channels), count[b]});
  }
  return profile;
}

RadialProfile radial_profile(const SpectralField& spec, int n_bins) {
  return radial_profile_of_power(power_spectrum(spec), spec.shape(), n_bins);
}

}  // namespace inspect

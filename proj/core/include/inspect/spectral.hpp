#pragma once

#include <complex>
#include <span>
#include <vector>

#include "inspect/field.hpp"

namespace inspect {

/// Full complex DFT coefficients X(k1, k2) on the grid, indexed like the
/// pixel grid (row r holds k1 = r for r <= N1/2, r - N1 otherwise).
struct ComplexSpectrum {
  Shape shape;
  std::vector<std::complex<double>> values;

  [[nodiscard]] std::complex<double> at(int c, int row, int col) const {
    return values[(static_cast<std::size_t>(c) * shape.height + row) * shape.width + col];
  }
};

/// Signed wavenumber stored at grid index `i` of an axis of length `n`.
/// Range is (-n/2, n/2].
constexpr int signed_frequency(int i, int n) { return i <= n / 2 ? i : i - n; }

/// Forward transform, normalised by 1/(N1*N2), Hermitian-reduced and packed
/// into a real field of the same shape.
///
/// Packing (per channel, slot (r, c) carries wavenumber (k1, k2)):
///   0 < k2 < N2/2          real part of X(k1, k2)
///   k2 < 0                 sine part I(k1, -k2) of the mirrored column
///   k2 in {0, N2/2}:
///     0 < k1 < N1/2        real part of X(k1, k2)
///     k1 < 0               sine part I(-k1, k2)
///     k1 in {0, N1/2}      X(k1, k2) itself, which is real
/// with X = R - iI, i.e. I is the (normalised) sine sum.
///
/// Throws ShapeError for odd dimensions and NonFiniteError for NaN/inf input.
SpectralField to_spectral(const PixelField& image);

/// Exact inverse of to_spectral (unnormalised synthesis).
PixelField to_pixel(const SpectralField& spec);

/// Adjoint of to_spectral with respect to the Euclidean inner products on
/// both grids. Used to back-propagate spectral-space losses to pixels.
PixelField spectral_adjoint(const SpectralField& grad);

/// True for the four slots whose wavenumber is its own mirror image.
bool self_conjugate(int row, int col, const Shape& shape);

/// 1 for self-conjugate slots, 2 otherwise: the number of full-grid DFT
/// coefficients a packed value stands for.
double packing_weight(int row, int col, const Shape& shape);

/// sum_k |X(k)|^2 over the full grid, i.e. sum of packing_weight * value^2.
/// Parseval: sum_pixels x^2 == N1*N2 * packed_energy(to_spectral(x)).
double packed_energy(const SpectralField& spec);

/// Expands the packed representation back to all complex coefficients.
ComplexSpectrum unpack(const SpectralField& spec);

/// |X(k)|^2 at every slot of the grid (layout as the packed field).
std::vector<double> power_spectrum(const SpectralField& spec);

struct RadialBin {
  double radius = 0.0;      ///< mean |k| of the members
  double mean_power = 0.0;  ///< mean |X(k)|^2 of the members, across channels
  std::size_t count = 0;    ///< grid frequencies per channel in the bin
};

/// Mean power by Euclidean wavenumber radius. Bins are equal-width on
/// [0, |k|max]; empty bins are dropped, so radii are strictly increasing and
/// counts sum to N1*N2.
using RadialProfile = std::vector<RadialBin>;

RadialProfile radial_profile(const SpectralField& spec, int n_bins);
/// Same binning for a precomputed per-slot power array (e.g. a dataset mean).
RadialProfile radial_profile_of_power(std::span<const double> power,
                                      const Shape& shape, int n_bins);

}  // namespace inspect

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "../oracles/direct_dft.hpp"
#include "inspect/rng.hpp"
#include "inspect/spectral.hpp"
#include "inspect/stats.hpp"

using namespace inspect;

namespace {

PixelField random_image(Shape s, std::uint64_t seed) {
  Rng rng = Rng::derive(seed, "test/image");
  PixelField f(s);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.uniform();
  return f;
}

std::vector<double> as_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("constant image has only a DC coefficient") {
  const Shape s{1, 8, 6};
  const SpectralField X = to_spectral(PixelField(s, 0.37));
  CHECK(X.at(0, 0, 0) == doctest::Approx(0.37).epsilon(1e-12));
  for (std::size_t i = 1; i < X.size(); ++i) CHECK(std::abs(X[i]) < 1e-12);
}

TEST_CASE("4x4 impulse gives 1/16 in every real slot and zero sine parts") {
  const Shape s{1, 4, 4};
  PixelField img(s);
  img.at(0, 0, 0) = 1.0;
  const SpectralField X = to_spectral(img);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const int k1 = signed_frequency(r, 4), k2 = signed_frequency(c, 4);
      const bool sine = k2 < 0 || ((k2 == 0 || k2 == 2) && k1 < 0);
      CHECK(X.at(0, r, c) == doctest::Approx(sine ? 0.0 : 1.0 / 16.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("packing matches direct summation on small grids") {
  for (auto [n1, n2] : {std::pair{4, 4}, std::pair{6, 8}, std::pair{2, 2}, std::pair{8, 6}}) {
    const Shape s{1, n1, n2};
    const PixelField img = random_image(s, 100 + n1 * 10 + n2);
    const oracle::Grid g{n1, n2};
    const auto expected = oracle::pack(oracle::forward(as_vector(img.values()), g), g);
    const SpectralField X = to_spectral(img);
    CHECK(max_abs_diff(X.values(), expected) < 1e-10);
  }
}

TEST_CASE("to_pixel matches the direct inverse sum") {
  for (auto [n1, n2] : {std::pair{4, 4}, std::pair{6, 8}}) {
    const Shape s{1, n1, n2};
    Rng rng = Rng::derive(5, "test/spec");
    SpectralField X(s);
    for (std::size_t i = 0; i < X.size(); ++i) X[i] = rng.normal();
    const oracle::Grid g{n1, n2};
    const auto expected = oracle::inverse(oracle::unpack(as_vector(X.values()), g), g);
    CHECK(max_abs_diff(to_pixel(X).values(), expected) < 1e-10);
  }
}

TEST_CASE("packing is a bijection: every basis vector round-trips") {
  for (auto [n1, n2] : {std::pair{4, 4}, std::pair{6, 8}}) {
    const Shape s{1, n1, n2};
    for (std::size_t i = 0; i < s.size(); ++i) {
      SpectralField e(s);
      e[i] = 1.0;
      const SpectralField back = to_spectral(to_pixel(e));
      CHECK(max_abs_diff(back.values(), e.values()) < 1e-12);
      PixelField p(s);
      p[i] = 1.0;
      CHECK(max_abs_diff(to_pixel(to_spectral(p)).values(), p.values()) < 1e-12);
    }
  }
}

TEST_CASE("round trip on random multi-channel 32x32 fields") {
  const Shape s{3, 32, 32};
  const PixelField img = random_image(s, 9);
  CHECK(max_abs_diff(to_pixel(to_spectral(img)).values(), img.values()) < 1e-9);
}

TEST_CASE("zero and DC-only spectra invert to zero and constant images") {
  const Shape s{1, 8, 8};
  const PixelField zero = to_pixel(SpectralField(s));
  for (double v : zero.values()) CHECK(v == 0.0);
  SpectralField dc(s);
  dc.at(0, 0, 0) = 0.25;
  {
      const auto field = to_pixel(dc);
      for (double v : field.values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
    }
}

TEST_CASE("Parseval with packing weights") {
  const Shape s{2, 16, 12};
  const PixelField img = random_image(s, 11);
  double lhs = 0.0;
  for (double v : img.values()) lhs += v * v;
  const double rhs = 16.0 * 12.0 * packed_energy(to_spectral(img));
  CHECK(std::abs(lhs - rhs) / lhs < 1e-9);
}

TEST_CASE("linearity") {
  const Shape s{1, 8, 10};
  const PixelField x = random_image(s, 1), y = random_image(s, 2);
  PixelField z(s);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = 2.5 * x[i] - 0.75 * y[i];
  const SpectralField X = to_spectral(x), Y = to_spectral(y), Z = to_spectral(z);
  for (std::size_t i = 0; i < Z.size(); ++i) CHECK(std::abs(Z[i] - (2.5 * X[i] - 0.75 * Y[i])) < 1e-12);
}

TEST_CASE("adjoint satisfies <F x, g> == <x, F* g>") {
  const Shape s{1, 6, 8};
  const PixelField x = random_image(s, 3);
  Rng rng = Rng::derive(4, "test/adjoint");
  SpectralField g(s);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.normal();
  const SpectralField Fx = to_spectral(x);
  const PixelField Fg = spectral_adjoint(g);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    lhs += Fx[i] * g[i];
    rhs += x[i] * Fg[i];
  }
  CHECK(std::abs(lhs - rhs) < 1e-13);
}

TEST_CASE("unpacked spectrum is Hermitian and equals the direct DFT") {
  const Shape s{1, 6, 8};
  const PixelField img = random_image(s, 21);
  const ComplexSpectrum full = unpack(to_spectral(img));
  const auto direct = oracle::forward(as_vector(img.values()), {6, 8});
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 8; ++c) {
      CHECK(std::abs(full.at(0, r, c) - direct[r * 8 + c]) < 1e-12);
      const auto mirror = full.at(0, (6 - r) % 6, (8 - c) % 8);
      CHECK(std::abs(std::abs(full.at(0, r, c)) - std::abs(mirror)) < 1e-12);
    }
  }
}

TEST_CASE("transform rejects odd grids and non-finite input") {
  CHECK_THROWS_AS(to_spectral(PixelField(Shape{1, 5, 4})), ShapeError);
  PixelField bad(Shape{1, 4, 4});
  bad[3] = std::nan("");
  CHECK_THROWS_AS(to_spectral(bad), NonFiniteError);
}

TEST_CASE("radial profile: DC-only puts all energy in the first bin") {
  const Shape s{1, 16, 16};
  SpectralField dc(s);
  dc.at(0, 0, 0) = 2.0;
  const RadialProfile p = radial_profile(dc, 8);
  REQUIRE(p.size() >= 2);
  CHECK(p.front().mean_power > 0.0);
  for (std::size_t b = 1; b < p.size(); ++b) CHECK(p[b].mean_power == 0.0);
  std::size_t total = 0;
  for (const auto& bin : p) total += bin.count;
  CHECK(total == s.plane());
  for (std::size_t b = 1; b < p.size(); ++b) CHECK(p[b].radius > p[b - 1].radius);
}

TEST_CASE("radial profile of white noise is flat") {
  // White pixel noise has E|X(k)|^2 = 1/(N1 N2) at every wavenumber.
  const Shape s{1, 16, 16};
  const int draws = 100000 / 256 + 1;
  std::vector<double> power(s.size(), 0.0);
  Rng rng = Rng::derive(8, "test/white");
  for (int d = 0; d < draws * 4; ++d) {
    PixelField img(s);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = rng.normal();
    const auto p = power_spectrum(to_spectral(img));
    for (std::size_t i = 0; i < p.size(); ++i) power[i] += p[i] / (draws * 4);
  }
  const RadialProfile prof = radial_profile_of_power(power, s, 6);
  for (const auto& bin : prof) {
    CHECK(std::abs(bin.mean_power * 256.0 - 1.0) < 0.05);
  }
}

TEST_CASE("radial profile recovers a k^-2 law") {
  // |X(k)|^2 = |k|^-2 built directly on the full grid.
  const Shape s{1, 64, 64};
  std::vector<double> power(s.size(), 0.0);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) {
      const double k = std::hypot(signed_frequency(r, 64), signed_frequency(c, 64));
      power[r * 64 + c] = k > 0 ? 1.0 / (k * k) : 0.0;
    }
  }
  const RadialProfile prof = radial_profile_of_power(power, s, 24);
  const PowerLawFit fit = power_law_fit(prof, 2.0, 32.0);
  CHECK(fit.exponent == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("packing weights mark exactly four self-conjugate slots") {
  const Shape s{1, 6, 8};
  int selfc = 0;
  double weight_sum = 0.0;
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 8; ++c) {
      selfc += self_conjugate(r, c, s);
      weight_sum += packing_weight(r, c, s);
    }
  }
  CHECK(selfc == 4);
  CHECK(weight_sum == doctest::Approx(2.0 * 48 - 4));
}

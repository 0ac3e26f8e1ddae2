#pragma once

// Reference transforms by direct O(N^4) summation, written against the
// packing table only. Nothing here calls the library's transform code.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace oracle {

struct Grid {
  int n1 = 0;
  int n2 = 0;
};

inline int wrap(int k, int n) { return ((k % n) + n) % n; }
inline int signed_k(int i, int n) { return i <= n / 2 ? i : i - n; }

/// X(k1, k2) = 1/(N1 N2) sum_n x(n) exp(-2 pi i (k1 n1 / N1 + k2 n2 / N2)), row-major.
inline std::vector<std::complex<double>> forward(const std::vector<double>& x, Grid g) {
  std::vector<std::complex<double>> out(x.size());
  const double two_pi = 2.0 * std::numbers::pi;
  for (int k1 = 0; k1 < g.n1; ++k1) {
    for (int k2 = 0; k2 < g.n2; ++k2) {
      std::complex<double> acc = 0.0;
      for (int a = 0; a < g.n1; ++a) {
        for (int b = 0; b < g.n2; ++b) {
          const double phase = -two_pi * (static_cast<double>(k1) * a / g.n1 +
                                          static_cast<double>(k2) * b / g.n2);
          acc += x[a * g.n2 + b] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
      }
      out[k1 * g.n2 + k2] = acc / static_cast<double>(g.n1 * g.n2);
    }
  }
  return out;
}

/// Packs a full spectrum per the documented table.
inline std::vector<double> pack(const std::vector<std::complex<double>>& X, Grid g) {
  const auto at = [&](int k1, int k2) { return X[wrap(k1, g.n1) * g.n2 + wrap(k2, g.n2)]; };
  std::vector<double> out(X.size());
  for (int r = 0; r < g.n1; ++r) {
    for (int c = 0; c < g.n2; ++c) {
      const int k1 = signed_k(r, g.n1);
      const int k2 = signed_k(c, g.n2);
      double v;
      if (k2 > 0 && k2 < g.n2 / 2) {
        v = at(k1, k2).real();
      } else if (k2 < 0) {
        v = -at(k1, -k2).imag();
      } else if (k1 > 0 && k1 < g.n1 / 2) {
        v = at(k1, k2).real();
      } else if (k1 < 0) {
        v = -at(-k1, k2).imag();
      } else {
        v = at(k1, k2).real();
      }
      out[r * g.n2 + c] = v;
    }
  }
  return out;
}

/// Full complex spectrum represented by a packed field.
inline std::vector<std::complex<double>> unpack(const std::vector<double>& p, Grid g) {
  const auto P = [&](int k1, int k2) { return p[wrap(k1, g.n1) * g.n2 + wrap(k2, g.n2)]; };
  std::vector<std::complex<double>> X(p.size());
  for (int r = 0; r < g.n1; ++r) {
    for (int c = 0; c < g.n2; ++c) {
      const int k1 = signed_k(r, g.n1);
      const int k2 = signed_k(c, g.n2);
      std::complex<double> v;
      if (k2 > 0 && k2 < g.n2 / 2) {
        v = {P(k1, k2), -P(k1, -k2)};
      } else if (k2 < 0) {
        v = {P(-k1, -k2), P(-k1, k2)};
      } else if (k1 > 0 && k1 < g.n1 / 2) {
        v = {P(k1, k2), -P(-k1, k2)};
      } else if (k1 < 0) {
        v = {P(-k1, k2), P(k1, k2)};
      } else {
        v = {P(k1, k2), 0.0};
      }
      X[r * g.n2 + c] = v;
    }
  }
  return X;
}

/// x(n) = sum_k X(k) exp(+2 pi i k.n / N), real part.
inline std::vector<double> inverse(const std::vector<std::complex<double>>& X, Grid g) {
  std::vector<double> out(X.size());
  const double two_pi = 2.0 * std::numbers::pi;
  for (int a = 0; a < g.n1; ++a) {
    for (int b = 0; b < g.n2; ++b) {
      std::complex<double> acc = 0.0;
      for (int k1 = 0; k1 < g.n1; ++k1) {
        for (int k2 = 0; k2 < g.n2; ++k2) {
          const double phase = two_pi * (static_cast<double>(k1) * a / g.n1 +
                                         static_cast<double>(k2) * b / g.n2);
          acc += X[k1 * g.n2 + k2] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
      }
      out[a * g.n2 + b] = acc.real();
    }
  }
  return out;
}

}  // namespace oracle

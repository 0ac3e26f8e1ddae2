#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "inspect/errors.hpp"

namespace inspect {

/// Channel-major image grid dimensions.
struct Shape {
  int channels = 1;
  int height = 0;
  int width = 0;

  [[nodiscard]] std::size_t plane() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  [[nodiscard]] std::size_t size() const {
    return plane() * static_cast<std::size_t>(channels);
  }
  [[nodiscard]] bool even() const { return height % 2 == 0 && width % 2 == 0; }
  [[nodiscard]] std::string str() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Throws ShapeError unless all dimensions are positive.
void require_valid(const Shape& shape);
/// Throws ShapeError unless the spatial dimensions are even.
void require_even(const Shape& shape);
void require_same(const Shape& a, const Shape& b, const char* what);

/// Dense real grid with a domain tag, so pixel-space and spectral-space
/// values cannot be mixed by accident. Storage is [channel][row][col].
template <class Domain>
class Field {
 public:
  Field() = default;
  explicit Field(Shape shape, double fill = 0.0)
      : shape_(shape), values_(shape.size(), fill) {
    require_valid(shape);
  }
  Field(Shape shape, std::vector<double> values)
      : shape_(shape), values_(std::move(values)) {
    require_valid(shape);
    if (values_.size() != shape.size()) {
      throw ShapeError("field of shape " + shape.str() + " needs " +
                       std::to_string(shape.size()) + " values, got " +
                       std::to_string(values_.size()));
    }
  }

  [[nodiscard]] const Shape& shape() const { return shape_; }
  [[nodiscard]] std::size_t size() const { return values_.size(); }

  [[nodiscard]] double& at(int c, int row, int col) {
    return values_[index(c, row, col)];
  }
  [[nodiscard]] double at(int c, int row, int col) const {
    return values_[index(c, row, col)];
  }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  [[nodiscard]] std::span<double> values() { return values_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<double> channel(int c) {
    return std::span<double>(values_).subspan(c * shape_.plane(), shape_.plane());
  }
  [[nodiscard]] std::span<const double> channel(int c) const {
    return std::span<const double>(values_).subspan(c * shape_.plane(),
                                                    shape_.plane());
  }
  [[nodiscard]] std::vector<double>&& release() && { return std::move(values_); }

  [[nodiscard]] bool all_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  [[nodiscard]] std::size_t index(int c, int row, int col) const {
    return (static_cast<std::size_t>(c) * shape_.height + row) * shape_.width + col;
  }

  Shape shape_{};
  std::vector<double> values_;
};

struct PixelDomain {};
struct SpectralDomain {};

/// Image values on the spatial grid (x_t, x_0).
using PixelField = Field<PixelDomain>;
/// Real-packed Fourier coefficients on the same grid (x̂_t, x̂_0).
using SpectralField = Field<SpectralDomain>;

double l2_distance(std::span<const double> a, std::span<const double> b);

}  // namespace inspect

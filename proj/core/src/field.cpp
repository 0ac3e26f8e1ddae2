#include "inspect/field.hpp"

namespace inspect {

std::string Shape::str() const {
  return "[" + std::to_string(channels) + "," + std::to_string(height) + "," +
         std::to_string(width) + "]";
}

void require_valid(const Shape& shape) {
  if (shape.channels <= 0 || shape.height <= 0 || shape.width <= 0) {
    throw ShapeError("invalid grid shape " + shape.str());
  }
}

void require_even(const Shape& shape) {
  require_valid(shape);
  if (!shape.even()) {
    throw ShapeError("grid dimensions must be even, got " + shape.str());
  }
}

void require_same(const Shape& a, const Shape& b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.str() + " vs " +
                     b.str());
  }
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("l2_distance: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace inspect

#pragma once

#include <functional>

#include "inspect/field.hpp"

namespace inspect {

/// Pixel-space x0 predictor m(x_t, t). Implementations must return a field
/// of the input's shape and be deterministic and safe to call concurrently.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  /// `t` is the current timestep in [1, steps] of a chain with `steps` steps.
  [[nodiscard]] virtual PixelField predict(const PixelField& noisy, int t,
                                           int steps) const = 0;
};

/// Wraps a plain callable; handy for oracles and fixed predictors.
class FunctionDenoiser final : public Denoiser {
 public:
  using Fn = std::function<PixelField(const PixelField&, int, int)>;
  explicit FunctionDenoiser(Fn fn) : fn_(std::move(fn)) {}
  [[nodiscard]] PixelField predict(const PixelField& noisy, int t, int steps) const override {
    return fn_(noisy, t, steps);
  }

 private:
  Fn fn_;
};

}  // namespace inspect

#pragma once

#include <any>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "inspect/denoiser.hpp"
#include "inspect/field.hpp"

namespace inspect {

/// A denoiser whose parameters can be trained by gradient descent.
class TrainableDenoiser : public Denoiser {
 public:
  struct Pass {
    PixelField output;
    std::any cache;
  };

  [[nodiscard]] virtual Pass forward(const PixelField& noisy, int t, int steps) const = 0;
  /// Accumulates dL/dtheta into `grad` given dL/doutput.
  virtual void backward(const Pass& pass, const PixelField& grad_output,
                        std::span<double> grad) const = 0;

  [[nodiscard]] virtual std::span<double> parameters() = 0;
  [[nodiscard]] virtual std::span<const double> parameters() const = 0;

  [[nodiscard]] PixelField predict(const PixelField& noisy, int t, int steps) const override {
    return forward(noisy, t, steps).output;
  }
};

struct ConvDenoiserConfig {
  Shape shape{1, 32, 32};
  int hidden = 8;          ///< feature maps per hidden stage
  int stages = 3;          ///< 3x3 convolution stages, 2..4 (first and last included)
  bool nonlinear = true;   ///< SiLU between stages; false gives a linear map
  bool input_skip = true;  ///< output = input + residual_scale(t) * network(input)

  friend bool operator==(const ConvDenoiserConfig&, const ConvDenoiserConfig&) = default;
};

inline constexpr int kTimeFrequencies = 8;
inline constexpr int kTimeFeatures = 2 * kTimeFrequencies;

/// sin(pi/2 * t/steps): shrinks the learned correction as the noise level falls.
double residual_scale(int t, int steps);

/// sin/cos of (t/steps) * pi * 2^j for j = 0..7.
std::vector<double> timestep_embedding(int t, int steps);

/// Small residual convolution network: `stages` zero-padded 3x3 convolutions,
/// SiLU after every stage but the last, and a learned linear projection of
/// the timestep embedding added as a per-channel bias to every hidden stage.
class ConvDenoiser final : public TrainableDenoiser {
 public:
  explicit ConvDenoiser(ConvDenoiserConfig config);

  /// He-style initialisation from Rng::derive(seed, "init").
  static ConvDenoiser initialised(const ConvDenoiserConfig& config, std::uint64_t seed);

  [[nodiscard]] Pass forward(const PixelField& noisy, int t, int steps) const override;
  void backward(const Pass& pass, const PixelField& grad_output,
                std::span<double> grad) const override;

  [[nodiscard]] std::span<double> parameters() override { return params_; }
  [[nodiscard]] std::span<const double> parameters() const override { return params_; }
  [[nodiscard]] const ConvDenoiserConfig& config() const { return config_; }

  static std::size_t parameter_count(const ConvDenoiserConfig& config);

 private:
  struct Stage {
    int in = 0;
    int out = 0;
    std::size_t weight = 0;  ///< offset of out*in*9 kernel weights
    std::size_t bias = 0;    ///< offset of out biases
    std::size_t time = 0;    ///< offset of out*kTimeFeatures projection, hidden stages only
    bool has_time = false;
  };

  ConvDenoiserConfig config_;
  std::vector<Stage> layout_;
  std::vector<double> params_;
};

}  // namespace inspect

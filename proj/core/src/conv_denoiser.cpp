#include "inspect/conv_denoiser.hpp"

#include <cmath>
#include <numbers>

#include "inspect/rng.hpp"

namespace inspect {

namespace {

struct Activations {
  std::vector<double> embedding;
  // inputs[s] is the input of stage s; pre[s] its pre-activation.
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> pre;
  double residual_scale = 1.0;
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Zero-padded 3x3 convolution, accumulating into `out` (out-major maps).
void conv3x3(const double* in, int in_ch, const double* w, double* out, int out_ch, int h,
             int wd) {
  const std::size_t plane = static_cast<std::size_t>(h) * wd;
  for (int o = 0; o < out_ch; ++o) {
    double* dst = out + o * plane;
    for (int i = 0; i < in_ch; ++i) {
      const double* src = in + i * plane;
      const double* k = w + (static_cast<std::size_t>(o) * in_ch + i) * 9;
      for (int dy = -1; dy <= 1; ++dy) {
        const int y0 = dy < 0 ? 1 : 0;
        const int y1 = dy > 0 ? h - 1 : h;
        for (int dx = -1; dx <= 1; ++dx) {
          const double kv = k[(dy + 1) * 3 + (dx + 1)];
          const int x0 = dx < 0 ? 1 : 0;
          const int x1 = dx > 0 ? wd - 1 : wd;
          for (int y = y0; y < y1; ++y) {
            const double* s = src + (y + dy) * wd + dx;
            double* d = dst + y * wd;
            for (int x = x0; x < x1; ++x) d[x] += kv * s[x];
          }
        }
      }
    }
  }
}

// Gradients of conv3x3: kernel grads into gw, input grads into gin (if set).
void conv3x3_backward(const double* in, int in_ch, const double* w, const double* gout,
                      int out_ch, int h, int wd, double* gw, double* gin) {
  const std::size_t plane = static_cast<std::size_t>(h) * wd;
  for (int o = 0; o < out_ch; ++o) {
    const double* g = gout + o * plane;
    for (int i = 0; i < in_ch; ++i) {
      const double* src = in + i * plane;
      double* gi = gin ? gin + i * plane : nullptr;
      const std::size_t kidx = (static_cast<std::size_t>(o) * in_ch + i) * 9;
      for (int dy = -1; dy <= 1; ++dy) {
        const int y0 = dy < 0 ? 1 : 0;
        const int y1 = dy > 0 ? h - 1 : h;
        for (int dx = -1; dx <= 1; ++dx) {
          const int tap = (dy + 1) * 3 + (dx + 1);
          const double kv = w[kidx + tap];
          const int x0 = dx < 0 ? 1 : 0;
          const int x1 = dx > 0 ? wd - 1 : wd;
          double acc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* s = src + (y + dy) * wd + dx;
            const double* gy = g + y * wd;
            for (int x = x0; x < x1; ++x) acc += gy[x] * s[x];
            if (gi) {
              double* d = gi + (y + dy) * wd + dx;
              for (int x = x0; x < x1; ++x) d[x] += kv * gy[x];
            }
          }
          gw[kidx + tap] += acc;
        }
      }
    }
  }
}

}  // namespace

double residual_scale(int t, int steps) {
  return std::sin(0.5 * std::numbers::pi * static_cast<double>(t) / std::max(1, steps));
}

std::vector<double> timestep_embedding(int t, int steps) {
  const double tau = static_cast<double>(t) / std::max(1, steps);
  std::vector<double> e(kTimeFeatures);
  for (int j = 0; j < kTimeFrequencies; ++j) {
    const double w = std::numbers::pi * std::ldexp(1.0, j) * tau;
    e[2 * j] = std::sin(w);
    e[2 * j + 1] = std::cos(w);
  }
  return e;
}

ConvDenoiser::ConvDenoiser(ConvDenoiserConfig config) : config_(config) {
  require_valid(config_.shape);
  if (config_.stages < 2 || config_.stages > 4) {
    throw DomainError("ConvDenoiser: stages must be in [2, 4]");
  }
  if (config_.hidden < 1) throw DomainError("ConvDenoiser: hidden must be >= 1");
  std::size_t offset = 0;
  for (int s = 0; s < config_.stages; ++s) {
    Stage st;
    st.in = s == 0 ? config_.shape.channels : config_.hidden;
    st.out = s == config_.stages - 1 ? config_.shape.channels : config_.hidden;
    st.has_time = s < config_.stages - 1;
    st.weight = offset;
    offset += static_cast<std::size_t>(st.out) * st.in * 9;
    st.bias = offset;
    offset += st.out;
    if (st.has_time) {
      st.time = offset;
      offset += static_cast<std::size_t>(st.out) * kTimeFeatures;
    }
    layout_.push_back(st);
  }
  params_.assign(offset, 0.0);
}

std::size_t ConvDenoiser::parameter_count(const ConvDenoiserConfig& config) {
  return ConvDenoiser(config).params_.size();
}

ConvDenoiser ConvDenoiser::initialised(const ConvDenoiserConfig& config, std::uint64_t seed) {
  ConvDenoiser net(config);
  Rng rng = Rng::derive(seed, "init");
  for (std::size_t s = 0; s < net.layout_.size(); ++s) {
    const Stage& st = net.layout_[s];
    const bool last = s + 1 == net.layout_.size();
    // The last stage starts small so the skip path dominates initially.
    const double scale = (last ? 0.1 : 1.0) * std::sqrt(2.0 / (9.0 * st.in));
    for (std::size_t i = 0; i < static_cast<std::size_t>(st.out) * st.in * 9; ++i) {
      net.params_[st.weight + i] = scale * rng.normal();
    }
    if (st.has_time) {
      const double tscale = 0.1 / std::sqrt(static_cast<double>(kTimeFeatures));
      for (std::size_t i = 0; i < static_cast<std::size_t>(st.out) * kTimeFeatures; ++i) {
        net.params_[st.time + i] = tscale * rng.normal();
      }
    }
  }
  return net;
}

TrainableDenoiser::Pass ConvDenoiser::forward(const PixelField& noisy, int t, int steps) const {
  require_same(noisy.shape(), config_.shape, "ConvDenoiser");
  const int h = config_.shape.height;
  const int w = config_.shape.width;
  const std::size_t plane = config_.shape.plane();

  Activations act;
  act.embedding = timestep_embedding(t, steps);
  std::vector<double> x(noisy.values().begin(), noisy.values().end());
  for (const Stage& st : layout_) {
    std::vector<double> pre(plane * st.out);
    for (int o = 0; o < st.out; ++o) {
      double bias = params_[st.bias + o];
      if (st.has_time) {
        for (int f = 0; f < kTimeFeatures; ++f) {
          bias += params_[st.time + o * kTimeFeatures + f] * act.embedding[f];
        }
      }
      std::fill(pre.begin() + o * plane, pre.begin() + (o + 1) * plane, bias);
    }
    conv3x3(x.data(), st.in, params_.data() + st.weight, pre.data(), st.out, h, w);
    act.inputs.push_back(std::move(x));
    x = pre;
    if (st.has_time && config_.nonlinear) {
      for (double& v : x) v = v * sigmoid(v);
    }
    act.pre.push_back(std::move(pre));
  }
  if (config_.input_skip) {
    act.residual_scale = residual_scale(t, steps);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = noisy[i] + act.residual_scale * x[i];
  }
  Pass pass{PixelField(config_.shape, std::move(x)), {}};
  pass.cache = std::move(act);
  return pass;
}

void ConvDenoiser::backward(const Pass& pass, const PixelField& grad_output,
                            std::span<double> grad) const {
  require_same(grad_output.shape(), config_.shape, "ConvDenoiser::backward");
  if (grad.size() != params_.size()) throw ShapeError("ConvDenoiser: gradient size mismatch");
  const auto& act = std::any_cast<const Activations&>(pass.cache);
  const int h = config_.shape.height;
  const int w = config_.shape.width;
  const std::size_t plane = config_.shape.plane();

  std::vector<double> g(grad_output.values().begin(), grad_output.values().end());
  for (double& v : g) v *= act.residual_scale;
  for (int s = static_cast<int>(layout_.size()) - 1; s >= 0; --s) {
    const Stage& st = layout_[s];
    const auto& pre = act.pre[s];
    if (st.has_time && config_.nonlinear) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double sg = sigmoid(pre[i]);
        g[i] *= sg * (1.0 + pre[i] * (1.0 - sg));
      }
    }
    for (int o = 0; o < st.out; ++o) {
      double sum = 0.0;
      for (std::size_t i = 0; i < plane; ++i) sum += g[o * plane + i];
      grad[st.bias + o] += sum;
      if (st.has_time) {
        for (int f = 0; f < kTimeFeatures; ++f) {
          grad[st.time + o * kTimeFeatures + f] += sum * act.embedding[f];
        }
      }
    }
    std::vector<double> gin;
    if (s > 0) gin.assign(plane * st.in, 0.0);
    conv3x3_backward(act.inputs[s].data(), st.in, params_.data() + st.weight, g.data(), st.out,
                     h, w, grad.data() + st.weight, s > 0 ? gin.data() : nullptr);
    g = std::move(gin);
  }
}

}  // namespace inspect

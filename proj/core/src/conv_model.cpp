#include "uq/conv_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "uq/filter.hpp"
#include "uq/losses.hpp"

namespace uq {
namespace {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Shape {
  std::size_t h, w;
  std::size_t ph() const { return h + 2; }
  std::size_t pw() const { return w + 2; }
  std::size_t plane() const { return h * w; }
  std::size_t padded_plane() const { return ph() * pw(); }
};

// Copies channel planes into a zero-bordered buffer.
std::vector<double> pad(const std::vector<double>& planes, std::size_t channels, const Shape& s) {
  std::vector<double> out(channels * s.padded_plane(), 0.0);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t i = 0; i < s.h; ++i)
      std::copy_n(planes.data() + c * s.plane() + i * s.w, s.w,
                  out.data() + c * s.padded_plane() + (i + 1) * s.pw() + 1);
  return out;
}

void conv_forward(const ConvLayer& layer, const std::vector<double>& in_pad, const Shape& s,
                  std::vector<double>& out) {
  out.assign(layer.out_channels * s.plane(), 0.0);
  for (std::size_t co = 0; co < layer.out_channels; ++co) {
    double* dst_plane = out.data() + co * s.plane();
    std::fill_n(dst_plane, s.plane(), layer.bias[co]);
    for (std::size_t ci = 0; ci < layer.in_channels; ++ci) {
      const double* w = layer.weight.data() + (co * layer.in_channels + ci) * 9;
      const double* src_plane = in_pad.data() + ci * s.padded_plane();
      for (std::size_t i = 0; i < s.h; ++i) {
        double* __restrict dst = dst_plane + i * s.w;
        for (std::size_t ky = 0; ky < 3; ++ky) {
          const double* row = src_plane + (i + ky) * s.pw();
          for (std::size_t kx = 0; kx < 3; ++kx) {
            const double wk = w[ky * 3 + kx];
            const double* __restrict src = row + kx;
            for (std::size_t j = 0; j < s.w; ++j) dst[j] += wk * src[j];
          }
        }
      }
    }
  }
}

// Accumulates dW, db and (optionally) the gradient w.r.t. the padded input.
void conv_backward(const ConvLayer& layer, const std::vector<double>& in_pad,
                   const std::vector<double>& dout, const Shape& s, ConvLayer& grad,
                   std::vector<double>* din_pad) {
  if (din_pad) din_pad->assign(layer.in_channels * s.padded_plane(), 0.0);
  // Per-column partial sums keep the weight-gradient reduction vectorizable
  // without reassociating floating-point adds.
  std::vector<double> partial(9 * s.w);
  for (std::size_t co = 0; co < layer.out_channels; ++co) {
    const double* g_plane = dout.data() + co * s.plane();
    double db = 0.0;
    for (std::size_t p = 0; p < s.plane(); ++p) db += g_plane[p];
    grad.bias[co] += db;
    for (std::size_t ci = 0; ci < layer.in_channels; ++ci) {
      const std::size_t wi = (co * layer.in_channels + ci) * 9;
      const double* w = layer.weight.data() + wi;
      const double* src_plane = in_pad.data() + ci * s.padded_plane();
      std::fill(partial.begin(), partial.end(), 0.0);
      for (std::size_t i = 0; i < s.h; ++i) {
        const double* __restrict g = g_plane + i * s.w;
        for (std::size_t ky = 0; ky < 3; ++ky) {
          const double* row = src_plane + (i + ky) * s.pw();
          for (std::size_t kx = 0; kx < 3; ++kx) {
            const double* __restrict src = row + kx;
            double* __restrict acc = partial.data() + (ky * 3 + kx) * s.w;
            for (std::size_t j = 0; j < s.w; ++j) acc[j] += g[j] * src[j];
          }
        }
        if (din_pad) {
          double* dplane = din_pad->data() + ci * s.padded_plane();
          for (std::size_t ky = 0; ky < 3; ++ky) {
            double* row = dplane + (i + ky) * s.pw();
            for (std::size_t kx = 0; kx < 3; ++kx) {
              const double wk = w[ky * 3 + kx];
              double* __restrict dst = row + kx;
              for (std::size_t j = 0; j < s.w; ++j) dst[j] += wk * g[j];
            }
          }
        }
      }
      for (std::size_t k = 0; k < 9; ++k) {
        double sum = 0.0;
        for (std::size_t j = 0; j < s.w; ++j) sum += partial[k * s.w + j];
        grad.weight[wi + k] += sum;
      }
    }
  }
}

struct ForwardPass {
  Shape shape{};
  std::vector<std::vector<double>> inputs;  // padded input of each layer
  std::vector<std::vector<double>> pre;     // pre-activation of each layer
  std::vector<double> heads;                // sigmoid outputs, head-major
};

ForwardPass run_forward(const ConvModel& model, const Image& x) {
  if (model.layers.empty()) throw ParameterError("model has no layers");
  if (model.layers.front().in_channels != 1)
    throw ParameterError("first layer must take one input channel");
  if (model.layers.back().out_channels != head_count(model.mode))
    throw ParameterError("head layer channel count does not match mode " + to_string(model.mode));

  ForwardPass fp;
  fp.shape = {x.rows(), x.cols()};
  const Shape& s = fp.shape;
  const Image z0 = normalize_zero_mean_unit_std(x);
  std::vector<double> act(z0.begin(), z0.end());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    fp.inputs.push_back(pad(act, layer.in_channels, s));
    std::vector<double> z;
    conv_forward(layer, fp.inputs.back(), s, z);
    const bool is_head = l + 1 == model.layers.size();
    act.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!std::isfinite(z[i]))
        throw NumericError("non-finite activation in layer " + std::to_string(l));
      act[i] = is_head ? sigmoid(z[i]) : (z[i] > 0.0 ? z[i] : model.leaky_slope * z[i]);
    }
    fp.pre.push_back(std::move(z));
  }
  fp.heads = std::move(act);
  return fp;
}

QuantileFields fields_from_heads(const ConvModel& model, const std::vector<double>& heads,
                                 const Image& x) {
  const std::size_t n = x.size();
  QuantileFields f{Image(x.rows(), x.cols()), Image(x.rows(), x.cols()), Image(x.rows(), x.cols()),
                   Image(x.rows(), x.cols())};
  const std::size_t upper = model.mode == HeadMode::kQuantile ? 1 : 0;
  for (std::size_t p = 0; p < n; ++p) {
    f.o_l[p] = heads[p];
    f.o_u[p] = heads[upper * n + p];
    f.l_tilde[p] = x[p] * (1.0 - f.o_l[p]);
    f.u_tilde[p] = x[p] * (1.0 + f.o_u[p]);
  }
  return f;
}

void check_pair(const Image& x, const Image& y) {
  require_same_shape(x, y, "model input/target");
}

// Loss and dL/d(head output) for every head pixel.
double head_loss(const ConvModel& model, const QuantileFields& f, const Image& x, const Image& y,
                 double coverage_target, const Mask* exclude, std::vector<double>* dheads) {
  if (!(coverage_target > 0.0 && coverage_target < 1.0))
    throw ParameterError("coverage_target must lie in (0, 1)");
  const std::size_t n = x.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  if (dheads) dheads->assign(head_count(model.mode) * n, 0.0);
  if (model.mode == HeadMode::kQuantile) {
    const double alpha = 1.0 - coverage_target;
    const double lo_level = alpha / 2.0;
    const double hi_level = 1.0 - alpha / 2.0;
    double sum_l = 0.0;
    double sum_u = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      if (exclude && (*exclude)[p]) continue;
      const double l = f.l_tilde[p];
      const double u = f.u_tilde[p];
      sum_l += y[p] > l ? lo_level * (y[p] - l) : (1.0 - lo_level) * (l - y[p]);
      sum_u += y[p] > u ? hi_level * (y[p] - u) : (1.0 - hi_level) * (u - y[p]);
      if (dheads) {
        const double ol = f.o_l[p];
        const double ou = f.o_u[p];
        (*dheads)[p] = inv_n * pinball_subgradient(l, y[p], lo_level) * (-x[p]) * ol * (1.0 - ol);
        (*dheads)[n + p] = inv_n * pinball_subgradient(u, y[p], hi_level) * x[p] * ou * (1.0 - ou);
      }
    }
    return sum_l * inv_n + sum_u * inv_n;
  }
  double sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    if (exclude && (*exclude)[p]) continue;
    const double o = f.o_u[p];
    const double diff = x[p] * o - std::abs(x[p] - y[p]);
    sum += diff * diff;
    if (dheads) (*dheads)[p] = inv_n * 2.0 * diff * x[p] * o * (1.0 - o);
  }
  return sum * inv_n;
}

}  // namespace

std::string to_string(HeadMode mode) { return mode == HeadMode::kQuantile ? "QR" : "ResM"; }

HeadMode head_mode_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "qr") return HeadMode::kQuantile;
  if (lower == "resm") return HeadMode::kResidual;
  throw ParameterError("unknown mode '" + s + "' (expected qr or resm)");
}

std::size_t head_count(HeadMode mode) noexcept { return mode == HeadMode::kQuantile ? 2 : 1; }

std::size_t ConvModel::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.parameter_count();
  return n;
}

std::vector<std::size_t> ConvModel::channel_plan() const {
  std::vector<std::size_t> plan;
  if (layers.empty()) return plan;
  plan.push_back(layers.front().in_channels);
  for (const auto& l : layers) plan.push_back(l.out_channels);
  return plan;
}

ConvModel make_model(HeadMode mode, std::uint64_t seed, std::size_t hidden_channels) {
  if (hidden_channels == 0) throw ParameterError("hidden_channels must be positive");
  ConvModel m;
  m.mode = mode;
  m.layers = {ConvLayer(1, hidden_channels), ConvLayer(hidden_channels, hidden_channels),
              ConvLayer(hidden_channels, head_count(mode))};
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    auto& layer = m.layers[l];
    const double fan_in = static_cast<double>(layer.in_channels * 9);
    const bool is_head = l + 1 == m.layers.size();
    const double gain = is_head ? 1.0 : 2.0 / (1.0 + m.leaky_slope * m.leaky_slope);
    const double bound = std::sqrt(3.0 * gain / fan_in);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& w : layer.weight) w = dist(rng);
  }
  return m;
}

Gradients zero_gradients(const ConvModel& model) {
  Gradients g;
  g.reserve(model.layers.size());
  for (const auto& l : model.layers) g.emplace_back(l.in_channels, l.out_channels);
  return g;
}

QuantileFields forward(const ConvModel& model, const Image& x) {
  const ForwardPass fp = run_forward(model, x);
  return fields_from_heads(model, fp.heads, x);
}

Image residual_estimate(const QuantileFields& fields, const Image& x) {
  require_same_shape(fields.o_u, x, "residual_estimate");
  Image r(x.rows(), x.cols());
  for (std::size_t p = 0; p < x.size(); ++p) r[p] = x[p] * fields.o_u[p];
  return r;
}

double model_loss(const ConvModel& model, const Image& x, const Image& y, double coverage_target,
                  const Mask* exclude) {
  check_pair(x, y);
  const ForwardPass fp = run_forward(model, x);
  const auto f = fields_from_heads(model, fp.heads, x);
  return head_loss(model, f, x, y, coverage_target, exclude, nullptr);
}

LossAndGradient backward(const ConvModel& model, const Image& x, const Image& y,
                         double coverage_target, const Mask* exclude) {
  check_pair(x, y);
  if (exclude) require_same_shape(*exclude, x, "exclusion mask");
  const ForwardPass fp = run_forward(model, x);
  const auto f = fields_from_heads(model, fp.heads, x);

  LossAndGradient out;
  std::vector<double> delta;  // dL/d(layer output after activation)
  out.loss = head_loss(model, f, x, y, coverage_target, exclude, &delta);
  out.grad = zero_gradients(model);

  const Shape& s = fp.shape;
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const auto& layer = model.layers[l];
    const auto& z = fp.pre[l];
    // head_loss already returns dL/dz for the sigmoid layer.
    if (l + 1 != model.layers.size())
      for (std::size_t i = 0; i < delta.size(); ++i)
        if (!(z[i] > 0.0)) delta[i] *= model.leaky_slope;
    std::vector<double> din_pad;
    conv_backward(layer, fp.inputs[l], delta, s, out.grad[l], l > 0 ? &din_pad : nullptr);
    if (l == 0) break;
    delta.assign(layer.in_channels * s.plane(), 0.0);
    for (std::size_t c = 0; c < layer.in_channels; ++c)
      for (std::size_t i = 0; i < s.h; ++i)
        std::copy_n(din_pad.data() + c * s.padded_plane() + (i + 1) * s.pw() + 1, s.w,
                    delta.data() + c * s.plane() + i * s.w);
  }
  for (const auto& g : out.grad) {
    for (double v : g.weight)
      if (!std::isfinite(v)) throw NumericError("non-finite weight gradient");
    for (double v : g.bias)
      if (!std::isfinite(v)) throw NumericError("non-finite bias gradient");
  }
  return out;
}

}  // namespace uq

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uq/grid.hpp"

namespace uq {

/// QR: two sigmoid heads (lower and upper offsets) trained with the pinball loss.
/// ResM: one symmetric head trained to regress the residual magnitude.
enum class HeadMode { kQuantile, kResidual };

std::string to_string(HeadMode mode);
HeadMode head_mode_from_string(const std::string& s);  // "qr" | "resm", case-insensitive
std::size_t head_count(HeadMode mode) noexcept;

/// 3x3 convolution with zero "same" padding. Weight layout [out][in][ky][kx].
struct ConvLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  ConvLayer() = default;
  ConvLayer(std::size_t in, std::size_t out)
      : in_channels(in), out_channels(out), weight(in * out * 9, 0.0), bias(out, 0.0) {}

  std::size_t parameter_count() const noexcept { return weight.size() + bias.size(); }
  bool operator==(const ConvLayer&) const = default;
};

/// Leaky-ReLU hidden layers followed by a sigmoid head layer.
struct ConvModel {
  HeadMode mode = HeadMode::kQuantile;
  double leaky_slope = 0.2;
  std::vector<ConvLayer> layers;

  std::size_t parameter_count() const noexcept;
  std::vector<std::size_t> channel_plan() const;
  bool operator==(const ConvModel&) const = default;
};

/// Gradient storage mirrors the parameter layout.
using Gradients = std::vector<ConvLayer>;

/// Channel plan 1 -> hidden -> hidden -> heads, seeded He-uniform init, zero biases.
ConvModel make_model(HeadMode mode, std::uint64_t seed, std::size_t hidden_channels = 16);

/// Same topology with every parameter (and gradient slot) set to zero.
Gradients zero_gradients(const ConvModel& model);

/// Per-pixel head outputs and the quantile maps they imply:
/// l~ = x (1 - o_l), u~ = x (1 + o_u). In ResM mode o_l == o_u.
struct QuantileFields {
  Image o_l;
  Image o_u;
  Image l_tilde;
  Image u_tilde;
};

QuantileFields forward(const ConvModel& model, const Image& x);

/// Residual-magnitude estimate x * o_u (the quantity the ResM loss regresses).
Image residual_estimate(const QuantileFields& fields, const Image& x);

struct LossAndGradient {
  double loss = 0.0;
  Gradients grad;
};

/// Training loss for the model's mode and its exact gradient. Pixels flagged in
/// `exclude` contribute nothing; the mean is still taken over all pixels.
LossAndGradient backward(const ConvModel& model, const Image& x, const Image& y,
                         double coverage_target, const Mask* exclude = nullptr);

/// Loss only (same definition as backward).
double model_loss(const ConvModel& model, const Image& x, const Image& y, double coverage_target,
                  const Mask* exclude = nullptr);

}  // namespace uq

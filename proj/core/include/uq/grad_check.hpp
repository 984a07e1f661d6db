#pragma once

#include <functional>

#include "uq/conv_model.hpp"

namespace uq {

using GradientFn = std::function<LossAndGradient(const ConvModel&, const Image&, const Image&,
                                                 double, const Mask*)>;

struct GradCheckOptions {
  double epsilon = 1e-5;
  // QR pixels whose target sits within this distance of either quantile are
  // dropped from the loss so that central differences never straddle a kink.
  double kink_margin = 1e-2;
  // Denominator floor for the relative error of near-zero gradients.
  double abs_floor = 1e-8;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t worst_layer = 0;
  bool worst_is_bias = false;
  std::size_t worst_index = 0;
  std::size_t parameters_checked = 0;
  std::size_t excluded_pixels = 0;
};

/// Compares every analytic partial derivative against a central difference.
/// `analytic` defaults to uq::backward.
GradCheckReport grad_check(const ConvModel& model, const Image& x, const Image& y,
                           double coverage_target, const GradCheckOptions& options = {},
                           const GradientFn& analytic = {});

/// Pixels a grad check should drop for this model/input (pinball kinks).
Mask kink_exclusion_mask(const ConvModel& model, const Image& x, const Image& y,
                         double coverage_target, double margin);

}  // namespace uq

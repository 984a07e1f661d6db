#pragma once

#include "uq/conv_model.hpp"
#include "uq/grid.hpp"

namespace uq {

/// Mean pinball loss: level*(y - q) where y > q, otherwise (1 - level)*(q - y).
double pinball_loss(const Image& q_hat, const Image& y, double level);

/// d/dq of the pinball term. Ties take the (1 - level) branch.
inline double pinball_subgradient(double q_hat, double y, double level) noexcept {
  return y > q_hat ? -level : 1.0 - level;
}

/// Lower head at level alpha/2 plus upper head at 1 - alpha/2, alpha = 1 - coverage_target.
double qr_total_loss(const QuantileFields& fields, const Image& y, double coverage_target);

/// Mean of (r - |x - y|)^2 for a residual-magnitude estimate r.
double resm_loss(const Image& residual_estimate, const Image& x, const Image& y);

}  // namespace uq

#pragma once

#include <vector>

#include "uq/grid.hpp"

namespace uq {

/// Normalized 1-D Gaussian taps for offsets -radius..radius, radius = ceil(3*sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian smoothing with half-sample symmetric (reflect) boundaries.
Image gaussian_blur(const Image& img, double sigma);

/// Zero mean, unit population std. Inputs with std < 1e-12 map to all zeros.
Image normalize_zero_mean_unit_std(const Image& img);

}  // namespace uq

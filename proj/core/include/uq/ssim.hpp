#pragma once

#include "uq/grid.hpp"

namespace uq {

/// Mean SSIM over every fully contained window x window block (uniform weights,
/// sample variances). Dynamic range is max(y) - min(y).
double ssim(const Image& x, const Image& y, std::size_t window = 7, double k1 = 0.01,
            double k2 = 0.03);

}  // namespace uq

#pragma once

#include "uq/grid.hpp"

namespace uq {

// Unitary 2-D DFT (1/sqrt(N) per axis). Both dimensions must be powers of two.
KSpace fft2(const ComplexGrid& img);
ComplexGrid ifft2(const KSpace& k);

}  // namespace uq

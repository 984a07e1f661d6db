#pragma once

#include <cstdint>

#include "uq/grid.hpp"
#include "uq/sampling.hpp"

namespace uq {

/// fft2(img) plus i.i.d. complex Gaussian noise, noise_std per component.
KSpace simulate_kspace(const Image& img, double noise_std, std::uint64_t seed);

/// |ifft2(k)| with unacquired samples left at zero.
Image zero_filled_recon(const KSpace& k_masked);

struct AcquisitionRecord {
  Image ground_truth;
  KSpace kspace_full;
  KSpace kspace_masked;
  SamplingMask mask;
  Image recon;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

AcquisitionRecord acquire(const Image& ground_truth, const SamplingMask& mask, double noise_std,
                          std::uint64_t seed);

}  // namespace uq

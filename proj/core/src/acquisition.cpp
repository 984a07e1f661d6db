#include "uq/acquisition.hpp"

#include <random>

#include "uq/fft.hpp"

namespace uq {

KSpace simulate_kspace(const Image& img, double noise_std, std::uint64_t seed) {
  if (!(noise_std >= 0.0)) throw ParameterError("noise_std must be non-negative");
  KSpace k = fft2(to_complex(img));
  if (noise_std == 0.0) return k;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_std);
  for (auto& v : k) {
    const double re = noise(rng);
    const double im = noise(rng);
    v += std::complex<double>(re, im);
  }
  return k;
}

Image zero_filled_recon(const KSpace& k_masked) { return magnitude(ifft2(k_masked)); }

AcquisitionRecord acquire(const Image& ground_truth, const SamplingMask& mask, double noise_std,
                          std::uint64_t seed) {
  AcquisitionRecord rec;
  rec.ground_truth = ground_truth;
  rec.kspace_full = simulate_kspace(ground_truth, noise_std, seed);
  rec.kspace_masked = apply_mask(rec.kspace_full, mask);
  rec.mask = mask;
  rec.recon = zero_filled_recon(rec.kspace_masked);
  rec.noise_std = noise_std;
  rec.seed = seed;
  return rec;
}

}  // namespace uq

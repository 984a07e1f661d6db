#include "uq/fft.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace uq {
namespace {

using cd = std::complex<double>;

void check_dims(std::size_t rows, std::size_t cols) {
  if (!is_power_of_two(rows) || !is_power_of_two(cols))
    throw DimensionError("FFT dimensions must be powers of two, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
}

// In-place iterative radix-2, unnormalized. sign = -1 forward, +1 inverse.
void fft1d(std::vector<cd>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles computed directly rather than by recurrence to keep round-off flat.
      const cd w(std::cos(ang * static_cast<double>(k)), std::sin(ang * static_cast<double>(k)));
      for (std::size_t i = 0; i < n; i += len) {
        const cd u = a[i + k];
        const cd v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

ComplexGrid transform(const ComplexGrid& in, int sign) {
  const std::size_t rows = in.rows();
  const std::size_t cols = in.cols();
  check_dims(rows, cols);
  ComplexGrid out = in;
  std::vector<cd> buf(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) buf[c] = out(r, c);
    fft1d(buf, sign);
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = buf[c];
  }
  buf.resize(rows);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) buf[r] = out(r, c);
    fft1d(buf, sign);
    for (std::size_t r = 0; r < rows; ++r) out(r, c) = buf[r];
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows * cols));
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace

KSpace fft2(const ComplexGrid& img) { return KSpace(transform(img, -1)); }

ComplexGrid ifft2(const KSpace& k) { return transform(k, +1); }

}  // namespace uq

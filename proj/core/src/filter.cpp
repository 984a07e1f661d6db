#include "uq/filter.hpp"

#include <cmath>

namespace uq {
namespace {

// Half-sample symmetric reflection: (d c b a | a b c d | d c b a).
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  return m < static_cast<std::ptrdiff_t>(n) ? static_cast<std::size_t>(m)
                                             : static_cast<std::size_t>(period - 1 - m);
}

}  // namespace

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("gaussian sigma must be positive");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double v = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = v;
    total += v;
  }
  for (auto& t : taps) t /= total;
  return taps;
}

Image gaussian_blur(const Image& img, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();

  Image horiz(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const auto src = reflect_index(static_cast<std::ptrdiff_t>(c) + k, cols);
        acc += taps[static_cast<std::size_t>(k + radius)] * img(r, src);
      }
      horiz(r, c) = acc;
    }
  }
  Image out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const auto src = reflect_index(static_cast<std::ptrdiff_t>(r) + k, rows);
        acc += taps[static_cast<std::size_t>(k + radius)] * horiz(src, c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

Image normalize_zero_mean_unit_std(const Image& img) {
  const double n = static_cast<double>(img.size());
  const double mean = grid_mean(img);
  double ss = 0.0;
  for (double v : img) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  Image out(img.rows(), img.cols(), 0.0);
  if (sd < 1e-12) return out;
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = (img[i] - mean) / sd;
  return out;
}

}  // namespace uq

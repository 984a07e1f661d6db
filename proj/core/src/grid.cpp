#include "uq/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uq {

double grid_sum(const Image& img) { return std::accumulate(img.begin(), img.end(), 0.0); }

double grid_mean(const Image& img) { return grid_sum(img) / static_cast<double>(img.size()); }

double grid_max(const Image& img) { return *std::max_element(img.begin(), img.end()); }

double grid_min(const Image& img) { return *std::min_element(img.begin(), img.end()); }

bool all_finite(const Image& img) {
  return std::all_of(img.begin(), img.end(), [](double v) { return std::isfinite(v); });
}

Image abs_diff(const Image& a, const Image& b) {
  require_same_shape(a, b, "abs_diff");
  Image out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i] - b[i]);
  return out;
}

Image magnitude(const ComplexGrid& g) {
  Image out(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::abs(g[i]);
  return out;
}

ComplexGrid to_complex(const Image& img) {
  ComplexGrid out(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = {img[i], 0.0};
  return out;
}

}  // namespace uq

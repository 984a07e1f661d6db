#include "uq/ssim.hpp"

#include <vector>

namespace uq {
namespace {

// Summed-area table with a zero first row and column.
class Integral {
 public:
  template <typename F>
  Integral(std::size_t rows, std::size_t cols, F value) : cols_(cols + 1), t_((rows + 1) * (cols + 1), 0.0) {
    for (std::size_t r = 0; r < rows; ++r) {
      double row_sum = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        row_sum += value(r, c);
        t_[(r + 1) * cols_ + c + 1] = t_[r * cols_ + c + 1] + row_sum;
      }
    }
  }
  double box(std::size_t r, std::size_t c, std::size_t n) const {
    return t_[(r + n) * cols_ + c + n] - t_[r * cols_ + c + n] - t_[(r + n) * cols_ + c] +
           t_[r * cols_ + c];
  }

 private:
  std::size_t cols_;
  std::vector<double> t_;
};

}  // namespace

double ssim(const Image& x, const Image& y, std::size_t window, double k1, double k2) {
  require_same_shape(x, y, "ssim");
  if (window < 2 || window > x.rows() || window > x.cols())
    throw ParameterError("ssim window does not fit the image");
  const double range = grid_max(y) - grid_min(y);
  if (!(range > 0.0)) throw DegenerateInputError("ssim: reference image has zero dynamic range");
  const double c1 = (k1 * range) * (k1 * range);
  const double c2 = (k2 * range) * (k2 * range);

  const Integral sx(x.rows(), x.cols(), [&](auto r, auto c) { return x(r, c); });
  const Integral sy(x.rows(), x.cols(), [&](auto r, auto c) { return y(r, c); });
  const Integral sxx(x.rows(), x.cols(), [&](auto r, auto c) { return x(r, c) * x(r, c); });
  const Integral syy(x.rows(), x.cols(), [&](auto r, auto c) { return y(r, c) * y(r, c); });
  const Integral sxy(x.rows(), x.cols(), [&](auto r, auto c) { return x(r, c) * y(r, c); });

  const double np = static_cast<double>(window * window);
  const double cov_norm = np / (np - 1.0);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + window <= x.rows(); ++r) {
    for (std::size_t c = 0; c + window <= x.cols(); ++c) {
      const double mx = sx.box(r, c, window) / np;
      const double my = sy.box(r, c, window) / np;
      const double vx = cov_norm * (sxx.box(r, c, window) / np - mx * mx);
      const double vy = cov_norm * (syy.box(r, c, window) / np - my * my);
      const double vxy = cov_norm * (sxy.box(r, c, window) / np - mx * my);
      total += ((2.0 * mx * my + c1) * (2.0 * vxy + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace uq

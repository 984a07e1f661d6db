#include "uq/losses.hpp"

#include <cmath>

namespace uq {

double pinball_loss(const Image& q_hat, const Image& y, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("pinball level must lie in (0, 1)");
  require_same_shape(q_hat, y, "pinball_loss");
  double sum = 0.0;
  for (std::size_t p = 0; p < y.size(); ++p) {
    const double q = q_hat[p];
    sum += y[p] > q ? level * (y[p] - q) : (1.0 - level) * (q - y[p]);
  }
  return sum / static_cast<double>(y.size());
}

double qr_total_loss(const QuantileFields& fields, const Image& y, double coverage_target) {
  if (!(coverage_target > 0.0 && coverage_target < 1.0))
    throw ParameterError("coverage_target must lie in (0, 1)");
  const double alpha = 1.0 - coverage_target;
  return pinball_loss(fields.l_tilde, y, alpha / 2.0) +
         pinball_loss(fields.u_tilde, y, 1.0 - alpha / 2.0);
}

double resm_loss(const Image& residual_estimate, const Image& x, const Image& y) {
  require_same_shape(residual_estimate, x, "resm_loss");
  require_same_shape(x, y, "resm_loss");
  double sum = 0.0;
  for (std::size_t p = 0; p < x.size(); ++p) {
    const double d = residual_estimate[p] - std::abs(x[p] - y[p]);
    sum += d * d;
  }
  return sum / static_cast<double>(x.size());
}

}  // namespace uq

#include "uq/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace uq {
namespace {

void check_case(const CalibrationCase& c) {
  if (!c.x.same_shape(c.y) || !c.x.same_shape(c.fields.l_tilde) || !c.x.same_shape(c.fields.u_tilde))
    throw DataError("calibration case '" + c.id + "' has mismatched shapes");
}

}  // namespace

IntervalMaps interval(const Image& x, const QuantileFields& fields, double lambda) {
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be non-negative");
  require_same_shape(x, fields.l_tilde, "interval");
  require_same_shape(x, fields.u_tilde, "interval");
  IntervalMaps out{Image(x.rows(), x.cols()), Image(x.rows(), x.cols()), lambda};
  for (std::size_t p = 0; p < x.size(); ++p) {
    const double lo_off = x[p] - fields.l_tilde[p];
    const double hi_off = fields.u_tilde[p] - x[p];
    if (lo_off < 0.0 || hi_off < 0.0)
      throw ParameterError("quantile offsets must be non-negative (pixel " + std::to_string(p) + ")");
    out.lower[p] = std::max(0.0, x[p] - lambda * lo_off);
    out.upper[p] = x[p] + lambda * hi_off;
  }
  return out;
}

std::size_t count_outside(const CalibrationCase& c, double lambda) {
  std::size_t n = 0;
  const auto& x = c.x;
  const auto& y = c.y;
  const auto& l = c.fields.l_tilde;
  const auto& u = c.fields.u_tilde;
  for (std::size_t p = 0; p < x.size(); ++p) {
    // Same arithmetic as interval() so risk and coverage agree bit-for-bit.
    const double lower = std::max(0.0, x[p] - lambda * (x[p] - l[p]));
    const double upper = x[p] + lambda * (u[p] - x[p]);
    n += (y[p] < lower || y[p] > upper) ? 1 : 0;
  }
  return n;
}

double empirical_risk(std::span<const CalibrationCase> cases, double lambda) {
  if (cases.empty()) throw DataError("empirical risk over an empty calibration set");
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be non-negative");
  std::size_t outside = 0;
  std::size_t total = 0;
  for (const auto& c : cases) {
    check_case(c);
    outside += count_outside(c, lambda);
    total += c.x.size();
  }
  return static_cast<double>(outside) / static_cast<double>(total);
}

double hoeffding_upper(double r_hat, std::uint64_t n, double delta) {
  if (!(r_hat >= 0.0 && r_hat <= 1.0)) throw ParameterError("r_hat must lie in [0, 1]");
  if (n == 0) throw ParameterError("Hoeffding bound needs n > 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw ParameterError("delta must lie in (0, 1]");
  const double slack = std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
  return std::min(1.0, r_hat + slack);
}

std::size_t LambdaGrid::size() const {
  if (!(lo >= 0.0)) throw ParameterError("lambda grid lower bound must be >= 0");
  if (!(step > 0.0)) throw ParameterError("lambda grid step must be positive");
  if (!(hi >= lo)) throw ParameterError("lambda grid upper bound below lower bound");
  // Tolerate round-off so that e.g. (5 - 0) / 0.01 includes 5.
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

CalibrationResult calibrate(std::span<const CalibrationCase> cases, double alpha, double delta,
                            const LambdaGrid& grid) {
  if (cases.empty()) throw DataError("calibration set is empty");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in [0, 1)");
  const std::size_t points = grid.size();

  CalibrationResult result;
  result.alpha = alpha;
  result.delta = delta;
  result.n_images = cases.size();
  for (const auto& c : cases) {
    check_case(c);
    result.n_pixels_total += c.x.size();
  }
  result.risk_curve.reserve(points);
  bool found = false;
  for (std::size_t i = 0; i < points; ++i) {
    const double lambda = grid.at(i);
    const double r_hat = empirical_risk(cases, lambda);
    const double r_plus = hoeffding_upper(r_hat, result.n_images, delta);
    result.risk_curve.push_back({lambda, r_hat, r_plus});
    if (!found && r_plus <= alpha) {
      result.lambda_star = lambda;
      found = true;
    }
  }
  if (!found) {
    const double at_hi = result.risk_curve.back().r_plus;
    std::ostringstream msg;
    msg << "no lambda in [" << grid.lo << ", " << grid.at(points - 1) << "] reaches corrected risk "
        << alpha << "; R+ at the upper end is " << at_hi;
    throw CalibrationInfeasibleError(msg.str(), at_hi);
  }
  return result;
}

}  // namespace uq

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uq/conv_model.hpp"
#include "uq/grid.hpp"

namespace uq {

/// Calibrated bounds: lower = max(0, x - lambda (x - l~)), upper = x + lambda (u~ - x).
struct IntervalMaps {
  Image lower;
  Image upper;
  double lambda = 1.0;
};

IntervalMaps interval(const Image& x, const QuantileFields& fields, double lambda);

struct CalibrationCase {
  std::string id;
  Image x;
  QuantileFields fields;
  Image y;
};

/// Pixels with y strictly outside [lower, upper] for this case and lambda.
std::size_t count_outside(const CalibrationCase& c, double lambda);

/// Fraction of all pixels, pooled over every case, falling strictly outside.
double empirical_risk(std::span<const CalibrationCase> cases, double lambda);

/// r_hat + sqrt(ln(1/delta) / (2n)), clipped to 1.
double hoeffding_upper(double r_hat, std::uint64_t n, double delta);

struct LambdaGrid {
  double lo = 0.0;
  double hi = 5.0;
  double step = 0.01;

  std::size_t size() const;
  double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

struct RiskPoint {
  double lambda = 0.0;
  double r_hat = 0.0;
  double r_plus = 0.0;
};

struct CalibrationResult {
  double lambda_star = 0.0;
  std::vector<RiskPoint> risk_curve;
  std::size_t n_images = 0;
  std::size_t n_pixels_total = 0;
  double alpha = 0.1;
  double delta = 0.1;
};

/// Smallest grid lambda whose Hoeffding-corrected risk is at most alpha. The
/// Hoeffding sample count is the number of calibration images: per-image
/// miscoverage fractions are the i.i.d. bounded variables. The full risk curve
/// over the grid is recorded.
CalibrationResult calibrate(std::span<const CalibrationCase> cases, double alpha, double delta,
                            const LambdaGrid& grid = {});

}  // namespace uq

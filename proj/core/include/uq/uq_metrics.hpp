#pragma once

#include <string>

#include "uq/conformal.hpp"
#include "uq/grid.hpp"

namespace uq {

inline constexpr double kCorrelationBlurSigma = 2.0;

struct EvalMaps {
  Image q_map;   // upper - lower
  Image e_map;   // |x - y|
  Image q_blur;
  Image e_blur;
};

/// Uncertainty width. Depends on the intervals only.
Image uncertainty_map(const IntervalMaps& intervals);

/// Absolute reconstruction error.
Image error_map(const Image& x, const Image& y);

EvalMaps build_eval_maps(const Image& x, const Image& y, const IntervalMaps& intervals,
                         double blur_sigma = kCorrelationBlurSigma);

/// Fraction of pixels with lower <= y <= upper.
double coverage(const Image& y, const IntervalMaps& intervals);

/// 100 * mean(q) / max(x).
double mean_relative_width_pct(const Image& q_map, const Image& x);

/// q > threshold, per pixel.
Mask threshold_overlay_mask(const Image& q_map, double threshold);

struct MetricsRecord {
  std::string case_id;
  double pearson = 0.0;
  double spearman = 0.0;
  double pearson_region = 0.0;
  double spearman_region = 0.0;
  std::size_t skipped_patches = 0;
  double coverage = 0.0;
  double ssim = 0.0;
  double mean_rel_width_pct = 0.0;
};

/// All per-case metrics. Correlations use the blurred maps.
MetricsRecord compute_metrics(const std::string& case_id, const Image& x, const Image& y,
                              const IntervalMaps& intervals);
MetricsRecord compute_metrics(const std::string& case_id, const Image& x, const Image& y,
                              const IntervalMaps& intervals, const EvalMaps& maps);

}  // namespace uq

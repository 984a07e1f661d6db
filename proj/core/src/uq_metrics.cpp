#include "uq/uq_metrics.hpp"

#include "uq/correlation.hpp"
#include "uq/filter.hpp"
#include "uq/ssim.hpp"

namespace uq {

Image uncertainty_map(const IntervalMaps& intervals) {
  require_same_shape(intervals.lower, intervals.upper, "uncertainty_map");
  Image q(intervals.lower.rows(), intervals.lower.cols());
  for (std::size_t p = 0; p < q.size(); ++p) q[p] = intervals.upper[p] - intervals.lower[p];
  return q;
}

Image error_map(const Image& x, const Image& y) { return abs_diff(x, y); }

EvalMaps build_eval_maps(const Image& x, const Image& y, const IntervalMaps& intervals,
                         double blur_sigma) {
  require_same_shape(x, intervals.lower, "build_eval_maps");
  EvalMaps m;
  m.q_map = uncertainty_map(intervals);
  m.e_map = error_map(x, y);
  m.q_blur = gaussian_blur(m.q_map, blur_sigma);
  m.e_blur = gaussian_blur(m.e_map, blur_sigma);
  return m;
}

double coverage(const Image& y, const IntervalMaps& intervals) {
  require_same_shape(y, intervals.lower, "coverage");
  require_same_shape(y, intervals.upper, "coverage");
  std::size_t inside = 0;
  for (std::size_t p = 0; p < y.size(); ++p)
    inside += (intervals.lower[p] <= y[p] && y[p] <= intervals.upper[p]) ? 1 : 0;
  return static_cast<double>(inside) / static_cast<double>(y.size());
}

double mean_relative_width_pct(const Image& q_map, const Image& x) {
  require_same_shape(q_map, x, "mean_relative_width_pct");
  const double peak = grid_max(x);
  if (!(peak > 0.0)) throw DegenerateInputError("reconstruction is blank (max <= 0)");
  return 100.0 * grid_mean(q_map) / peak;
}

Mask threshold_overlay_mask(const Image& q_map, double threshold) {
  if (!(threshold >= 0.0)) throw ParameterError("overlay threshold must be non-negative");
  Mask m(q_map.rows(), q_map.cols(), 0);
  for (std::size_t p = 0; p < q_map.size(); ++p) m[p] = q_map[p] > threshold ? 1 : 0;
  return m;
}

MetricsRecord compute_metrics(const std::string& case_id, const Image& x, const Image& y,
                              const IntervalMaps& intervals) {
  return compute_metrics(case_id, x, y, intervals, build_eval_maps(x, y, intervals));
}

MetricsRecord compute_metrics(const std::string& case_id, const Image& x, const Image& y,
                              const IntervalMaps& intervals, const EvalMaps& maps) {
  MetricsRecord r;
  r.case_id = case_id;
  r.pearson = pearson(maps.q_blur, maps.e_blur);
  r.spearman = spearman(maps.q_blur, maps.e_blur);
  const auto region = region_correlations(maps.q_blur, maps.e_blur);
  r.pearson_region = region.mean_pearson;
  r.spearman_region = region.mean_spearman;
  r.skipped_patches = region.skipped;
  r.coverage = coverage(y, intervals);
  r.ssim = ssim(x, y);
  r.mean_rel_width_pct = mean_relative_width_pct(maps.q_map, x);
  return r;
}

}  // namespace uq

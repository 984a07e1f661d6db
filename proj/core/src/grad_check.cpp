#include "uq/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace uq {

Mask kink_exclusion_mask(const ConvModel& model, const Image& x, const Image& y,
                         double /*coverage_target*/, double margin) {
  Mask m(x.rows(), x.cols(), 0);
  if (model.mode != HeadMode::kQuantile) return m;
  const auto f = forward(model, x);
  for (std::size_t p = 0; p < x.size(); ++p)
    if (std::abs(y[p] - f.l_tilde[p]) < margin || std::abs(y[p] - f.u_tilde[p]) < margin) m[p] = 1;
  return m;
}

GradCheckReport grad_check(const ConvModel& model, const Image& x, const Image& y,
                           double coverage_target, const GradCheckOptions& options,
                           const GradientFn& analytic) {
  if (!(options.epsilon > 1e-6 && options.epsilon < 1e-2))
    throw ParameterError("grad_check epsilon must lie in (1e-6, 1e-2)");
  const Mask exclude = kink_exclusion_mask(model, x, y, coverage_target, options.kink_margin);
  const LossAndGradient a = analytic ? analytic(model, x, y, coverage_target, &exclude)
                                     : backward(model, x, y, coverage_target, &exclude);

  GradCheckReport report;
  report.excluded_pixels = static_cast<std::size_t>(std::count(exclude.begin(), exclude.end(), 1));
  ConvModel probe = model;
  auto check = [&](std::size_t layer, bool is_bias, std::size_t idx, double& param, double grad) {
    const double saved = param;
    param = saved + options.epsilon;
    const double plus = model_loss(probe, x, y, coverage_target, &exclude);
    param = saved - options.epsilon;
    const double minus = model_loss(probe, x, y, coverage_target, &exclude);
    param = saved;
    const double numeric = (plus - minus) / (2.0 * options.epsilon);
    const double denom = std::max({std::abs(grad), std::abs(numeric), options.abs_floor});
    const double rel = std::abs(grad - numeric) / denom;
    ++report.parameters_checked;
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_layer = layer;
      report.worst_is_bias = is_bias;
      report.worst_index = idx;
    }
  };
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& layer = probe.layers[l];
    for (std::size_t i = 0; i < layer.weight.size(); ++i)
      check(l, false, i, layer.weight[i], a.grad[l].weight[i]);
    for (std::size_t i = 0; i < layer.bias.size(); ++i)
      check(l, true, i, layer.bias[i], a.grad[l].bias[i]);
  }
  return report;
}

}  // namespace uq

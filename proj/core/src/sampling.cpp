#include "uq/sampling.hpp"

#include <cmath>
#include <string>

namespace uq {

std::size_t SamplingMask::kept_count() const {
  std::size_t n = 0;
  for (auto k : keep) n += k ? 1 : 0;
  return n;
}

Image SamplingMask::as_row_image() const {
  Image row(1, num_lines, 0.0);
  for (std::size_t i = 0; i < num_lines; ++i) row[i] = keep[i] ? 1.0 : 0.0;
  return row;
}

SamplingMask make_cartesian_mask(std::size_t num_lines, double acceleration, double acs_fraction,
                                 std::int64_t offset) {
  if (num_lines == 0) throw ParameterError("mask needs at least one line");
  if (!(acceleration >= 1.0)) throw ParameterError("acceleration must be >= 1");
  if (!(acs_fraction > 0.0 && acs_fraction <= 1.0))
    throw ParameterError("acs_fraction must lie in (0, 1]");

  const double n = static_cast<double>(num_lines);
  // std::round rounds half away from zero.
  const auto acs = static_cast<std::size_t>(std::round(n * acs_fraction));
  const auto budget = static_cast<std::size_t>(std::round(n / acceleration));
  if (acs > budget)
    throw BudgetError("ACS block of " + std::to_string(acs) + " lines exceeds the budget of " +
                      std::to_string(budget) + " lines");
  if (acs == 0) throw ParameterError("acs_fraction leaves no ACS lines");

  SamplingMask m;
  m.num_lines = num_lines;
  m.keep.assign(num_lines, 0);
  m.acceleration = acceleration;
  m.acs_fraction = acs_fraction;
  m.acs_lo = num_lines / 2 - acs / 2;
  m.acs_hi = m.acs_lo + acs - 1;
  for (std::size_t i = m.acs_lo; i <= m.acs_hi; ++i) m.keep[i] = 1;

  const std::size_t extra = budget - acs;
  if (extra == 0) return m;
  std::vector<std::size_t> outside;
  outside.reserve(num_lines - acs);
  for (std::size_t i = 0; i < num_lines; ++i)
    if (i < m.acs_lo || i > m.acs_hi) outside.push_back(i);

  const double stride = static_cast<double>(outside.size()) / static_cast<double>(extra);
  const auto period = static_cast<std::int64_t>(std::max(1.0, std::floor(stride)));
  const auto phase = static_cast<double>(((offset % period) + period) % period);
  for (std::size_t j = 0; j < extra; ++j) {
    const auto pos = static_cast<std::size_t>(std::floor(phase + static_cast<double>(j) * stride));
    m.keep[outside[pos]] = 1;
  }
  return m;
}

std::size_t centred_line_to_column(std::size_t line, std::size_t num_lines) noexcept {
  return (line + num_lines - num_lines / 2) % num_lines;
}

KSpace apply_mask(const KSpace& k, const SamplingMask& mask) {
  if (mask.num_lines != k.cols() || mask.keep.size() != k.cols())
    throw DimensionError("mask has " + std::to_string(mask.num_lines) + " lines but k-space has " +
                         std::to_string(k.cols()) + " columns");
  KSpace out = k;
  for (std::size_t line = 0; line < mask.num_lines; ++line) {
    if (mask.keep[line]) continue;
    const std::size_t col = centred_line_to_column(line, mask.num_lines);
    for (std::size_t r = 0; r < k.rows(); ++r) out(r, col) = {0.0, 0.0};
  }
  return out;
}

}  // namespace uq

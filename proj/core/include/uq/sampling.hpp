#pragma once

#include <cstdint>
#include <vector>

#include "uq/grid.hpp"

namespace uq {

/// Phase-encode line selection. Line indices are in centred k-space order:
/// index num_lines/2 is the DC line, so the ACS block sits in the middle.
struct SamplingMask {
  std::size_t num_lines = 0;
  std::vector<std::uint8_t> keep;
  std::size_t acs_lo = 0;
  std::size_t acs_hi = 0;
  double acceleration = 1.0;
  double acs_fraction = 1.0;

  std::size_t kept_count() const;
  Image as_row_image() const;  // 1 x num_lines, 0/1
};

/// Centred ACS block of round(n*f) lines plus round(n/R) - ACS lines spread
/// evenly over the remaining indices.
SamplingMask make_cartesian_mask(std::size_t num_lines, double acceleration, double acs_fraction,
                                 std::int64_t offset = 0);

/// FFT column that holds centred line `line`.
std::size_t centred_line_to_column(std::size_t line, std::size_t num_lines) noexcept;

KSpace apply_mask(const KSpace& k, const SamplingMask& mask);

}  // namespace uq

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uq/grid.hpp"

namespace uq {

/// Pearson r with population moments. Throws DegenerateInputError if either
/// input is constant.
double pearson(std::span<const double> a, std::span<const double> b);
double pearson(const Image& a, const Image& b);

/// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> v);

/// Pearson on average ranks.
double spearman(std::span<const double> a, std::span<const double> b);
double spearman(const Image& a, const Image& b);

/// Boundaries 0 = b_0 < ... < b_parts = n with b_i = floor(i n / parts).
std::vector<std::size_t> balanced_bounds(std::size_t n, std::size_t parts);

struct RegionCorrelation {
  double mean_pearson = 0.0;
  double mean_spearman = 0.0;
  std::size_t retained = 0;
  std::size_t skipped = 0;  // patches where either map is constant
};

RegionCorrelation region_correlations(const Image& a, const Image& b, std::size_t grid_rows = 10,
                                      std::size_t grid_cols = 10);

}  // namespace uq

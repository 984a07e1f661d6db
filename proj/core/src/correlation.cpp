#include "uq/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace uq {
namespace {

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("pearson: length mismatch");
  if (a.size() < 2 || is_constant(a) || is_constant(b))
    throw DegenerateInputError("pearson: input has zero variance");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

double pearson(const Image& a, const Image& b) {
  require_same_shape(a, b, "pearson");
  return pearson(a.values(), b.values());
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  for (std::size_t start = 0; start < idx.size();) {
    std::size_t end = start + 1;
    while (end < idx.size() && v[idx[end]] == v[idx[start]]) ++end;
    // Positions start..end-1 hold ranks start+1..end.
    const double avg = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[idx[k]] = avg;
    start = end;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("spearman: length mismatch");
  if (a.size() < 2 || is_constant(a) || is_constant(b))
    throw DegenerateInputError("spearman: input needs at least two distinct values");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

double spearman(const Image& a, const Image& b) {
  require_same_shape(a, b, "spearman");
  return spearman(a.values(), b.values());
}

std::vector<std::size_t> balanced_bounds(std::size_t n, std::size_t parts) {
  if (parts == 0 || parts > n)
    throw ParameterError("cannot split " + std::to_string(n) + " into " + std::to_string(parts) +
                         " non-empty parts");
  std::vector<std::size_t> b(parts + 1);
  for (std::size_t i = 0; i <= parts; ++i) b[i] = i * n / parts;
  return b;
}

RegionCorrelation region_correlations(const Image& a, const Image& b, std::size_t grid_rows,
                                      std::size_t grid_cols) {
  require_same_shape(a, b, "region_correlations");
  const auto rb = balanced_bounds(a.rows(), grid_rows);
  const auto cb = balanced_bounds(a.cols(), grid_cols);
  RegionCorrelation out;
  double sum_p = 0.0;
  double sum_s = 0.0;
  std::vector<double> pa, pb;
  for (std::size_t gi = 0; gi < grid_rows; ++gi) {
    for (std::size_t gj = 0; gj < grid_cols; ++gj) {
      pa.clear();
      pb.clear();
      for (std::size_t r = rb[gi]; r < rb[gi + 1]; ++r)
        for (std::size_t c = cb[gj]; c < cb[gj + 1]; ++c) {
          pa.push_back(a(r, c));
          pb.push_back(b(r, c));
        }
      if (pa.size() < 2 || is_constant(pa) || is_constant(pb)) {
        ++out.skipped;
        continue;
      }
      sum_p += pearson(pa, pb);
      sum_s += spearman(pa, pb);
      ++out.retained;
    }
  }
  if (out.retained == 0) throw DegenerateInputError("every patch has zero variance");
  out.mean_pearson = sum_p / static_cast<double>(out.retained);
  out.mean_spearman = sum_s / static_cast<double>(out.retained);
  return out;
}

}  // namespace uq

#pragma once

// Brute-force reference implementations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "uq/grid.hpp"

namespace oracle {

// Textbook two-pass population covariance over explicit loops.
inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) ma += a[i];
  for (std::size_t i = 0; i < n; ++i) mb += b[i];
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// O(n^2) ranking: rank = 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      less += v[j] < v[i];
      equal += v[j] == v[i];
    }
    r[i] = 1.0 + less + (equal - 1) / 2.0;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(ranks(a), ranks(b));
}

inline std::vector<double> patch(const uq::Image& img, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
  std::vector<double> out;
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = c0; c < c1; ++c) out.push_back(img(r, c));
  return out;
}

inline bool constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; });
}

// Direct per-window SSIM over the valid region with sample covariance.
inline double ssim(const uq::Image& x, const uq::Image& y, std::size_t w) {
  const double L = uq::grid_max(y) - uq::grid_min(y);
  const double c1 = (0.01 * L) * (0.01 * L), c2 = (0.03 * L) * (0.03 * L);
  const double np = static_cast<double>(w * w);
  double total = 0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + w <= x.rows(); ++r)
    for (std::size_t c = 0; c + w <= x.cols(); ++c) {
      const auto px = patch(x, r, r + w, c, c + w), py = patch(y, r, r + w, c, c + w);
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < px.size(); ++i) mx += px[i], my += py[i];
      mx /= np;
      my /= np;
      double vx = 0, vy = 0, cxy = 0;
      for (std::size_t i = 0; i < px.size(); ++i) {
        vx += (px[i] - mx) * (px[i] - mx);
        vy += (py[i] - my) * (py[i] - my);
        cxy += (px[i] - mx) * (py[i] - my);
      }
      vx /= np - 1;
      vy /= np - 1;
      cxy /= np - 1;
      total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / count;
}


// Values on a coarse lattice so ties are common.
inline uq::Image tied_image(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 5);
  uq::Image img(n, n);
  for (auto& v : img) v = 0.5 * d(rng);
  return img;
}

inline std::vector<double> vec(const uq::Image& img) { return {img.begin(), img.end()}; }

}  // namespace oracle

#pragma once

#include <cstdint>
#include <vector>

#include "uq/grid.hpp"

namespace uq {

// Coordinates live on [-1,1]^2 with +y pointing up (row 0 is the top edge).
struct Ellipse {
  double center_x = 0.0;
  double center_y = 0.0;
  double semi_axis_a = 1.0;
  double semi_axis_b = 1.0;
  double rotation = 0.0;  // radians, counter-clockwise
  double intensity_delta = 1.0;
};

bool point_in_ellipse(const Ellipse& e, double x, double y) noexcept;

// Pixel-centre coordinates of (row, col) on an rows x cols raster.
double pixel_x(std::size_t col, std::size_t cols) noexcept;
double pixel_y(std::size_t row, std::size_t rows) noexcept;

/// The modified (high-contrast) ten-ellipse head phantom.
std::vector<Ellipse> default_head_ellipses();

/// Sum of ellipse deltas rasterized at pixel centres, clipped to [0, 1].
Image shepp_logan(std::size_t rows, std::size_t cols, const std::vector<Ellipse>& ellipses);
Image shepp_logan(std::size_t rows, std::size_t cols);

/// Adds `lesion.intensity_delta * (1 + u)`, u ~ U(-0.1, 0.1) per pixel, inside the
/// lesion; result clipped to [0, 1]. The lesion must lie inside the field of view.
Image inject_lesion(const Image& img, const Ellipse& lesion, std::uint64_t seed);

struct PhantomVariation {
  double center_jitter = 0.02;
  double axis_scale_jitter = 0.05;
  double rotation_jitter = 0.08;     // radians, applied to the whole head
  double intensity_jitter = 0.02;    // additive, interior ellipses only
};

/// Per-case anatomy: the default head with seeded geometric and contrast jitter.
std::vector<Ellipse> jittered_head_ellipses(std::uint64_t seed, const PhantomVariation& v = {});

/// A seeded lesion placed inside the brain region of the default head.
Ellipse random_lesion(std::uint64_t seed);

}  // namespace uq

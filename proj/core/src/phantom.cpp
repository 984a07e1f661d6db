#include "uq/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace uq {
namespace {

void validate(const Ellipse& e) {
  if (!(e.semi_axis_a > 0.0) || !(e.semi_axis_b > 0.0))
    throw ParameterError("ellipse semi-axes must be positive");
}

// Half-extents of the axis-aligned bounding box of a rotated ellipse.
std::pair<double, double> half_extents(const Ellipse& e) {
  const double c = std::cos(e.rotation);
  const double s = std::sin(e.rotation);
  const double a2 = e.semi_axis_a * e.semi_axis_a;
  const double b2 = e.semi_axis_b * e.semi_axis_b;
  return {std::sqrt(a2 * c * c + b2 * s * s), std::sqrt(a2 * s * s + b2 * c * c)};
}

double deg(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

bool point_in_ellipse(const Ellipse& e, double x, double y) noexcept {
  const double dx = x - e.center_x;
  const double dy = y - e.center_y;
  const double c = std::cos(e.rotation);
  const double s = std::sin(e.rotation);
  const double u = dx * c + dy * s;
  const double v = -dx * s + dy * c;
  return (u * u) / (e.semi_axis_a * e.semi_axis_a) + (v * v) / (e.semi_axis_b * e.semi_axis_b) <= 1.0;
}

double pixel_x(std::size_t col, std::size_t cols) noexcept {
  return -1.0 + (2.0 * static_cast<double>(col) + 1.0) / static_cast<double>(cols);
}

double pixel_y(std::size_t row, std::size_t rows) noexcept {
  return 1.0 - (2.0 * static_cast<double>(row) + 1.0) / static_cast<double>(rows);
}

std::vector<Ellipse> default_head_ellipses() {
  // {x0, y0, a, b, phi, delta}
  return {
      {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
      {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
      {0.22, 0.0, 0.11, 0.31, deg(-18.0), -0.2},
      {-0.22, 0.0, 0.16, 0.41, deg(18.0), -0.2},
      {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
      {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
      {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},
      {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
      {0.0, -0.606, 0.023, 0.023, 0.0, 0.1},
      {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
  };
}

Image shepp_logan(std::size_t rows, std::size_t cols, const std::vector<Ellipse>& ellipses) {
  if (!is_power_of_two(rows) || !is_power_of_two(cols))
    throw DimensionError("phantom dimensions must be powers of two");
  if (ellipses.empty()) throw ParameterError("phantom needs at least one ellipse");
  for (const auto& e : ellipses) {
    validate(e);
    const auto [hx, hy] = half_extents(e);
    if (e.center_x - hx > 1.0 || e.center_x + hx < -1.0 || e.center_y - hy > 1.0 ||
        e.center_y + hy < -1.0)
      throw ParameterError("ellipse lies entirely outside the field of view");
  }
  Image img(rows, cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = pixel_y(r, rows);
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = pixel_x(c, cols);
      double v = 0.0;
      for (const auto& e : ellipses)
        if (point_in_ellipse(e, x, y)) v += e.intensity_delta;
      img(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

Image shepp_logan(std::size_t rows, std::size_t cols) {
  return shepp_logan(rows, cols, default_head_ellipses());
}

Image inject_lesion(const Image& img, const Ellipse& lesion, std::uint64_t seed) {
  validate(lesion);
  const auto [hx, hy] = half_extents(lesion);
  if (lesion.center_x - hx < -1.0 || lesion.center_x + hx > 1.0 || lesion.center_y - hy < -1.0 ||
      lesion.center_y + hy > 1.0)
    throw ParameterError("lesion support extends outside the image");
  Image out = img;
  if (lesion.intensity_delta == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> texture(-0.1, 0.1);
  for (std::size_t r = 0; r < img.rows(); ++r) {
    const double y = pixel_y(r, img.rows());
    for (std::size_t c = 0; c < img.cols(); ++c) {
      if (!point_in_ellipse(lesion, pixel_x(c, img.cols()), y)) continue;
      const double v = out(r, c) + lesion.intensity_delta * (1.0 + texture(rng));
      out(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

std::vector<Ellipse> jittered_head_ellipses(std::uint64_t seed, const PhantomVariation& v) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto ellipses = default_head_ellipses();
  const double head_rot = v.rotation_jitter * unit(rng);
  const double ch = std::cos(head_rot);
  const double sh = std::sin(head_rot);
  for (std::size_t i = 0; i < ellipses.size(); ++i) {
    auto& e = ellipses[i];
    e.center_x += v.center_jitter * unit(rng);
    e.center_y += v.center_jitter * unit(rng);
    e.semi_axis_a *= 1.0 + v.axis_scale_jitter * unit(rng);
    e.semi_axis_b *= 1.0 + v.axis_scale_jitter * unit(rng);
    if (i >= 2) e.intensity_delta += v.intensity_jitter * unit(rng);
    const double x = e.center_x;
    const double y = e.center_y;
    e.center_x = ch * x - sh * y;
    e.center_y = sh * x + ch * y;
    e.rotation += head_rot;
  }
  return ellipses;
}

Ellipse random_lesion(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double radius = 0.45 * std::sqrt(u01(rng));
  const double angle = 2.0 * std::numbers::pi * u01(rng);
  Ellipse e;
  e.center_x = 0.8 * radius * std::cos(angle);
  e.center_y = radius * std::sin(angle);
  e.semi_axis_a = 0.04 + 0.08 * u01(rng);
  e.semi_axis_b = 0.04 + 0.08 * u01(rng);
  e.rotation = std::numbers::pi * u01(rng);
  e.intensity_delta = 0.15 + 0.25 * u01(rng);
  return e;
}

}  // namespace uq

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uq/errors.hpp"

namespace uq {

/// Dense row-major 2-D grid. The element type carries the meaning
/// (real magnitudes, complex samples, boolean masks).
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw DimensionError("grid dimensions must be positive");
  }
  Grid(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) throw DimensionError("grid dimensions must be positive");
    if (data_.size() != rows * cols)
      throw DimensionError("grid data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows) + "x" +
                           std::to_string(cols));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Image = Grid<double>;
using ComplexGrid = Grid<std::complex<double>>;
using Mask = Grid<std::uint8_t>;

/// Frequency-domain samples. Distinct from ComplexGrid so that the
/// transform direction is visible in signatures.
class KSpace : public ComplexGrid {
 public:
  KSpace() = default;
  KSpace(std::size_t rows, std::size_t cols) : ComplexGrid(rows, cols) {}
  explicit KSpace(ComplexGrid g) : ComplexGrid(std::move(g)) {}
};

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
}

inline bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

// Elementwise helpers used across modules.
double grid_sum(const Image& img);
double grid_mean(const Image& img);
double grid_max(const Image& img);
double grid_min(const Image& img);
bool all_finite(const Image& img);
Image abs_diff(const Image& a, const Image& b);
Image magnitude(const ComplexGrid& g);
ComplexGrid to_complex(const Image& img);

}  // namespace uq

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "uq/grid.hpp"

namespace uq {

// On-disk layout, little-endian:
//   "CQRT" | dtype u32 | ndim u32 (=2) | rows u64 | cols u64 | float32 payload
// dtype 1 is real, dtype 2 is complex stored as interleaved (re, im).
enum class TensorDtype : std::uint32_t { kReal = 1, kComplex = 2 };

inline constexpr std::size_t kTensorHeaderBytes = 4 + 4 + 4 + 8 + 8;

struct TensorFile {
  TensorDtype dtype = TensorDtype::kReal;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<float> payload;  // rows*cols values, or 2*rows*cols for complex
};

std::vector<std::uint8_t> encode_tensor(const TensorFile& t);
TensorFile decode_tensor(const std::vector<std::uint8_t>& bytes);

// Values are narrowed to float32; doubles that are exactly representable
// in float32 round-trip bitwise.
void save_tensor(const std::filesystem::path& path, const Image& img);
void save_tensor(const std::filesystem::path& path, const ComplexGrid& grid);
TensorFile load_tensor(const std::filesystem::path& path);
Image load_image(const std::filesystem::path& path);
ComplexGrid load_complex(const std::filesystem::path& path);

}  // namespace uq

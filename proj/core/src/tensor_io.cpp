#include "uq/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace uq {
namespace {

constexpr char kMagic[4] = {'C', 'Q', 'R', 'T'};

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename U>
U get_le(const std::vector<std::uint8_t>& in, std::size_t at) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(in[at + i]) << (8 * i);
  return v;
}

std::size_t values_per_element(TensorDtype d) { return d == TensorDtype::kComplex ? 2 : 1; }

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("short write to " + path.string());
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const TensorFile& t) {
  const std::size_t expected = t.rows * t.cols * values_per_element(t.dtype);
  if (t.payload.size() != expected) throw DimensionError("tensor payload does not match dims");
  std::vector<std::uint8_t> out;
  out.reserve(kTensorHeaderBytes + 4 * t.payload.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.dtype));
  put_le<std::uint32_t>(out, 2);
  put_le<std::uint64_t>(out, t.rows);
  put_le<std::uint64_t>(out, t.cols);
  for (float v : t.payload) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

TensorFile decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("bad tensor magic", 0);
  if (bytes.size() < kTensorHeaderBytes) throw FormatError("truncated tensor header", bytes.size());
  TensorFile t;
  const auto dtype = get_le<std::uint32_t>(bytes, 4);
  if (dtype != 1 && dtype != 2) throw FormatError("unknown dtype tag " + std::to_string(dtype), 4);
  t.dtype = static_cast<TensorDtype>(dtype);
  const auto ndim = get_le<std::uint32_t>(bytes, 8);
  if (ndim != 2) throw FormatError("unsupported ndim " + std::to_string(ndim), 8);
  t.rows = get_le<std::uint64_t>(bytes, 12);
  t.cols = get_le<std::uint64_t>(bytes, 20);
  if (t.rows == 0) throw FormatError("zero dimension", 12);
  if (t.cols == 0) throw FormatError("zero dimension", 20);

  const std::uint64_t max_values = std::numeric_limits<std::uint64_t>::max() / 8;
  const std::uint64_t per = values_per_element(t.dtype);
  if (t.rows > max_values / t.cols || t.rows * t.cols > max_values / per)
    throw FormatError("dimension overflow", 12);
  const std::uint64_t count = t.rows * t.cols * per;
  const std::uint64_t payload_bytes = bytes.size() - kTensorHeaderBytes;
  if (payload_bytes < count * 4)
    throw FormatError("truncated payload: expected " + std::to_string(count * 4) + " bytes",
                      bytes.size());
  if (payload_bytes > count * 4)
    throw FormatError("trailing bytes after payload", kTensorHeaderBytes + count * 4);

  t.payload.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    t.payload[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, kTensorHeaderBytes + 4 * i));
  return t;
}

void save_tensor(const std::filesystem::path& path, const Image& img) {
  TensorFile t{TensorDtype::kReal, img.rows(), img.cols(), {}};
  t.payload.reserve(img.size());
  for (double v : img) t.payload.push_back(static_cast<float>(v));
  write_file(path, encode_tensor(t));
}

void save_tensor(const std::filesystem::path& path, const ComplexGrid& grid) {
  TensorFile t{TensorDtype::kComplex, grid.rows(), grid.cols(), {}};
  t.payload.reserve(2 * grid.size());
  for (const auto& v : grid) {
    t.payload.push_back(static_cast<float>(v.real()));
    t.payload.push_back(static_cast<float>(v.imag()));
  }
  write_file(path, encode_tensor(t));
}

TensorFile load_tensor(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open tensor file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

Image load_image(const std::filesystem::path& path) {
  auto t = load_tensor(path);
  if (t.dtype != TensorDtype::kReal) throw FormatError("expected real tensor in " + path.string(), 4);
  std::vector<double> data(t.payload.begin(), t.payload.end());
  return Image(t.rows, t.cols, std::move(data));
}

ComplexGrid load_complex(const std::filesystem::path& path) {
  auto t = load_tensor(path);
  if (t.dtype != TensorDtype::kComplex)
    throw FormatError("expected complex tensor in " + path.string(), 4);
  std::vector<std::complex<double>> data(t.rows * t.cols);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = {t.payload[2 * i], t.payload[2 * i + 1]};
  return ComplexGrid(t.rows, t.cols, std::move(data));
}

}  // namespace uq

#pragma once

// Binary grid container.
//
//   magic    4 bytes   "MPGF" (function) or "MPGM" (measure)
//   version  u32       1
//   ndim     u32
//   shape    u64 x ndim
//   h        f64
//   values   f64 x prod(shape), row-major
//
// All fields little-endian.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oscillib/grid.hpp"

namespace oscillib {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::array<char, 4> kFunctionMagic{'M', 'P', 'G', 'F'};
inline constexpr std::array<char, 4> kMeasureMagic{'M', 'P', 'G', 'M'};
inline constexpr std::uint32_t kGridFormatVersion = 1;

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<std::uint8_t, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.insert(out.end(), bytes.begin(), bytes.end());
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw FormatError("grid file truncated");
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw.data(), sizeof(T));
    return value;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> encode(const std::array<char, 4>& magic, const GridGeometry& g,
                                        std::span<const double> values) {
  std::vector<std::uint8_t> out;
  out.reserve(24 + 8 * g.ndim() + 8 * values.size());
  out.insert(out.end(), magic.begin(), magic.end());
  put_le<std::uint32_t>(out, kGridFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.ndim()));
  for (auto e : g.shape()) put_le<std::uint64_t>(out, e);
  put_le<double>(out, g.cell_width());
  for (double v : values) put_le<double>(out, v);
  return out;
}

struct Decoded {
  GridGeometry geometry;
  std::vector<double> values;
};

inline Decoded decode(const std::array<char, 4>& magic, std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), magic.data(), 4) != 0) {
    throw FormatError("bad magic: expected " + std::string(magic.begin(), magic.end()));
  }
  ByteReader r(bytes.subspan(4));
  const auto version = r.get<std::uint32_t>();
  if (version != kGridFormatVersion) throw FormatError("unsupported version " + std::to_string(version));
  const auto ndim = r.get<std::uint32_t>();
  if (ndim < 1 || ndim > kMaxDims) throw FormatError("unsupported dimension " + std::to_string(ndim));
  std::vector<std::size_t> shape(ndim);
  std::uint64_t count = 1;
  for (auto& e : shape) {
    const auto x = r.get<std::uint64_t>();
    if (x < 1 || x > (std::uint64_t{1} << 32)) throw FormatError("bad extent");
    e = static_cast<std::size_t>(x);
    count *= x;
    if (count > (std::uint64_t{1} << 34)) throw FormatError("grid too large");
  }
  const double h = r.get<double>();
  if (r.remaining() != count * sizeof(double)) throw FormatError("payload size mismatch");
  std::vector<double> values(count);
  for (auto& v : values) v = r.get<double>();
  try {
    return {GridGeometry(std::move(shape), h), std::move(values)};
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

/// Write bytes to a sibling temporary file, then rename over the target.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<std::uint8_t> encode_grid(const GridFunction& u) {
  return detail::encode(kFunctionMagic, u.geometry(), u.values());
}

inline std::vector<std::uint8_t> encode_measure(const DiscreteMeasure& mu) {
  return detail::encode(kMeasureMagic, mu.geometry(), mu.masses());
}

inline GridFunction decode_grid(std::span<const std::uint8_t> bytes) {
  auto d = detail::decode(kFunctionMagic, bytes);
  try {
    return {std::move(d.geometry), std::move(d.values)};
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

inline DiscreteMeasure decode_measure(std::span<const std::uint8_t> bytes) {
  auto d = detail::decode(kMeasureMagic, bytes);
  try {
    return {std::move(d.geometry), std::move(d.values)};
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

inline void write_grid(const std::filesystem::path& path, const GridFunction& u) {
  const auto bytes = encode_grid(u);
  write_file_atomic(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

inline void write_measure(const std::filesystem::path& path, const DiscreteMeasure& mu) {
  const auto bytes = encode_measure(mu);
  write_file_atomic(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

inline GridFunction read_grid(const std::filesystem::path& path) {
  return decode_grid(detail::read_bytes(path));
}

inline DiscreteMeasure read_measure(const std::filesystem::path& path) {
  return decode_measure(detail::read_bytes(path));
}

/// Masks travel as MPGF files; nonzero cells belong to the domain.
inline DomainMask read_mask(const std::filesystem::path& path) {
  const auto u = read_grid(path);
  std::vector<std::uint8_t> cells(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) cells[i] = u[i] != 0.0 ? 1 : 0;
  try {
    return {u.geometry(), std::move(cells)};
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

inline void write_mask(const std::filesystem::path& path, const DomainMask& mask) {
  std::vector<double> v(mask.cells().begin(), mask.cells().end());
  write_grid(path, GridFunction(mask.geometry(), std::move(v)));
}

}  // namespace oscillib

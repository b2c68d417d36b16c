#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cubehodge::pipeline {

/// Element types accepted in .npy payloads (little-endian only).
enum class DType : std::uint8_t { u8, i8, u16, i16, u32, i32, u64, i64, f32, f64, boolean };

std::size_t dtype_size(DType dtype);
/// numpy descr string, e.g. "<f4" or "|u1".
std::string dtype_descr(DType dtype);
/// Throws IoError for unsupported or big-endian descriptors.
DType parse_descr(const std::string& descr);
bool is_integer(DType dtype);

/// Foreground threshold used when none is configured: 1/255 of the dtype's
/// dynamic range for integers (1 for 8-bit data), 1/255 for floats.
double default_threshold(DType dtype);

/// A C-ordered n-dimensional array with raw little-endian element bytes.
struct NdArray {
  DType dtype = DType::f64;
  std::vector<long long> shape;
  std::vector<std::uint8_t> data;

  long long size() const;
  /// Element at a flat C-order index, converted to double.
  double value(long long flat) const;
};

NdArray make_array(DType dtype, std::vector<long long> shape);
NdArray make_f32(std::vector<long long> shape, std::span<const float> values);
NdArray make_f64(std::vector<long long> shape, std::span<const double> values);

/// Magic, version and the space-padded dict header. The total length is a
/// multiple of 64; pad_to (if larger) reserves room for a later rewrite
/// with a different shape.
std::vector<std::uint8_t> npy_header(DType dtype, const std::vector<long long>& shape, std::size_t pad_to = 0);

std::vector<std::uint8_t> write_npy(const NdArray& array);
/// Throws IoError on malformed input, Fortran order or unsupported dtypes.
NdArray read_npy(std::span<const std::uint8_t> bytes);

} // namespace cubehodge::pipeline

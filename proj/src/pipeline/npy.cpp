#include "cubehodge/pipeline/npy.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <regex>

#include "cubehodge/errors.hpp"

namespace cubehodge::pipeline {

static_assert(std::endian::native == std::endian::little, "array payloads are read in place as little-endian");

namespace {

constexpr char kMagic[] = "\x93NUMPY";

struct DTypeInfo {
  DType dtype;
  const char* descr;
  std::size_t size;
};

constexpr DTypeInfo kTypes[] = {
    {DType::u8, "|u1", 1},  {DType::i8, "|i1", 1},  {DType::u16, "<u2", 2}, {DType::i16, "<i2", 2},
    {DType::u32, "<u4", 4}, {DType::i32, "<i4", 4}, {DType::u64, "<u8", 8}, {DType::i64, "<i8", 8},
    {DType::f32, "<f4", 4}, {DType::f64, "<f8", 8}, {DType::boolean, "|b1", 1},
};

const DTypeInfo& info(DType dtype) {
  for (const auto& t : kTypes)
    if (t.dtype == dtype) return t;
  throw InvalidInput("unknown dtype");
}

template <class T>
double load(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

std::string shape_text(const std::vector<long long>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    s += std::to_string(shape[i]);
    if (shape.size() == 1 || i + 1 < shape.size()) s += shape.size() == 1 ? "," : ", ";
  }
  return s + ")";
}

} // namespace

std::size_t dtype_size(DType dtype) { return info(dtype).size; }
std::string dtype_descr(DType dtype) { return info(dtype).descr; }

DType parse_descr(const std::string& descr) {
  std::string d = descr;
  // Single-byte types may come with any byte-order mark; wider ones must be little-endian.
  if (d.size() == 3 && (d[0] == '=' || d[0] == '<' || d[0] == '|')) {
    for (const auto& t : kTypes) {
      if (d.substr(1) == std::string(t.descr).substr(1) && (t.size == 1 || d[0] != '|')) return t.dtype;
    }
  }
  throw IoError("unsupported array dtype '" + descr + "'");
}

bool is_integer(DType dtype) { return dtype != DType::f32 && dtype != DType::f64 && dtype != DType::boolean; }

double default_threshold(DType dtype) {
  auto range = [](auto lo, auto hi) { return (static_cast<double>(hi) - static_cast<double>(lo)) / 255.0; };
  switch (dtype) {
  case DType::u8: return range(std::numeric_limits<std::uint8_t>::min(), std::numeric_limits<std::uint8_t>::max());
  case DType::i8: return range(std::numeric_limits<std::int8_t>::min(), std::numeric_limits<std::int8_t>::max());
  case DType::u16: return range(std::numeric_limits<std::uint16_t>::min(), std::numeric_limits<std::uint16_t>::max());
  case DType::i16: return range(std::numeric_limits<std::int16_t>::min(), std::numeric_limits<std::int16_t>::max());
  case DType::u32: return range(std::numeric_limits<std::uint32_t>::min(), std::numeric_limits<std::uint32_t>::max());
  case DType::i32: return range(std::numeric_limits<std::int32_t>::min(), std::numeric_limits<std::int32_t>::max());
  case DType::u64: return range(std::numeric_limits<std::uint64_t>::min(), std::numeric_limits<std::uint64_t>::max());
  case DType::i64: return range(std::numeric_limits<std::int64_t>::min(), std::numeric_limits<std::int64_t>::max());
  case DType::boolean: return 1.0;
  case DType::f32:
  case DType::f64: return 1.0 / 255.0;
  }
  return 1.0;
}

long long NdArray::size() const {
  long long n = 1;
  for (long long e : shape) n *= e;
  return n;
}

double NdArray::value(long long flat) const {
  const std::uint8_t* p = data.data() + static_cast<std::size_t>(flat) * dtype_size(dtype);
  switch (dtype) {
  case DType::u8: return load<std::uint8_t>(p);
  case DType::i8: return load<std::int8_t>(p);
  case DType::u16: return load<std::uint16_t>(p);
  case DType::i16: return load<std::int16_t>(p);
  case DType::u32: return load<std::uint32_t>(p);
  case DType::i32: return load<std::int32_t>(p);
  case DType::u64: return load<std::uint64_t>(p);
  case DType::i64: return load<std::int64_t>(p);
  case DType::f32: return load<float>(p);
  case DType::f64: return load<double>(p);
  case DType::boolean: return *p != 0 ? 1.0 : 0.0;
  }
  return 0.0;
}

NdArray make_array(DType dtype, std::vector<long long> shape) {
  NdArray a{dtype, std::move(shape), {}};
  a.data.assign(static_cast<std::size_t>(a.size()) * dtype_size(dtype), 0);
  return a;
}

NdArray make_f32(std::vector<long long> shape, std::span<const float> values) {
  NdArray a = make_array(DType::f32, std::move(shape));
  if (static_cast<long long>(values.size()) != a.size()) throw InvalidInput("value count does not match the shape");
  std::memcpy(a.data.data(), values.data(), a.data.size());
  return a;
}

NdArray make_f64(std::vector<long long> shape, std::span<const double> values) {
  NdArray a = make_array(DType::f64, std::move(shape));
  if (static_cast<long long>(values.size()) != a.size()) throw InvalidInput("value count does not match the shape");
  std::memcpy(a.data.data(), values.data(), a.data.size());
  return a;
}

std::vector<std::uint8_t> npy_header(DType dtype, const std::vector<long long>& shape, std::size_t pad_to) {
  std::string dict = "{'descr': '" + dtype_descr(dtype) + "', 'fortran_order': False, 'shape': " +
                     shape_text(shape) + ", }";
  // Version 1.0 has a 2-byte header length; larger headers need 2.0.
  const bool v2 = dict.size() + 1 + 10 > 65535;
  const std::size_t prefix = v2 ? 12 : 10;
  std::size_t total = prefix + dict.size() + 1;
  total = (total + 63) / 64 * 64;
  if (pad_to > total) total = (pad_to + 63) / 64 * 64;
  dict.append(total - prefix - dict.size() - 1, ' ');
  dict.push_back('\n');

  std::vector<std::uint8_t> out(kMagic, kMagic + 6);
  out.push_back(v2 ? 2 : 1);
  out.push_back(0);
  const std::size_t len = dict.size();
  out.push_back(static_cast<std::uint8_t>(len & 0xff));
  out.push_back(static_cast<std::uint8_t>((len >> 8) & 0xff));
  if (v2) {
    out.push_back(static_cast<std::uint8_t>((len >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((len >> 24) & 0xff));
  }
  out.insert(out.end(), dict.begin(), dict.end());
  return out;
}

std::vector<std::uint8_t> write_npy(const NdArray& array) {
  std::vector<std::uint8_t> out = npy_header(array.dtype, array.shape);
  out.insert(out.end(), array.data.begin(), array.data.end());
  return out;
}

NdArray read_npy(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 6) != 0) throw IoError("not a .npy payload");
  const int major = bytes[6];
  std::size_t len = 0, prefix = 0;
  if (major == 1) {
    len = bytes[8] | (bytes[9] << 8);
    prefix = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw IoError("truncated .npy header");
    len = bytes[8] | (bytes[9] << 8) | (bytes[10] << 16) | (static_cast<std::size_t>(bytes[11]) << 24);
    prefix = 12;
  } else {
    throw IoError("unsupported .npy version " + std::to_string(major));
  }
  if (bytes.size() < prefix + len) throw IoError("truncated .npy header");
  const std::string header(reinterpret_cast<const char*>(bytes.data() + prefix), len);

  std::smatch m;
  static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
  static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
  if (!std::regex_search(header, m, descr_re)) throw IoError("missing descr in .npy header");
  const DType dtype = parse_descr(m[1]);
  if (!std::regex_search(header, m, order_re)) throw IoError("missing fortran_order in .npy header");
  if (m[1] == "True") throw IoError("Fortran-ordered arrays are not supported");
  if (!std::regex_search(header, m, shape_re)) throw IoError("missing shape in .npy header");

  NdArray array{dtype, {}, {}};
  const std::string dims = m[1];
  static const std::regex int_re(R"(\d+)");
  for (auto it = std::sregex_iterator(dims.begin(), dims.end(), int_re); it != std::sregex_iterator(); ++it)
    array.shape.push_back(std::stoll(it->str()));

  const std::size_t payload = static_cast<std::size_t>(array.size()) * dtype_size(dtype);
  if (bytes.size() - prefix - len < payload) throw IoError("truncated .npy payload");
  array.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(prefix + len),
                    bytes.begin() + static_cast<std::ptrdiff_t>(prefix + len + payload));
  return array;
}

} // namespace cubehodge::pipeline

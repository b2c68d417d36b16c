#include "cubehodge/pipeline/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <png.h>

#include "cubehodge/errors.hpp"

namespace cubehodge::pipeline {

namespace {

void check_size(std::size_t n, int height, int width) {
  if (height <= 0 || width <= 0 || n != static_cast<std::size_t>(height) * static_cast<std::size_t>(width))
    throw InvalidInput("raster size does not match the value count");
}

} // namespace

Raster gray_raster(std::span<const double> values, int height, int width) {
  check_size(values.size(), height, width);
  Raster r{height, width, 1, std::vector<std::uint8_t>(values.size(), 128)};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) return r;
  for (std::size_t i = 0; i < values.size(); ++i)
    r.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (values[i] - *lo) / span));
  return r;
}

Raster direction_raster(std::span<const double> along_height, std::span<const double> along_width, int height,
                        int width) {
  check_size(along_height.size(), height, width);
  check_size(along_width.size(), height, width);
  const std::size_t n = along_width.size();
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, std::hypot(along_height[i], along_width[i]));

  Raster r{height, width, 3, std::vector<std::uint8_t>(3 * n, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::hypot(along_height[i], along_width[i]);
    const double v = peak > 0.0 ? mag / peak : 0.0;
    double hue = std::atan2(along_height[i], along_width[i]) / (2.0 * std::numbers::pi);
    if (hue < 0.0) hue += 1.0;
    const double h6 = hue * 6.0;
    const int sector = static_cast<int>(h6) % 6;
    const double f = h6 - std::floor(h6);
    const double p = 0.0, q = v * (1.0 - f), t = v * f;
    double rgb[3];
    switch (sector) {
    case 0: rgb[0] = v, rgb[1] = t, rgb[2] = p; break;
    case 1: rgb[0] = q, rgb[1] = v, rgb[2] = p; break;
    case 2: rgb[0] = p, rgb[1] = v, rgb[2] = t; break;
    case 3: rgb[0] = p, rgb[1] = q, rgb[2] = v; break;
    case 4: rgb[0] = t, rgb[1] = p, rgb[2] = v; break;
    default: rgb[0] = v, rgb[1] = p, rgb[2] = q; break;
    }
    for (int c = 0; c < 3; ++c) r.pixels[3 * i + c] = static_cast<std::uint8_t>(std::lround(255.0 * rgb[c]));
  }
  return r;
}

void write_png(const std::filesystem::path& path, const Raster& raster) {
  if (raster.channels != 1 && raster.channels != 3) throw InvalidInput("rasters must have 1 or 3 channels");
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = raster.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (png_image_write_to_file(&image, path.string().c_str(), 0, raster.pixels.data(), 0, nullptr) == 0)
    throw IoError("cannot write " + path.string() + ": " + image.message);
}

Raster read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.string().c_str()) == 0)
    throw IoError("cannot read " + path.string() + ": " + image.message);
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Raster r{static_cast<int>(image.height), static_cast<int>(image.width), gray ? 1 : 3, {}};
  r.pixels.resize(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, r.pixels.data(), 0, nullptr) == 0)
    throw IoError("cannot decode " + path.string() + ": " + image.message);
  return r;
}

} // namespace cubehodge::pipeline

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace cubehodge::pipeline {

/// 8-bit raster, row-major, channels interleaved (1 = gray, 3 = RGB).
struct Raster {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;
};

/// Linear min/max mapping to 0..255; a constant image maps to 128.
Raster gray_raster(std::span<const double> values, int height, int width);

/// Hue from the angle of (along_width, along_height), value from the
/// magnitude relative to the image maximum, full saturation.
Raster direction_raster(std::span<const double> along_height, std::span<const double> along_width, int height,
                        int width);

void write_png(const std::filesystem::path& path, const Raster& raster);
Raster read_png(const std::filesystem::path& path);

} // namespace cubehodge::pipeline

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "cubehodge/fields.hpp"
#include "cubehodge/pipeline/npy.hpp"

namespace cubehodge::pipeline {

enum class ImageLayout { gray2d, color2d, volume3d };

/// (N,H,W) and (N,H,W,1) are gray 2D, (N,H,W,3) color 2D, (N,D,H,W) and
/// (N,D,H,W,1) single-channel 3D. A trailing axis of 3 always means color.
ImageLayout detect_layout(const std::vector<long long>& shape);
const char* layout_name(ImageLayout layout);

struct Dataset {
  NdArray images;
  std::optional<NdArray> labels;
  ImageLayout layout = ImageLayout::gray2d;
  Extents dims;
  int channels = 1;

  long long count() const { return images.shape.front(); }
  Image image(long long index) const;
};

/// Archive keys for a split: "images"/"labels" or "<split>_images"/"<split>_labels".
std::string images_key(const std::string& split);
std::string labels_key(const std::string& split);

/// Throws IoError if the archive or its images member is missing or corrupt.
Dataset load_dataset(const std::filesystem::path& path, const std::string& split);

namespace detail {
void ordered_pipeline(long long count, int workers, const std::function<void*(long long)>& produce,
                      const std::function<void(long long, void*)>& consume);
} // namespace detail

/// Runs work(i) for i in [0, count) on `workers` threads and hands each
/// result to sink in index order on one thread at a time. work must not
/// throw; exceptions from sink stop the batch and propagate (results still
/// in flight at that point are leaked).
template <class T, class Work, class Sink>
void ordered_map(long long count, int workers, Work&& work, Sink&& sink) {
  detail::ordered_pipeline(
      count, workers, [&](long long i) -> void* { return new T(work(i)); },
      [&](long long i, void* p) {
        std::unique_ptr<T> owned(static_cast<T*>(p));
        sink(i, std::move(*owned));
      });
}

} // namespace cubehodge::pipeline

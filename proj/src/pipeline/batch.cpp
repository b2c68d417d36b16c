#include "cubehodge/pipeline/batch.hpp"

#include <oneapi/tbb/global_control.h>
#include <oneapi/tbb/parallel_pipeline.h>
#include <oneapi/tbb/task_arena.h>

#include "cubehodge/errors.hpp"
#include "cubehodge/pipeline/zip.hpp"

namespace cubehodge::pipeline {

ImageLayout detect_layout(const std::vector<long long>& shape) {
  const std::size_t n = shape.size();
  if (n == 3) return ImageLayout::gray2d;
  if (n == 4 && shape[3] == 3) return ImageLayout::color2d;
  if (n == 4 && shape[3] == 1) return ImageLayout::gray2d;
  if (n == 4) return ImageLayout::volume3d;
  if (n == 5 && shape[4] == 1) return ImageLayout::volume3d;
  throw InvalidInput("cannot interpret an images array of rank " + std::to_string(n));
}

const char* layout_name(ImageLayout layout) {
  switch (layout) {
  case ImageLayout::gray2d: return "2d-gray";
  case ImageLayout::color2d: return "2d-color";
  case ImageLayout::volume3d: return "3d";
  }
  return "?";
}

Image Dataset::image(long long index) const {
  Image out;
  out.dims = dims;
  out.channels = channels;
  const long long per_image = extent_product(dims) * channels;
  out.values.resize(static_cast<std::size_t>(per_image));
  const long long base = index * per_image;
  for (long long i = 0; i < per_image; ++i) out.values[i] = images.value(base + i);
  return out;
}

std::string images_key(const std::string& split) { return split.empty() ? "images" : split + "_images"; }
std::string labels_key(const std::string& split) { return split.empty() ? "labels" : split + "_labels"; }

Dataset load_dataset(const std::filesystem::path& path, const std::string& split) {
  const ZipReader zip(path);
  const std::string key = images_key(split) + ".npy";
  if (!zip.contains(key)) throw IoError("archive " + path.string() + " has no '" + images_key(split) + "' array");
  Dataset d;
  d.images = read_npy(zip.read(key));
  try {
    d.layout = detect_layout(d.images.shape);
  } catch (const InvalidInput& e) {
    throw IoError(e.what());
  }
  const auto& s = d.images.shape;
  switch (d.layout) {
  case ImageLayout::gray2d: d.dims = {static_cast<int>(s[1]), static_cast<int>(s[2])}; break;
  case ImageLayout::color2d:
    d.dims = {static_cast<int>(s[1]), static_cast<int>(s[2])};
    d.channels = 3;
    break;
  case ImageLayout::volume3d: d.dims = {static_cast<int>(s[1]), static_cast<int>(s[2]), static_cast<int>(s[3])}; break;
  }
  const std::string lkey = labels_key(split) + ".npy";
  if (zip.contains(lkey)) {
    d.labels = read_npy(zip.read(lkey));
    if (d.labels->shape.empty() || d.labels->shape.front() != d.count())
      throw IoError("labels do not have one row per image");
  }
  return d;
}

namespace detail {

void ordered_pipeline(long long count, int workers, const std::function<void*(long long)>& produce,
                      const std::function<void(long long, void*)>& consume) {
  if (count <= 0) return;
  struct Item {
    long long index;
    void* value;
  };
  // Lift the default hardware-concurrency cap so the requested worker
  // count is honoured even on small machines.
  tbb::global_control limit(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(workers));
  tbb::task_arena arena(workers);
  arena.execute([&] {
    long long next = 0;
    tbb::parallel_pipeline(
        static_cast<std::size_t>(2 * workers),
        tbb::make_filter<void, long long>(tbb::filter_mode::serial_in_order,
                                          [&](tbb::flow_control& fc) -> long long {
                                            if (next >= count) {
                                              fc.stop();
                                              return 0;
                                            }
                                            return next++;
                                          }) &
            tbb::make_filter<long long, Item>(tbb::filter_mode::parallel,
                                              [&](long long i) { return Item{i, produce(i)}; }) &
            tbb::make_filter<Item, void>(tbb::filter_mode::serial_in_order,
                                         [&](Item item) { consume(item.index, item.value); }));
  });
}

} // namespace detail

} // namespace cubehodge::pipeline

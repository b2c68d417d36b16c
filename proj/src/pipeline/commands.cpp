#include "cubehodge/pipeline/commands.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "cubehodge/decompose.hpp"
#include "cubehodge/errors.hpp"
#include "cubehodge/laplacian.hpp"
#include "cubehodge/manifold.hpp"
#include "cubehodge/pipeline/batch.hpp"
#include "cubehodge/pipeline/raster.hpp"
#include "cubehodge/pipeline/zip.hpp"

namespace cubehodge::pipeline {

using Json = nlohmann::ordered_json;

namespace {

const char* const kParts[] = {"exact", "coexact", "harmonic"};
const char* const kPairs[] = {"rg", "rb", "gb"};

const char* condition_name(BoundaryCondition c) { return c == BoundaryCondition::normal ? "normal" : "tangential"; }

// Per-image outcome; io errors abort the batch, everything else skips the image.
template <class T>
struct Outcome {
  std::optional<T> value;
  std::string error;
  bool io = false;
};

template <class T, class F>
Outcome<T> attempt(F&& f) {
  Outcome<T> out;
  try {
    out.value = f();
  } catch (const IoError& e) {
    out.error = e.what();
    out.io = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

template <class T>
void rethrow_io(const Outcome<T>& o) {
  if (o.io) throw IoError(o.error);
}

struct Prepared {
  Dataset dataset;
  PipelineConfig config; // threshold resolved
  GridComplex grid;
};

Prepared prepare(const PipelineConfig& config) {
  validate(config);
  Dataset ds = load_dataset(config.input, config.split);
  PipelineConfig eff = resolve(config, ds.images.dtype);
  if (eff.method == FieldMethod::channel_pair && ds.layout != ImageLayout::color2d)
    throw ParameterError("method channel-pair needs (N, H, W, 3) color images");
  GridComplex grid = build_grid(ds.dims);
  return {std::move(ds), std::move(eff), std::move(grid)};
}

VertexMask image_mask(const GridComplex& grid, const Image& image, double threshold) {
  const Image gray = luminance(image);
  return segment(grid, gray.values, threshold);
}

Json diagnostics_json(const DecompositionDiagnostics& d) {
  Json j;
  j["normal_support"] = d.normal_support;
  j["tangential_support"] = d.tangential_support;
  j["empty_mask"] = d.empty_mask;
  j["cosine_exact_coexact"] = d.cosine_exact_coexact;
  j["cosine_exact_harmonic"] = d.cosine_exact_harmonic;
  j["cosine_coexact_harmonic"] = d.cosine_coexact_harmonic;
  j["max_cosine"] = d.max_cosine();
  j["normal_iterations"] = d.normal_solve.iterations;
  j["normal_residual"] = d.normal_solve.relative_residual;
  j["tangential_iterations"] = d.tangential_solve.iterations;
  j["tangential_residual"] = d.tangential_solve.relative_residual;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

void emit_json(const Json& j, const std::string& output, std::ostream& out) {
  if (output.empty())
    out << j.dump(2) << '\n';
  else
    write_text(output, j.dump(2) + "\n");
}

Json base_report(const Prepared& p) {
  Json j;
  j["config"] = serialize_config(p.config);
  j["config_hash"] = config_hash(p.config);
  j["layout"] = layout_name(p.dataset.layout);
  j["dims"] = p.dataset.dims;
  return j;
}

// Returns the files written.
std::vector<std::string> write_component_rasters(const std::filesystem::path& stem,
                                                 const std::vector<Eigen::VectorXd>& components, const Extents& dims,
                                                 bool hsv) {
  std::vector<std::string> files;
  auto emit = [&files](const std::string& path, const Raster& r) {
    write_png(path, r);
    files.push_back(path);
  };
  const Eigen::VectorXd mag = magnitude(components);
  if (dims.size() == 2) {
    emit(stem.string() + ".png", gray_raster({mag.data(), static_cast<std::size_t>(mag.size())}, dims[0], dims[1]));
    if (hsv && components.size() == 2)
      emit(stem.string() + "_hsv.png",
           direction_raster({components[0].data(), static_cast<std::size_t>(components[0].size())},
                            {components[1].data(), static_cast<std::size_t>(components[1].size())}, dims[0],
                            dims[1]));
    return files;
  }
  for (int axis = 0; axis < 3; ++axis) {
    int h = 0, w = 0;
    const std::vector<double> slice = mid_slice(mag, dims, axis, h, w);
    const std::string name = stem.string() + "_axis" + std::to_string(axis);
    emit(name + ".png", gray_raster(slice, h, w));
    if (hsv && components.size() == 3) {
      // in-slice components: the two axes other than `axis`, in order
      std::vector<std::vector<double>> in_plane;
      for (int a = 0; a < 3; ++a)
        if (a != axis) in_plane.push_back(mid_slice(components[a], dims, axis, h, w));
      emit(name + "_hsv.png", direction_raster(in_plane[0], in_plane[1], h, w));
    }
  }
  return files;
}

} // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& output) { return output.string() + ".json"; }

std::vector<Eigen::VectorXd> cube_average(const GridComplex& grid, int degree, const Eigen::VectorXd& form) {
  const int m = grid.dimension();
  if (degree < 0 || degree > m) throw DegreeError("cube_average: degree out of range");
  if (form.size() != grid.cell_count(degree)) throw InvalidInput("cube_average: cochain length mismatch");
  Extents cubes(grid.dims());
  for (auto& e : cubes) e -= 1;
  const long long n = extent_product(cubes);

  std::vector<Eigen::VectorXd> out;
  for (AxisSet type : grid.cell_types(degree)) {
    std::vector<int> free_axes;
    for (int a = 0; a < m; ++a)
      if (!(type >> a & 1u)) free_axes.push_back(a);
    const int corners = 1 << free_axes.size();
    Eigen::VectorXd avg(n);
    for (long long c = 0; c < n; ++c) {
      std::array<int, 3> anchor{0, 0, 0};
      long long rest = c;
      for (int a = m - 1; a >= 0; --a) {
        anchor[a] = static_cast<int>(rest % cubes[a]);
        rest /= cubes[a];
      }
      double sum = 0.0;
      for (int o = 0; o < corners; ++o) {
        std::array<int, 3> at = anchor;
        for (std::size_t f = 0; f < free_axes.size(); ++f) at[free_axes[f]] += (o >> f) & 1;
        sum += form[grid.index_of({degree, type, at})];
      }
      avg[c] = sum / corners;
    }
    out.push_back(std::move(avg));
  }
  return out;
}

Eigen::VectorXd magnitude(const std::vector<Eigen::VectorXd>& components) {
  if (components.empty()) return {};
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(components.front().size());
  for (const auto& c : components) sq += c.cwiseAbs2();
  return sq.cwiseSqrt();
}

std::vector<double> mid_slice(const Eigen::VectorXd& values, const Extents& dims, int axis, int& height, int& width) {
  if (dims.size() != 3 || axis < 0 || axis > 2) throw InvalidInput("mid_slice needs a 3D array and axis 0..2");
  if (values.size() != extent_product(dims)) throw InvalidInput("mid_slice: value count mismatch");
  int rows = -1, cols = -1;
  for (int a = 0; a < 3; ++a) {
    if (a == axis) continue;
    (rows < 0 ? rows : cols) = a;
  }
  height = dims[rows];
  width = dims[cols];
  std::vector<double> out(static_cast<std::size_t>(height) * width);
  std::array<long long, 3> idx{};
  idx[axis] = dims[axis] / 2;
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      idx[rows] = r;
      idx[cols] = c;
      out[static_cast<std::size_t>(r) * width + c] = values[(idx[0] * dims[1] + idx[1]) * dims[2] + idx[2]];
    }
  return out;
}

int run_decompose(const PipelineConfig& config, std::ostream& log) {
  if (config.output.empty()) throw ParameterError("decompose needs an output path");
  const Prepared p = prepare(config);
  const Dataset& ds = p.dataset;
  const ImageDecompositionConfig dc = decomposition_config(p.config);
  const int channels = decomposed_channel_count(p.grid.dimension(), dc.method);
  const Extents out_dims = decomposed_extents(ds.dims, dc);
  for (int e : out_dims)
    if (e < 1) throw ParameterError("images are too small for this field method");

  std::vector<long long> shape{ds.count(), channels};
  shape.insert(shape.end(), out_dims.begin(), out_dims.end());
  const std::size_t header_size = npy_header(DType::f32, shape).size();

  ZipWriter zip(config.output);
  zip.begin("decomposed.npy", header_size);

  Json report = base_report(p);
  Json images = Json::array();
  Json skipped = Json::array();
  std::vector<long long> kept;
  std::vector<float> buffer;

  ordered_map<Outcome<DecomposedImage>>(
      ds.count(), p.config.workers,
      [&](long long i) {
        return attempt<DecomposedImage>([&] {
          DecomposedImage d = decomposed_image(ds.image(i), dc);
          for (double v : d.data)
            if (!std::isfinite(v)) throw SolverError("non-finite value in decomposition", 0, v);
          return d;
        });
      },
      [&](long long i, Outcome<DecomposedImage> o) {
        rethrow_io(o);
        if (!o.value) {
          skipped.push_back({{"index", i}, {"reason", o.error}});
          log << "image " << i << " skipped: " << o.error << '\n';
          return;
        }
        buffer.assign(o.value->data.begin(), o.value->data.end());
        zip.write({reinterpret_cast<const std::uint8_t*>(buffer.data()), buffer.size() * sizeof(float)});
        kept.push_back(i);
        Json fields = Json::array();
        for (const auto& d : o.value->diagnostics) fields.push_back(diagnostics_json(d));
        images.push_back({{"index", i}, {"fields", fields}});
      });

  shape.front() = static_cast<long long>(kept.size());
  zip.end(npy_header(DType::f32, shape, header_size));

  if (ds.labels) {
    const NdArray& labels = *ds.labels;
    NdArray out{labels.dtype, labels.shape, {}};
    out.shape.front() = static_cast<long long>(kept.size());
    const std::size_t row = labels.data.size() / static_cast<std::size_t>(labels.shape.front());
    for (long long i : kept)
      out.data.insert(out.data.end(), labels.data.begin() + static_cast<std::ptrdiff_t>(i * row),
                      labels.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * row));
    zip.add("labels.npy", write_npy(out));
  }
  zip.close();

  report["input_images"] = ds.count();
  report["written_images"] = kept.size();
  report["output_shape"] = shape;
  report["skipped"] = skipped;
  report["images"] = images;
  write_text(sidecar_path(config.output), report.dump(2) + "\n");
  log << "decomposed " << kept.size() << " of " << ds.count() << " images into " << config.output << '\n';
  return skipped.empty() ? kExitOk : kExitPartial;
}

int run_betti(const PipelineConfig& config, std::ostream& out) {
  const Prepared p = prepare(config);
  const int m = p.grid.dimension();
  Json report = base_report(p);
  report["condition"] = condition_name(p.config.condition);
  Json images = Json::array();
  bool any_skipped = false;

  ordered_map<Outcome<Json>>(
      p.dataset.count(), p.config.workers,
      [&](long long i) {
        return attempt<Json>([&] {
          const VertexMask mask = image_mask(p.grid, p.dataset.image(i), *p.config.threshold);
          Json numbers = Json::array();
          for (int k = 0; k < m; ++k) {
            const auto b = betti(p.grid, mask, k, p.config.condition, p.config.variant);
            if (!b) return Json(nullptr);
            numbers.push_back(*b);
          }
          return numbers;
        });
      },
      [&](long long i, Outcome<Json> o) {
        rethrow_io(o);
        if (o.value)
          images.push_back({{"index", i}, {"betti", *o.value}});
        else {
          any_skipped = true;
          images.push_back({{"index", i}, {"betti", nullptr}, {"error", o.error}});
        }
      });

  report["images"] = images;
  emit_json(report, p.config.output, out);
  return any_skipped ? kExitPartial : kExitOk;
}

int run_spectra(const PipelineConfig& config, std::ostream& out) {
  const Prepared p = prepare(config);
  const int m = p.grid.dimension();
  const int k = p.config.degree;
  if (k > m) throw ParameterError("degree exceeds the image dimension");
  if (!p.config.raster_dir.empty()) std::filesystem::create_directories(p.config.raster_dir);

  Json report = base_report(p);
  report["degree"] = k;
  report["condition"] = condition_name(p.config.condition);
  Json images = Json::array();
  bool any_skipped = false;

  ordered_map<Outcome<Json>>(
      p.dataset.count(), p.config.workers,
      [&](long long i) {
        return attempt<Json>([&] {
          const VertexMask mask = image_mask(p.grid, p.dataset.image(i), *p.config.threshold);
          const SupportSet support = build_support(p.grid, mask, p.config.condition);
          Json j{{"index", i}, {"support_size", support.size(k)}};
          if (support.size(k) == 0) {
            j["eigenvalues"] = Json::array();
            j["kernel_dimension"] = nullptr;
            return j;
          }
          const LaplacianOperator L = assemble(p.grid, support, k, p.config.variant);
          const int count = std::min<int>(p.config.count, static_cast<int>(L.matrix.rows()));
          j["eigenvalues"] = spectrum(L, count);
          const HarmonicBasis basis = harmonic_space(L);
          j["kernel_dimension"] = basis.dimension();
          if (!p.config.raster_dir.empty()) {
            Extents cube_dims(p.grid.dims());
            for (auto& e : cube_dims) e -= 1;
            Json files = Json::array();
            for (int c = 0; c < basis.dimension(); ++c) {
              const Eigen::VectorXd full = support.extend(k, basis.vectors.col(c));
              const auto stem = std::filesystem::path(p.config.raster_dir) /
                                ("kernel_image" + std::to_string(i) + "_" + std::to_string(c));
              for (const std::string& f : write_component_rasters(stem, cube_average(p.grid, k, full), cube_dims, false))
                files.push_back(f);
            }
            j["rasters"] = files;
          }
          return j;
        });
      },
      [&](long long i, Outcome<Json> o) {
        rethrow_io(o);
        if (o.value)
          images.push_back(*o.value);
        else {
          any_skipped = true;
          images.push_back({{"index", i}, {"error", o.error}});
        }
      });

  report["images"] = images;
  emit_json(report, p.config.output, out);
  return any_skipped ? kExitPartial : kExitOk;
}

int run_export_plot(const PipelineConfig& config, std::ostream& log) {
  if (config.output.empty()) throw ParameterError("export-plot needs an output directory");
  const Prepared p = prepare(config);
  const ImageDecompositionConfig dc = decomposition_config(p.config);
  std::filesystem::create_directories(config.output);
  bool any_skipped = false;

  ordered_map<Outcome<int>>(
      p.dataset.count(), p.config.workers,
      [&](long long i) {
        return attempt<int>([&] {
          const DecomposedImage d = decomposed_image(p.dataset.image(i), dc);
          const int fields = static_cast<int>(d.components.size() / 3);
          for (int f = 0; f < fields; ++f)
            for (int part = 0; part < 3; ++part) {
              std::string name = "image" + std::to_string(i);
              if (fields > 1) name += std::string("_") + kPairs[f];
              name += std::string("_") + kParts[part];
              const CubeField& field = d.components[3 * f + part];
              write_component_rasters(std::filesystem::path(config.output) / name, field.components, field.dims,
                                      p.config.hsv);
            }
          return fields;
        });
      },
      [&](long long i, Outcome<int> o) {
        rethrow_io(o);
        if (!o.value) {
          any_skipped = true;
          log << "image " << i << " skipped: " << o.error << '\n';
        }
      });
  log << "rasters written to " << config.output << '\n';
  return any_skipped ? kExitPartial : kExitOk;
}

int run_inspect(const PipelineConfig& config, std::ostream& out) {
  const ZipReader zip(config.input);
  Json members = Json::array();
  for (const std::string& name : zip.names()) {
    Json j{{"name", name}};
    if (name.size() > 4 && name.compare(name.size() - 4, 4, ".npy") == 0) {
      const NdArray a = read_npy(zip.read(name));
      j["dtype"] = dtype_descr(a.dtype);
      j["shape"] = a.shape;
    }
    members.push_back(j);
  }
  Json report{{"archive", config.input}, {"members", members}};
  if (zip.contains(images_key(config.split) + ".npy")) {
    const Dataset ds = load_dataset(config.input, config.split);
    report["images"] = {{"count", ds.count()},
                        {"layout", layout_name(ds.layout)},
                        {"dims", ds.dims},
                        {"default_threshold", default_threshold(ds.images.dtype)},
                        {"labels", ds.labels.has_value()}};
  }
  out << report.dump(2) << '\n';
  return kExitOk;
}

} // namespace cubehodge::pipeline

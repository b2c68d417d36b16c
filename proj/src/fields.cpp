#include "cubehodge/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cubehodge/errors.hpp"
#include "cubehodge/laplacian.hpp"
#include "cubehodge/manifold.hpp"

namespace cubehodge {

namespace {

std::vector<long long> strides(const Extents& dims) {
  std::vector<long long> s(dims.size(), 1);
  for (int a = static_cast<int>(dims.size()) - 2; a >= 0; --a) s[a] = s[a + 1] * dims[a + 1];
  return s;
}

std::array<int, 3> unravel(const Extents& dims, long long index) {
  std::array<int, 3> p{0, 0, 0};
  for (int a = static_cast<int>(dims.size()) - 1; a >= 0; --a) {
    p[a] = static_cast<int>(index % dims[a]);
    index /= dims[a];
  }
  return p;
}

VertexField zero_field(const Extents& dims) {
  VertexField f;
  f.dims = dims;
  f.components.assign(dims.size(), Eigen::VectorXd::Zero(extent_product(dims)));
  return f;
}

void check_scalar(const Image& image) {
  check_image(image);
  if (image.channels != 1)
    throw InvalidInput("expected a single-channel image, got " + std::to_string(image.channels) + " channels");
}

} // namespace

void check_image(const Image& image) {
  if (image.dims.size() != 2 && image.dims.size() != 3) throw InvalidInput("images must be 2D or 3D");
  if (image.channels < 1) throw InvalidInput("image channel count must be positive");
  if (static_cast<long long>(image.values.size()) != image.vertex_count() * image.channels)
    throw InvalidInput("image value count does not match its extents");
}

Image luminance(const Image& image) {
  check_image(image);
  if (image.channels == 1) return image;
  if (image.channels != 3) throw InvalidInput("luminance needs 1 or 3 channels");
  Image out{image.dims, 1, std::vector<double>(static_cast<std::size_t>(image.vertex_count()))};
  for (long long v = 0; v < image.vertex_count(); ++v)
    out.values[v] = 0.299 * image.at(v, 0) + 0.587 * image.at(v, 1) + 0.114 * image.at(v, 2);
  return out;
}

VertexField gradient_field(const Image& image, int forward_step, int backward_step) {
  check_scalar(image);
  if (forward_step < 1 || backward_step < 1) throw ParameterError("gradient steps must be at least 1");
  for (int e : image.dims)
    if (forward_step >= e || backward_step >= e)
      throw ParameterError("gradient steps must be smaller than every image extent");

  const Extents& dims = image.dims;
  const auto stride = strides(dims);
  VertexField f = zero_field(dims);
  for (long long v = 0; v < image.vertex_count(); ++v) {
    const auto p = unravel(dims, v);
    for (std::size_t a = 0; a < dims.size(); ++a) {
      const int ahead = std::min(p[a] + forward_step, dims[a] - 1);
      const int behind = std::max(p[a] - backward_step, 0);
      f.components[a][v] = 0.5 * (image.values[v + (ahead - p[a]) * stride[a]] -
                                  image.values[v + (behind - p[a]) * stride[a]]);
    }
  }
  return f;
}

VertexField flow_field(const Image& image, FlowDirection direction) {
  check_scalar(image);
  const Extents& dims = image.dims;
  const int m = static_cast<int>(dims.size());
  const auto stride = strides(dims);

  std::vector<std::array<int, 3>> offsets;
  std::vector<std::array<double, 3>> units;
  const int neighborhood = m == 2 ? 9 : 27;
  for (int code = 0; code < neighborhood; ++code) {
    std::array<int, 3> o{code % 3 - 1, (code / 3) % 3 - 1, m == 3 ? code / 9 - 1 : 0};
    if (o == std::array<int, 3>{0, 0, 0}) continue;
    const double len = std::sqrt(static_cast<double>(o[0] * o[0] + o[1] * o[1] + o[2] * o[2]));
    offsets.push_back(o);
    units.push_back({o[0] / len, o[1] / len, o[2] / len});
  }

  const double sign = direction == FlowDirection::descend ? 1.0 : -1.0;
  VertexField f = zero_field(dims);
  for (long long v = 0; v < image.vertex_count(); ++v) {
    const auto p = unravel(dims, v);
    // Work in "descend" orientation: candidates are strictly below the center.
    const double center = sign * image.values[v];
    double best = center;
    std::array<double, 3> sum{0, 0, 0};
    for (std::size_t n = 0; n < offsets.size(); ++n) {
      long long neighbor = v;
      bool valid = true;
      for (int a = 0; a < m; ++a) {
        const int q = p[a] + offsets[n][a];
        if (q < 0 || q >= dims[a]) valid = false;
        neighbor += offsets[n][a] * stride[a];
      }
      if (!valid) continue;
      const double value = sign * image.values[neighbor];
      if (value < best) {
        best = value;
        sum = units[n];
      } else if (value == best && value < center) {
        for (int a = 0; a < 3; ++a) sum[a] += units[n][a];
      }
    }
    const double norm = std::sqrt(sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]);
    if (norm < 1e-12) continue;
    for (int a = 0; a < m; ++a) f.components[a][v] = sum[a] / norm * image.values[v];
  }
  return f;
}

std::array<VertexField, 3> channel_pair_fields(const Image& rgb) {
  check_image(rgb);
  if (rgb.channels != 3)
    throw InvalidInput("channel-pair fields need exactly 3 channels, got " + std::to_string(rgb.channels));
  if (rgb.dims.size() != 2) throw InvalidInput("channel-pair fields are defined for 2D images only");
  constexpr std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  std::array<VertexField, 3> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out[i] = zero_field(rgb.dims);
    for (long long v = 0; v < rgb.vertex_count(); ++v) {
      out[i].components[0][v] = rgb.at(v, pairs[i][0]);
      out[i].components[1][v] = rgb.at(v, pairs[i][1]);
    }
  }
  return out;
}

VertexField patch_topology_field(const Image& image, int patch_edge, double threshold, const EigenOptions& options) {
  check_scalar(image);
  if (patch_edge < 2) throw ParameterError("patch edge must be at least 2");
  const int m = static_cast<int>(image.dims.size());
  Extents patch_dims(m);
  for (int a = 0; a < m; ++a) {
    if (image.dims[a] % patch_edge != 0)
      throw ParameterError("image extent " + std::to_string(image.dims[a]) + " is not divisible by patch edge " +
                           std::to_string(patch_edge));
    patch_dims[a] = image.dims[a] / patch_edge;
  }

  const GridComplex patch_grid(Extents(m, patch_edge), 1.0);
  const auto stride = strides(image.dims);
  VertexField f = zero_field(patch_dims);
  std::vector<double> values(static_cast<std::size_t>(patch_grid.vertex_count()));
  for (long long cell = 0; cell < extent_product(patch_dims); ++cell) {
    const auto origin = unravel(patch_dims, cell);
    for (int local = 0; local < patch_grid.vertex_count(); ++local) {
      const auto q = patch_grid.vertex_point(local);
      long long v = 0;
      for (int a = 0; a < m; ++a) v += static_cast<long long>(origin[a] * patch_edge + q[a]) * stride[a];
      values[local] = image.values[v];
    }
    const VertexMask mask = segment(patch_grid, values, threshold);
    for (int k = 0; k < m; ++k)
      f.components[k][cell] =
          betti(patch_grid, mask, k, BoundaryCondition::tangential, LaplacianVariant::big, options).value_or(0);
  }
  return f;
}

Cochain to_one_form(const VertexField& field, const GridComplex& grid) {
  const int m = grid.dimension();
  if (field.dims != grid.dims() || static_cast<int>(field.components.size()) != m)
    throw InvalidInput("vertex field does not match the grid");
  for (const auto& c : field.components)
    if (c.size() != grid.vertex_count()) throw InvalidInput("vertex field component has the wrong length");

  const auto stride = strides(grid.dims());
  Cochain form{1, Support::full, Eigen::VectorXd(grid.cell_count(1))};
  for (int a = 0; a < m; ++a) {
    const AxisSet t = 1u << a;
    const Extents e = grid.type_extents(t);
    const int offset = grid.type_offset(t);
    const Eigen::VectorXd& comp = field.components[a];
    for (long long local = 0; local < extent_product(e); ++local) {
      const long long v = grid.vertex_index(unravel(e, local));
      form.values[offset + local] = 0.5 * (comp[v] + comp[v + stride[a]]);
    }
  }
  return form;
}

CubeField to_cube_field(const Cochain& form, const GridComplex& grid) {
  check_cochain(form, 1, grid.cell_count(1));
  if (form.support != Support::full) throw InvalidInput("cube averaging expects a full-grid 1-cochain");
  const int m = grid.dimension();
  const AxisSet top = (1u << m) - 1;
  CubeField out;
  out.dims = grid.type_extents(top);
  const long long cubes = extent_product(out.dims);
  out.components.assign(m, Eigen::VectorXd::Zero(cubes));
  const double weight = 1.0 / static_cast<double>(1 << (m - 1));

  for (int a = 0; a < m; ++a) {
    const AxisSet t = 1u << a;
    const Extents e = grid.type_extents(t);
    const auto edge_stride = strides(e);
    const int offset = grid.type_offset(t);
    std::vector<int> others;
    for (int b = 0; b < m; ++b)
      if (b != a) others.push_back(b);
    for (long long c = 0; c < cubes; ++c) {
      const auto anchor = unravel(out.dims, c);
      long long base = 0;
      for (int b = 0; b < m; ++b) base += anchor[b] * edge_stride[b];
      double sum = 0.0;
      for (unsigned shift = 0; shift < (1u << others.size()); ++shift) {
        long long idx = base;
        for (std::size_t r = 0; r < others.size(); ++r)
          if (shift & (1u << r)) idx += edge_stride[others[r]];
        sum += form.values[offset + idx];
      }
      out.components[a][c] = sum * weight;
    }
  }
  return out;
}

} // namespace cubehodge

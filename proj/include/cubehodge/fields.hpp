#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cubehodge/eigensolver.hpp"
#include "cubehodge/grid.hpp"

namespace cubehodge {

/// Image sampled on grid vertices: values are row-major over dims with the
/// channel index innermost.
struct Image {
  Extents dims;
  int channels = 1;
  std::vector<double> values;

  long long vertex_count() const { return extent_product(dims); }
  double at(long long vertex, int channel = 0) const { return values[vertex * channels + channel]; }
};

/// Throws InvalidInput if the value count disagrees with dims and channels.
void check_image(const Image& image);

/// Rec. 601 luma of a 3-channel image; single-channel images pass through.
Image luminance(const Image& image);

/// One m-vector per grid vertex, stored as m component arrays.
struct VertexField {
  Extents dims;
  std::vector<Eigen::VectorXd> components;
};

/// One m-vector per m-cell; dims are the cube extents (vertex extents - 1).
struct CubeField {
  Extents dims;
  std::vector<Eigen::VectorXd> components;
};

enum class FlowDirection : std::uint8_t { descend, ascend };

/// x_a(p) = (I(p + s e_a) - I(p - t e_a)) / 2 with samples clamped to the
/// image; s = t = 1 gives centered differences.
VertexField gradient_field(const Image& image, int forward_step = 1, int backward_step = 1);

/// Steepest-neighbor flow over the 3^m - 1 neighbors. descend points each
/// vertex at its strictly smaller neighbors of minimal value (ascend: the
/// strictly larger ones of maximal value) with magnitude I(p); ties average
/// the unit directions, and no candidate or a cancelled average gives zero.
VertexField flow_field(const Image& image, FlowDirection direction = FlowDirection::descend);

/// Fields built from the (r,g), (r,b) and (g,b) channel pairs of a 2D color image.
std::array<VertexField, 3> channel_pair_fields(const Image& rgb);

/// Field on the grid of patch_edge-sized patches whose vector is
/// (beta_0, ..., beta_{m-1}) of the thresholded patch.
VertexField patch_topology_field(const Image& image, int patch_edge, double threshold,
                                 const EigenOptions& options = {});

/// Edge 1-form from a vertex field: each edge takes the mean of the
/// field's component along the edge at its two endpoints.
Cochain to_one_form(const VertexField& field, const GridComplex& grid);

/// Cube-centered vectors: component a is the mean of the cube's 2^(m-1)
/// edges along axis a. Expects a full-grid 1-cochain.
CubeField to_cube_field(const Cochain& form, const GridComplex& grid);

} // namespace cubehodge

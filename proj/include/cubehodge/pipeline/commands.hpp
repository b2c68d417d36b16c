#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cubehodge/grid.hpp"
#include "cubehodge/pipeline/config.hpp"

namespace cubehodge::pipeline {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1; // some images were skipped
constexpr int kExitFatal = 2;

/// Writes `decomposed` (N, C, spatial...) float32 and `labels` (if the input
/// has them) for the images that succeeded, plus a JSON sidecar at
/// sidecar_path(output). Images whose decomposition fails are left out of
/// both arrays and listed in the sidecar.
int run_decompose(const PipelineConfig& config, std::ostream& log);

/// Per-image Betti numbers beta_0..beta_{m-1} as JSON (null for an empty
/// support) to config.output, or to out when output is empty.
int run_betti(const PipelineConfig& config, std::ostream& out);

/// Smallest config.count eigenvalues of L_{degree,condition} per image, and
/// the kernel dimension. With raster_dir set, kernel vectors are exported
/// as PNG magnitude rasters.
int run_spectra(const PipelineConfig& config, std::ostream& out);

/// Component magnitude rasters into the directory config.output: one per
/// component for 2D images, one mid-slice per axis and component for 3D.
int run_export_plot(const PipelineConfig& config, std::ostream& log);

/// Lists the members of config.input with dtype and shape, and the detected
/// image layout.
int run_inspect(const PipelineConfig& config, std::ostream& out);

std::filesystem::path sidecar_path(const std::filesystem::path& output);

/// Per-cube averages of a full-grid k-cochain: one array per k-cell type
/// (in grid type order), each over the cube extents.
std::vector<Eigen::VectorXd> cube_average(const GridComplex& grid, int degree, const Eigen::VectorXd& form);

/// Pointwise Euclidean norm of component arrays.
Eigen::VectorXd magnitude(const std::vector<Eigen::VectorXd>& components);

/// Row-major slice through the middle of a 3D array along `axis`.
std::vector<double> mid_slice(const Eigen::VectorXd& values, const Extents& dims, int axis, int& height, int& width);

} // namespace cubehodge::pipeline

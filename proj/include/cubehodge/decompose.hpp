#pragma once

#include <cstdint>
#include <vector>

#include "cubehodge/cg.hpp"
#include "cubehodge/fields.hpp"
#include "cubehodge/grid.hpp"
#include "cubehodge/laplacian.hpp"
#include "cubehodge/manifold.hpp"

namespace cubehodge {

struct PotentialSolution {
  Eigen::VectorXd potential;
  SolveReport report;
};

struct DecompositionDiagnostics {
  SolveReport normal_solve;
  SolveReport tangential_solve;
  std::vector<int> normal_support;     // cell counts per degree
  std::vector<int> tangential_support; // cell counts per degree
  bool empty_mask = false;
  // |<wi, wj>| / (|wi| |wj|); zero when either component vanishes.
  double cosine_exact_coexact = 0.0;
  double cosine_exact_harmonic = 0.0;
  double cosine_coexact_harmonic = 0.0;

  double max_cosine() const;
};

/// V = exact_normal + coexact_tangential + harmonic, all on the full grid.
struct DecompositionResult {
  Cochain exact_normal;       // P_n^T D_{k-1,n} W_n
  Cochain coexact_tangential; // P_t^T S_{k,t}^{-1} D_{k,t}^T S_{k+1,t} W_t
  Cochain harmonic;           // V minus the other two
  Eigen::VectorXd potential_normal;     // W_n on the normal (k-1)-support
  Eigen::VectorXd potential_tangential; // W_t on the tangential (k+1)-support
  DecompositionDiagnostics diagnostics;
};

/// Potential solve on the normal (k-1)-support:
///   L_{k-1,n} W_n = D_{k-1,n}^T S_{k,n} P_{k,n} V.
class NormalPotentialSolver {
public:
  NormalPotentialSolver(const GridComplex& grid, SupportSet support, int degree, LaplacianVariant variant,
                        SolverOptions options = {});

  const SupportSet& support() const { return support_; }
  const SparseMatrix& laplacian() const { return laplacian_.matrix; }
  PotentialSolution solve(const Cochain& form) const;
  /// Full-grid exact component P_n^T D_{k-1,n} W_n.
  Eigen::VectorXd component(const Eigen::VectorXd& potential) const;

private:
  const GridComplex* grid_;
  SupportSet support_;
  int degree_;
  SolverOptions options_;
  SparseMatrix derivative_; // D_{k-1,n}
  double derivative_norm_ = 0.0;
  Eigen::VectorXd star_;    // diagonal of S_{k,n}
  LaplacianOperator laplacian_;
};

/// Potential solve on the tangential (k+1)-support:
///   L_{k+1,t} W_t = S_{k+1,t} D_{k,t} P_{k,t} V.
class TangentialPotentialSolver {
public:
  TangentialPotentialSolver(const GridComplex& grid, SupportSet support, int degree, LaplacianVariant variant,
                            SolverOptions options = {});

  const SupportSet& support() const { return support_; }
  const SparseMatrix& laplacian() const { return laplacian_.matrix; }
  PotentialSolution solve(const Cochain& form) const;
  /// Full-grid coexact component P_t^T S_{k,t}^{-1} D_{k,t}^T S_{k+1,t} W_t.
  Eigen::VectorXd component(const Eigen::VectorXd& potential) const;

private:
  const GridComplex* grid_;
  SupportSet support_;
  int degree_;
  SolverOptions options_;
  SparseMatrix derivative_; // D_{k,t}
  double derivative_norm_ = 0.0;
  Eigen::VectorXd star_;    // diagonal of S_{k,t}
  Eigen::VectorXd star_up_; // diagonal of S_{k+1,t}
  LaplacianOperator laplacian_;
};

/// Three-component decomposition of k-forms over one masked grid. Both
/// potential systems are assembled once and reused across forms. The grid
/// must outlive the decomposer.
class HodgeDecomposer {
public:
  HodgeDecomposer(const GridComplex& grid, const VertexMask& mask, int degree = 1,
                  LaplacianVariant variant = LaplacianVariant::big, SolverOptions options = {});

  int degree() const { return degree_; }
  const NormalPotentialSolver& normal() const { return normal_; }
  const TangentialPotentialSolver& tangential() const { return tangential_; }

  DecompositionResult decompose(const Cochain& form) const;

private:
  const GridComplex* grid_;
  int degree_;
  bool empty_mask_;
  NormalPotentialSolver normal_;
  TangentialPotentialSolver tangential_;
};

PotentialSolution solve_potential_normal(const Cochain& form, const GridComplex& grid, const SupportSet& normal,
                                         LaplacianVariant variant = LaplacianVariant::big,
                                         const SolverOptions& options = {});

PotentialSolution solve_potential_tangential(const Cochain& form, const GridComplex& grid,
                                             const SupportSet& tangential,
                                             LaplacianVariant variant = LaplacianVariant::big,
                                             const SolverOptions& options = {});

/// Decomposes a full-grid 1-form over the supports derived from the mask.
DecompositionResult hodge_decompose(const Cochain& form, const GridComplex& grid, const VertexMask& mask,
                                    LaplacianVariant variant = LaplacianVariant::big,
                                    const SolverOptions& options = {});

// ---------------------------------------------------------------------------
// Decomposed image generation

enum class FieldMethod : std::uint8_t { gradient, flow, channel_pair, patch };

struct FieldParams {
  int forward_step = 1;
  int backward_step = 1;
  FlowDirection direction = FlowDirection::descend;
  int patch_edge = 16;
};

struct ImageDecompositionConfig {
  double threshold = 1.0;
  FieldMethod method = FieldMethod::gradient;
  FieldParams params;
  LaplacianVariant variant = LaplacianVariant::big;
  SolverOptions solver;
};

/// Cube-centered decomposition of an image. Channels are grouped per
/// decomposed field as [exact m | coexact m | harmonic m]; gradient and flow
/// produce one field (3m channels), channel-pair three (9m channels).
struct DecomposedImage {
  std::vector<long long> shape; // {channels, cube extents...}
  std::vector<double> data;     // row-major over shape
  std::vector<CubeField> components;
  std::vector<DecompositionDiagnostics> diagnostics; // one per decomposed field

  int channels() const { return static_cast<int>(shape.front()); }
};

/// Accepts 2D images with 1 or 3 channels and single-channel 3D volumes.
/// Color images are reduced to luminance for the mask and for the gradient,
/// flow and patch methods.
DecomposedImage decomposed_image(const Image& image, const ImageDecompositionConfig& config);

/// Channel count decomposed_image produces for an image of this layout.
int decomposed_channel_count(int dimension, FieldMethod method);

/// Spatial extents of the decomposed output for an input of the given extents.
Extents decomposed_extents(const Extents& dims, const ImageDecompositionConfig& config);

} // namespace cubehodge

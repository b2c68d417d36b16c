#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "cubehodge/decompose.hpp"
#include "cubehodge/pipeline/npy.hpp"

namespace cubehodge::pipeline {

struct PipelineConfig {
  std::string input;
  std::string output;
  // MedMNIST-style archives store <split>_images / <split>_labels; empty
  // selects plain images / labels.
  std::string split;
  // nullopt: per-dtype default, see default_threshold.
  std::optional<double> threshold;
  FieldMethod method = FieldMethod::gradient;
  int forward_step = 1;
  int backward_step = 1;
  FlowDirection direction = FlowDirection::descend;
  int patch_edge = 16;
  LaplacianVariant variant = LaplacianVariant::big;
  double tolerance = 1e-10;
  int max_iterations_factor = 10;
  int workers = 1;

  // spectra / export-plot
  int degree = 1;
  BoundaryCondition condition = BoundaryCondition::tangential;
  int count = 6;
  std::string raster_dir; // empty: no raster export from spectra
  bool hsv = false;

  bool operator==(const PipelineConfig&) const = default;
};

/// Sets one key from its text value. Throws ParameterError for unknown keys
/// or malformed values.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

/// key = value lines; blank lines and lines starting with '#' are ignored.
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config_file(const std::filesystem::path& path, PipelineConfig base = {});

/// Canonical text: every key in fixed order, doubles in shortest
/// round-trip form. parse_config(serialize_config(c)) == c.
std::string serialize_config(const PipelineConfig& config);

/// Lowercase hex SHA-256 of serialize_config(config).
std::string config_hash(const PipelineConfig& config);

/// Throws ParameterError when a value is outside its documented range.
void validate(const PipelineConfig& config);

/// Applies CUBEHODGE_WORKERS if set.
void apply_environment(PipelineConfig& config);

/// Threshold resolved against the dtype default.
PipelineConfig resolve(PipelineConfig config, DType dtype);

ImageDecompositionConfig decomposition_config(const PipelineConfig& config);

} // namespace cubehodge::pipeline

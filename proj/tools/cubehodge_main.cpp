// Command-line front end for the batch pipeline.
//
// Settings are layered: built-in defaults, then --config FILE, then the
// CUBEHODGE_WORKERS environment variable, then explicit flags.

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "cubehodge/errors.hpp"
#include "cubehodge/pipeline/commands.hpp"

namespace ch = cubehodge::pipeline;

namespace {

struct Flag {
  const char* key;
  const char* name;
  const char* help;
};

// One entry per config key; flags mirror the key names with dashes.
constexpr Flag kFlags[] = {
    {"input", "--input,-i", "input archive (.npz)"},
    {"output", "--output,-o", "output archive, JSON report or raster directory"},
    {"split", "--split", "MedMNIST split prefix (train, val, test)"},
    {"threshold", "--threshold", "foreground threshold, or auto"},
    {"method", "--method", "gradient|flow|channel-pair|patch"},
    {"forward_step", "--forward-step", "gradient forward step s"},
    {"backward_step", "--backward-step", "gradient backward step t"},
    {"direction", "--direction", "flow direction: descend|ascend"},
    {"patch_edge", "--patch-edge", "patch edge length for the patch method"},
    {"variant", "--variant", "Laplacian variant: big|hodge"},
    {"tolerance", "--tolerance", "CG relative residual tolerance"},
    {"max_iterations_factor", "--max-iterations-factor", "CG iteration cap as a multiple of the system size"},
    {"workers", "--workers,-j", "worker threads"},
    {"degree", "--degree", "form degree for spectra"},
    {"condition", "--condition", "boundary condition: tangential|normal"},
    {"count", "--count", "number of eigenvalues for spectra"},
    {"raster_dir", "--raster-dir", "directory for kernel vector rasters (spectra)"},
    {"hsv", "--hsv", "also write HSV direction rasters (export-plot): true|false"},
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hodge decomposition of image archives on Cartesian grids"};
  app.require_subcommand(1);

  std::string config_file;
  std::map<std::string, std::string> given;
  app.add_option("--config,-c", config_file, "key = value configuration file");
  for (const Flag& f : kFlags) {
    auto* opt = app.add_option(f.name, given[f.key], f.help);
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
  app.fallthrough();

  std::string command;
  for (const char* name : {"decompose", "betti", "spectra", "export-plot", "inspect"}) {
    app.add_subcommand(name)->callback([&command, name] { command = name; });
  }
  app.get_subcommand("decompose")->description("write the decomposed tensor archive and a JSON sidecar");
  app.get_subcommand("betti")->description("per-image Betti numbers as JSON");
  app.get_subcommand("spectra")->description("leading Laplacian eigenvalues as JSON");
  app.get_subcommand("export-plot")->description("component magnitude rasters as PNG");
  app.get_subcommand("inspect")->description("list archive members and the detected image layout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ch::kExitOk : ch::kExitFatal;
  }

  try {
    ch::PipelineConfig config;
    if (!config_file.empty()) config = ch::load_config_file(config_file, config);
    ch::apply_environment(config);
    for (const Flag& f : kFlags) {
      if (app.count(std::string(f.name).substr(0, std::string(f.name).find(','))) > 0)
        ch::apply_setting(config, f.key, given[f.key]);
    }
    if (config.input.empty()) throw cubehodge::ParameterError("an input archive is required (--input)");

    if (command == "decompose") return ch::run_decompose(config, std::cerr);
    if (command == "betti") return ch::run_betti(config, std::cout);
    if (command == "spectra") return ch::run_spectra(config, std::cout);
    if (command == "export-plot") return ch::run_export_plot(config, std::cerr);
    return ch::run_inspect(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "cubehodge " << command << ": " << e.what() << '\n';
    return ch::kExitFatal;
  }
}

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "curvlab/config.hpp"

namespace curvlab {

// One pipeline command = one output directory holding config.json (the
// effective configuration, sufficient to reproduce every byte), MANIFEST.json
// (inventory plus the guarantee labels the artifacts substantiate), a primary
// <verb>.json report, and plot-ready CSV tables.
struct CommandResult {
  std::string out_dir;
  std::vector<std::string> artifacts;  // file names relative to out_dir, sorted
  nlohmann::json report;               // contents of the primary JSON artifact
};

CommandResult cmd_surface(const RunConfig& config, const std::string& out_dir);
CommandResult cmd_gauss(const RunConfig& config, const std::string& out_dir);
CommandResult cmd_ray(const RunConfig& config, const std::string& out_dir);
CommandResult cmd_poisson(const RunConfig& config, const std::string& out_dir);
CommandResult cmd_fixedpoint(const RunConfig& config, const std::string& out_dir);
CommandResult cmd_sections(const RunConfig& config, const std::string& out_dir);
CommandResult cmd_criterion(const RunConfig& config, const std::string& out_dir);
CommandResult cmd_h4(const RunConfig& config, const std::string& out_dir);
CommandResult cmd_reproduce_theorem_a(const RunConfig& config, const std::string& out_dir);

const std::vector<std::string>& command_verbs();
CommandResult run_command(const std::string& verb, const RunConfig& config,
                          const std::string& out_dir);

}  // namespace curvlab

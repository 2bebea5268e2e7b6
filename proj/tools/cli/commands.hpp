#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "cli/config.hpp"

namespace fdro::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitInfeasible = 4,
};

// Each command writes its artifacts into cfg.output_dir and returns their paths.
std::vector<std::filesystem::path> cmd_pdf(const RunConfig& cfg, std::ostream& log);
std::vector<std::filesystem::path> cmd_mc(const RunConfig& cfg, bool compare, std::ostream& log);
std::vector<std::filesystem::path> cmd_error_curve(const RunConfig& cfg, std::ostream& log);
std::vector<std::filesystem::path> cmd_optimize(const RunConfig& cfg, std::ostream& log);

// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fdro::cli

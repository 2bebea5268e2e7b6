#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdro/counting.hpp"
#include "fdro/montecarlo.hpp"
#include "fdro/optimizer.hpp"

namespace fdro::cli {

// Invalid or incomplete configuration; `path` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline constexpr const char* kOutputDirEnv = "FDRO_OUTPUT_DIR";

struct RunConfig {
  std::optional<SwitchingRates> rates;
  std::optional<EmissionRates> emission;
  std::optional<double> duration;  // window.T
  int grid_nodes = 2001;
  std::optional<StatePriors> priors;

  McConfig mc;
  int tv_bin_width = 4;

  std::vector<double> error_durations;
  std::optional<double> curve_duration;

  std::optional<Scenario> scenario;
  std::optional<CalibrationSet> calibration;
  std::vector<double> power_grid;
  std::vector<double> duration_grid;
  std::vector<int> repetition_grid;
  std::optional<NuclearRepetition> nuclear;

  std::filesystem::path output_dir = ".";
  bool write_csv = true;
  bool write_json = true;

  Window window() const;
  // Config priors, else the steady state of `rates`.
  StatePriors priors_or_steady_state() const;
};

// "a.b.c=value"; value is parsed as JSON, falling back to a plain string.
void apply_override(nlohmann::json& config, const std::string& assignment);

RunConfig parse_config(const nlohmann::json& config, const std::filesystem::path& base_dir);

nlohmann::json read_config_json(const std::filesystem::path& file);

RunConfig load_config_file(const std::filesystem::path& file,
                           const std::vector<std::string>& overrides);

}  // namespace fdro::cli

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "uee/config.hpp"

namespace uee {

constexpr const char* kToolName = "ueeucb";
constexpr const char* kToolVersion = "0.1.0";

// Shortest round-trip decimal rendering; all result files go through this so
// repeated runs are byte-identical.
std::string format_double(double value);

// Each command writes `trajectories.csv` + `summary.csv` + `metadata.json`
// (simulate, replay), `sweep_summary.csv` + `metadata.json` (sweep) or a
// text report (stats, bound). `report` receives one-line progress/result
// output suitable for a terminal.

void cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                  std::ostream& report);

void cmd_replay(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                std::ostream& report);

void cmd_stats(const std::filesystem::path& trace_path,
               const std::optional<std::filesystem::path>& out_dir, std::ostream& report);

void cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir,
               std::ostream& report);

void cmd_bound(const ExperimentConfig& config, std::ostream& report);

}  // namespace uee

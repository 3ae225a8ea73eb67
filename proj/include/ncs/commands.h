#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "ncs/config.h"

namespace ncs {

/// Overrides supplied on the command line.
struct CommandOptions {
  std::string out_dir = ".";
  std::optional<int> paths;
  std::optional<int> slots;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> policy;
  int trace_paths = 0;
  int threads = 0;
};

enum ExitCode { kExitOk = 0, kExitValidation = 2, kExitDivergence = 3 };

/// Applies the overrides to a parsed configuration.
ExperimentConfig ApplyOverrides(ExperimentConfig config, const CommandOptions& options);

/// "# config_hash=<hex> seed=<n>" line put at the top of every output file.
std::string OutputHeader(const ExperimentConfig& config);

/// run.csv (and trace_<i>.csv for the first trace_paths paths).
int CmdRun(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log);
/// sweep.csv.
int CmdSweep(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log);
/// stability_report.txt and pitilde.csv.
int CmdAnalyze(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log);
/// regions.csv.
int CmdRegions(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log);

}  // namespace ncs

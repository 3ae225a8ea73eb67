#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ncs/commands.h"

namespace {

struct Flags {
  std::string config;
  ncs::CommandOptions options;
  int paths = 0;
  int slots = 0;
  std::uint64_t seed = 0;
  std::string policy;
};

void AddCommonFlags(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "Experiment configuration file")->required();
  cmd->add_option("--out", flags.options.out_dir, "Output directory");
  cmd->add_option("--paths", flags.paths, "Monte Carlo paths");
  cmd->add_option("--slots", flags.slots, "Slots per path");
  cmd->add_option("--seed", flags.seed, "Random seed");
  cmd->add_option("--policy", flags.policy,
                  "proposed, baseline1, baseline2, baseline3, baseline4 or baseline5");
  cmd->add_option("--threads", flags.options.threads, "Worker threads (0: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and analysis tools for an energy-harvesting MIMO networked control "
               "system"};
  app.require_subcommand(1);
  Flags flags;
  CLI::App* run = app.add_subcommand("run", "Monte Carlo run of one policy (run.csv)");
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep theta or mean_alpha (sweep.csv)");
  CLI::App* analyze =
      app.add_subcommand("analyze", "Stability condition and MSE bound (stability_report.txt)");
  CLI::App* regions = app.add_subcommand("regions", "Decision-region scan (regions.csv)");
  for (CLI::App* cmd : {run, sweep, analyze, regions}) AddCommonFlags(cmd, flags);
  run->add_option("--trace", flags.options.trace_paths, "Write per-slot traces of the first N paths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return ncs::kExitValidation;
  }

  for (CLI::App* cmd : {run, sweep, analyze, regions}) {
    if (cmd->count("--paths") > 0) flags.options.paths = flags.paths;
    if (cmd->count("--slots") > 0) flags.options.slots = flags.slots;
    if (cmd->count("--seed") > 0) flags.options.seed = flags.seed;
    if (cmd->count("--policy") > 0) flags.options.policy = flags.policy;
  }

  try {
    const ncs::ExperimentConfig config =
        ncs::ApplyOverrides(ncs::ParseConfigFile(flags.config), flags.options);
    if (run->parsed()) return ncs::CmdRun(config, flags.options, std::cout);
    if (sweep->parsed()) return ncs::CmdSweep(config, flags.options, std::cout);
    if (analyze->parsed()) return ncs::CmdAnalyze(config, flags.options, std::cout);
    return ncs::CmdRegions(config, flags.options, std::cout);
  } catch (const ncs::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ncs::kExitValidation;
  } catch (const ncs::DesignError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ncs::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

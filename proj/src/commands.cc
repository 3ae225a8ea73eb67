#include "ncs/commands.h"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "ncs/analysis.h"
#include "ncs/channel.h"

namespace ncs {

namespace {

// Stream index reserved for the pi~ statistics, disjoint from path indices.
constexpr std::uint64_t kPiTildeStream = 1ull << 48;

std::ofstream OpenOutput(const CommandOptions& options, const std::string& name) {
  std::filesystem::create_directories(options.out_dir);
  const std::filesystem::path path = std::filesystem::path(options.out_dir) / name;
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  return out;
}

std::vector<double> SweepValues(const ExperimentConfig& c) {
  if (!c.sweep_values.empty()) return c.sweep_values;
  if (c.sweep_axis == "theta") return {40.0, 60.0, 80.0, 100.0, 120.0};
  return {20.0, 30.0, 40.0, 50.0};
}

}  // namespace

ExperimentConfig ApplyOverrides(ExperimentConfig config, const CommandOptions& options) {
  std::vector<std::string> errors;
  if (options.paths) {
    if (*options.paths < 1) errors.push_back("--paths: must be >= 1");
    config.paths = *options.paths;
  }
  if (options.slots) {
    if (*options.slots < 1) errors.push_back("--slots: must be >= 1");
    config.slots = *options.slots;
  }
  if (options.seed) config.seed = *options.seed;
  if (options.policy) {
    try {
      ParsePolicyKind(*options.policy);
    } catch (const DomainError& e) {
      errors.push_back(std::string("--policy: ") + e.what());
    }
    config.policy = *options.policy;
  }
  if (!errors.empty()) throw ConfigError(errors);
  return config;
}

std::string OutputHeader(const ExperimentConfig& config) {
  return "# config_hash=" + config.Hash() + " seed=" + std::to_string(config.seed) + "\n";
}

int CmdRun(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log) {
  const SystemConfig system = config.BuildSystem();
  RunOptions run_options;
  run_options.threads = options.threads;
  run_options.trace_paths = options.trace_paths;
  const RunResult r = RunMonteCarlo(system, config.BuildPolicy(config.policy),
                                    static_cast<std::size_t>(config.paths),
                                    static_cast<std::size_t>(config.slots), config.seed,
                                    run_options);
  std::ofstream out = OpenOutput(options, "run.csv");
  out << OutputHeader(config);
  out << "# nmse = mean over slots and paths of ||x - xhat||^2 / K; ci = 95% half-width\n";
  WriteRunCsvHeader(out);
  WriteRunCsv(out, r);
  for (std::size_t i = 0; i < r.traces.size(); ++i) {
    std::ofstream trace = OpenOutput(options, "trace_" + std::to_string(i) + ".csv");
    trace << OutputHeader(config);
    WriteTraceCsv(trace, r.traces[i]);
  }
  log << r.policy << ": nmse " << Fmt(r.nmse.mean) << " +- " << Fmt(r.nmse.half_width)
      << ", saturation " << Fmt(r.saturation_rate.mean) << ", divergent paths "
      << r.divergent_paths << "\n";
  return r.divergent_paths > 0 ? kExitDivergence : kExitOk;
}

int CmdSweep(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log) {
  const SystemConfig system = config.BuildSystem();
  std::vector<PolicySpec> policies;
  if (config.sweep_policies.empty()) {
    policies.push_back(config.BuildPolicy(config.policy));
  } else {
    for (const auto& name : config.sweep_policies) policies.push_back(config.BuildPolicy(name));
  }
  const SweepAxis axis = config.sweep_axis == "theta" ? SweepAxis::kTheta : SweepAxis::kMeanAlpha;
  RunOptions run_options;
  run_options.threads = options.threads;
  const std::vector<SweepRow> rows =
      Sweep(system, policies, axis, SweepValues(config), static_cast<std::size_t>(config.paths),
            static_cast<std::size_t>(config.slots), config.seed, run_options);
  std::ofstream out = OpenOutput(options, "sweep.csv");
  out << OutputHeader(config);
  WriteSweepCsv(out, rows, axis);
  std::size_t divergent = 0;
  for (const auto& row : rows) divergent += row.result.divergent_paths;
  log << "sweep: " << rows.size() << " rows, divergent paths " << divergent << "\n";
  return divergent > 0 ? kExitDivergence : kExitOk;
}

int CmdAnalyze(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log) {
  const SystemConfig system = config.BuildSystem();
  Rng rng = MakeStreamRng(config.seed, kPiTildeStream);
  const PiTildeStats stats = EstimatePiTildeStats(rng, config.n_c, config.n_s, system.k(),
                                                  static_cast<std::size_t>(config.pitilde_draws));
  const double inverse_alpha = system.arrivals.InverseMeanPositive();
  const StabilityInputs in = config.BuildStabilityInputs(inverse_alpha);
  const StabilityReport report = CheckStability(system.model, system.limiter, stats, in);

  std::optional<MseBoundReport> mse;
  std::string note;
  try {
    mse = MseBound(system.model, system.limiter, report, in);
  } catch (const BoundUndefinedError& e) {
    note = e.what();
  }

  RunOptions run_options;
  run_options.threads = options.threads;
  const RunResult r = RunMonteCarlo(system, config.BuildPolicy(config.policy),
                                    static_cast<std::size_t>(config.paths),
                                    static_cast<std::size_t>(config.slots), config.seed,
                                    run_options);

  std::ofstream out = OpenOutput(options, "stability_report.txt");
  out << OutputHeader(config);
  out << FormatStabilityReport(report, in, mse ? &*mse : nullptr, note);
  out << "arrival_zero_probability: " << Fmt(system.arrivals.ZeroProbability()) << "\n";
  out << "pitilde_samples: " << stats.samples().size() << "\n";
  out << "pitilde_excluded_draws: " << stats.excluded_draws() << "\n";
  out << "sim_policy: " << r.policy << "\n";
  out << "sim_paths: " << r.n_paths << "\n";
  out << "sim_slots: " << r.n_slots << "\n";
  out << "sim_divergent_paths: " << r.divergent_paths << "\n";
  out << "sim_mean_tr_sigma: " << Fmt(r.tr_sigma.mean) << "\n";
  out << "sim_mean_tr_sigma_ci: " << Fmt(r.tr_sigma.half_width) << "\n";
  if (mse) {
    out << "sim_tr_sigma_below_bound: " << (r.tr_sigma.upper() < mse->bound ? "true" : "false")
        << "\n";
  } else {
    out << "sim_tr_sigma_below_bound: undefined\n";
  }
  std::ofstream samples = OpenOutput(options, "pitilde.csv");
  samples << OutputHeader(config);
  stats.WriteCsv(samples);

  log << "stability condition " << (report.satisfied ? "satisfied" : "NOT satisfied")
      << ": lhs " << Fmt(report.lhs) << ", rhs_max " << Fmt(report.rhs_max) << "\n";
  return r.divergent_paths > 0 ? kExitDivergence : kExitOk;
}

int CmdRegions(const ExperimentConfig& config, const CommandOptions& options, std::ostream& log) {
  const RegionScanSetup setup = config.BuildRegionSetup();
  std::vector<RegionMap> maps;
  for (double E : config.region_energies) maps.push_back(DecisionRegionScan(setup, E));
  std::ofstream out = OpenOutput(options, "regions.csv");
  out << OutputHeader(config);
  WriteRegionsCsv(out, maps);
  for (const RegionMap& m : maps) {
    std::size_t both = 0;
    for (const auto& row : m.active) {
      for (int a : row) both += a == 2 ? 1 : 0;
    }
    log << "E = " << Fmt(m.E) << ": both streams active at " << both << " grid points\n";
  }
  return kExitOk;
}

}  // namespace ncs

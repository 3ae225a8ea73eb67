#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ncs/energy.h"
#include "ncs/estimator.h"
#include "ncs/limiter.h"
#include "ncs/plant.h"
#include "ncs/precoder.h"
#include "ncs/random.h"

namespace ncs {

/// Amount taken from the battery each slot.
///  kRealized: ||F q||^2 tau, the energy actually radiated.
///  kReserved: M^2 Tr(F^H F) tau, the worst case the availability check allows for.
enum class EnergyAccounting { kRealized, kReserved };

struct SystemConfig {
  PlantModel model;
  LimiterParams limiter;
  int n_c = 2;
  int n_s = 3;
  ArrivalModel arrivals;
  double theta = 80.0;
  double tau = 0.01;
  /// Initial battery level as a fraction of theta.
  double initial_energy_fraction = 0.5;
  /// A path is declared divergent once ||x||^2 exceeds this.
  double divergence_guard = 1e12;
  EnergyAccounting accounting = EnergyAccounting::kRealized;

  int k() const { return model.state_dim(); }
  /// Throws DomainError on inconsistent dimensions or parameters.
  void Validate() const;
};

struct PathState {
  VectorXd x;
  Estimator estimator;
  EnergyQueue queue;
  long n = 0;
};

PathState InitialState(const SystemConfig& cfg);

struct SlotTrace {
  long n = 0;
  double E_before = 0.0;
  double L = 0.0;
  Mode mode = Mode::kDormant;
  int gamma = 1;
  double beta = 0.0;
  /// Realized spend ||F q||^2 tau.
  double energy_used = 0.0;
  /// M^2 Tr(F^H F) tau, the amount reserved by the availability constraint.
  double energy_reserved = 0.0;
  double alpha = 0.0;
  double E_after = 0.0;
  double tr_sigma = 0.0;
  double sq_error = 0.0;
  double x_norm2 = 0.0;
};

/// One slot: channel draw, dynamic range, precoding decision (checked
/// against the availability constraint, FeasibilityError otherwise),
/// limiter, reception, control from the current estimate, estimator and
/// covariance update, plant step, then spend followed by harvest.
SlotTrace RunSlot(const SystemConfig& cfg, PathState& state, const Policy& policy, Rng& rng);

/// Mean with a normal-approximation 95% half-width over independent paths.
struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;
  std::size_t count = 0;

  double lower() const { return mean - half_width; }
  double upper() const { return mean + half_width; }
};
Estimate MeanWithCi(const std::vector<double>& values);

struct PathSummary {
  std::size_t slots = 0;
  bool diverged = false;
  double nmse = 0.0;
  double mean_sq_error = 0.0;
  double mean_tr_sigma = 0.0;
  std::size_t saturated = 0;
  std::size_t active = 0;
  std::size_t feasibility_violations = 0;
  std::size_t queue_violations = 0;
  std::size_t overspend = 0;
  double total_spent = 0.0;
  double total_harvest = 0.0;
  double initial_energy = 0.0;
  bool ledger_ok = true;
  double post_active_sum = 0.0;
  std::size_t post_active_count = 0;
  double post_dormant_sum = 0.0;
  std::size_t post_dormant_count = 0;
};

struct RunOptions {
  int threads = 0;  // 0: hardware concurrency
  /// Number of leading paths whose per-slot traces are kept.
  int trace_paths = 0;
};

struct RunResult {
  std::string policy;
  std::size_t n_paths = 0;
  std::size_t n_slots = 0;
  std::uint64_t seed = 0;
  std::vector<PathSummary> paths;
  std::vector<std::vector<SlotTrace>> traces;

  Estimate nmse;
  Estimate tr_sigma;
  Estimate sq_error;
  Estimate saturation_rate;
  Estimate duty_cycle;
  /// Per-path difference of mean squared error after active and after
  /// dormant slots, over paths that have both.
  Estimate reset_gap;
  std::size_t divergent_paths = 0;
  std::size_t total_slots = 0;
  std::size_t total_saturated = 0;
  std::size_t feasibility_violations = 0;
  std::size_t queue_violations = 0;
  std::size_t ledger_violations = 0;
};

RunResult RunMonteCarlo(const SystemConfig& cfg, const PolicySpec& policy, std::size_t n_paths,
                        std::size_t n_slots, std::uint64_t seed, const RunOptions& options = {});

enum class SweepAxis { kTheta, kMeanAlpha };

struct SweepRow {
  std::string policy;
  double value = 0.0;
  RunResult result;
};

/// One run per (policy, value); every run uses the same seed.
std::vector<SweepRow> Sweep(const SystemConfig& cfg, const std::vector<PolicySpec>& policies,
                            SweepAxis axis, const std::vector<double>& values,
                            std::size_t n_paths, std::size_t n_slots, std::uint64_t seed,
                            const RunOptions& options = {});

/// Decoupled two-subsystem setting: H = diag(h1, h2), Sigma = diag(s1, s2).
struct RegionScanSetup {
  PlantModel model;
  LimiterParams limiter;
  double theta = 36.0;
  double tau = 1.0;
  double h1 = 4.0;
  double sigma1 = 70.0;
  double h2_max = 8.0;
  double sigma2_max = 100.0;
  int grid = 50;
  /// Keep channel i paired with subsystem i; otherwise the general
  /// sorted pairing is used.
  bool decoupled = true;
};

struct RegionMap {
  double E = 0.0;
  std::vector<double> h2;
  std::vector<double> sigma2;
  /// active[i][j]: streams switched on at (h2[i], sigma2[j]).
  std::vector<std::vector<int>> active;
};

RegionMap DecisionRegionScan(const RegionScanSetup& setup, double E);

std::string Fmt(double v);
void WriteRunCsv(std::ostream& os, const RunResult& r);
void WriteRunCsvHeader(std::ostream& os);
void WriteSweepCsv(std::ostream& os, const std::vector<SweepRow>& rows, SweepAxis axis);
void WriteTraceCsv(std::ostream& os, const std::vector<SlotTrace>& trace);
void WriteRegionsCsv(std::ostream& os, const std::vector<RegionMap>& maps);

}  // namespace ncs

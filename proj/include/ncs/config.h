#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncs/analysis.h"
#include "ncs/errors.h"
#include "ncs/sim.h"

namespace ncs {

/// Raised with every violation found in a configuration, one per line.
class ConfigError : public DomainError {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Line-oriented "key = value" experiment description. Matrices are
/// row-major nested lists, e.g. A = [[1.3, 0.1], [-0.2, 1.2]]. '#' starts a
/// comment.
struct ExperimentConfig {
  MatrixXd A, B, W;
  /// Either Psi is given, or P and R (with gain_convention) are used to design it.
  MatrixXd Psi, P, R;
  GainConvention gain_convention = GainConvention::kStandard;

  double eps = 0.05;
  double M = 1.0;
  RangeCoefficient range_coefficient = RangeCoefficient::kClosedLoopGain;

  int n_c = 2;
  int n_s = 3;

  std::string arrival = "poisson";
  double mean_alpha = 40.0;
  double theta = 80.0;
  double initial_energy_fraction = 0.5;
  EnergyAccounting energy_accounting = EnergyAccounting::kRealized;

  double tau = 0.01;
  int paths = 200;
  int slots = 300;
  std::uint64_t seed = 1;
  double divergence_guard = 1e12;

  std::string policy = "proposed";
  int baseline_period = 3;

  std::string sweep_axis = "theta";
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_policies;

  int pitilde_draws = 20000;
  int grid_points = 200;
  double eta_extra_factor = 1.0;

  double region_h1 = 4.0;
  double region_sigma1 = 70.0;
  double region_h2_max = 8.0;
  double region_sigma2_max = 100.0;
  int region_grid = 50;
  std::vector<double> region_energies = {12.0, 20.0};

  /// Plant with Psi resolved (given or designed).
  PlantModel BuildPlant() const;
  SystemConfig BuildSystem() const;
  RegionScanSetup BuildRegionSetup() const;
  StabilityInputs BuildStabilityInputs(double inverse_alpha) const;
  ArrivalModel BuildArrivals() const;
  PolicySpec BuildPolicy(const std::string& name) const;

  /// Canonical serialization; parsing it yields an equal configuration.
  std::string ToText() const;
  /// FNV-1a of ToText(), as 16 hex digits.
  std::string Hash() const;
};

ExperimentConfig ParseConfigText(const std::string& text);
ExperimentConfig ParseConfigFile(const std::string& path);

}  // namespace ncs

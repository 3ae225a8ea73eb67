#pragma once

#include <cstddef>
#include <vector>

#include "ncs/numerics.h"
#include "ncs/random.h"

namespace ncs {

/// Battery state E with capacity theta, updated once per slot as
/// E <- min([E - spend]^+ + alpha, theta).
class EnergyQueue {
 public:
  /// Requires theta > 0, tau > 0 and 0 <= initial <= theta.
  EnergyQueue(double theta, double tau, double initial);

  double level() const { return level_; }
  double theta() const { return theta_; }
  double tau() const { return tau_; }
  /// Number of updates in which spend exceeded the stored energy.
  std::size_t overspend_count() const { return overspend_count_; }

  /// Spend first, then harvest. Throws DomainError on negative arguments.
  void SpendAndHarvest(double spend, double alpha);

 private:
  double theta_;
  double tau_;
  double level_;
  std::size_t overspend_count_ = 0;
};

/// M^2 Tr(F^H F) tau.
double PrecoderEnergy(const MatrixXcd& F, double M, double tau);

/// True iff M^2 Tr(F^H F) tau <= E + 1e-9.
bool CheckFeasible(double E, const MatrixXcd& F, double M, double tau);

/// I.i.d. harvested energy per slot.
class ArrivalModel {
 public:
  enum class Kind { kPoisson, kDeterministic, kEmpirical };

  static ArrivalModel Poisson(double mean);
  static ArrivalModel Deterministic(double value);
  /// Uniform draw from the given non-negative support points.
  static ArrivalModel Empirical(std::vector<double> values);

  Kind kind() const { return kind_; }
  double mean() const { return mean_; }
  double Sample(Rng& rng) const;

  /// Pr(alpha = 0).
  double ZeroProbability() const;
  /// E[1/alpha | alpha > 0]. Exact for the deterministic and empirical
  /// models; series evaluation for Poisson.
  double InverseMeanPositive() const;

 private:
  ArrivalModel(Kind kind, double mean, std::vector<double> values);

  Kind kind_;
  double mean_;
  std::vector<double> values_;
};

/// Monte Carlo estimate of E[1/alpha | alpha > 0] with the number of zero
/// draws, which are excluded.
struct InverseMeanEstimate {
  double inverse_mean;
  std::size_t zero_draws;
  std::size_t total_draws;
};
InverseMeanEstimate EstimateInverseMean(const ArrivalModel& model, Rng& rng,
                                        std::size_t n_draws);

}  // namespace ncs

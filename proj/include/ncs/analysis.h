#pragma once

#include <iosfwd>
#include <string>

#include "ncs/channel.h"
#include "ncs/limiter.h"
#include "ncs/plant.h"
#include "ncs/precoder.h"

namespace ncs {

/// sqrt(2/eps) (1 + ||A - B Psi A|| Theta) ||B Psi|| ||A||.
double DeltaConstant(const PlantModel& model, const LimiterParams& params);

struct StabilityInputs {
  /// E[1/alpha] (conditioned on alpha > 0).
  double inverse_alpha = 0.0;
  double theta = 0.0;
  double tau = 0.0;
  /// Number of quantile points of pi~ searched for the maximizing xi.
  int grid_points = 200;
  /// Extra multiplier in the eta expression; 1 leaves it out.
  double eta_extra_factor = 1.0;
};

struct StabilityReport {
  bool satisfied = false;
  double lhs = 0.0;
  double rhs_max = 0.0;
  double xi_star = 0.0;
  /// Spacing of the quantile grid around xi_star (resolution of the maximizer).
  double xi_resolution = 0.0;
  double delta = 0.0;
  double margin = 0.0;
  double m_a = 1.0;
  double m_aat = 1.0;
  double pr_below = 0.0;
  double cond_inverse_mean = 0.0;
  /// eps < 1/M(AA^T) - K Pr(pi~ < xi*).
  double eps_cap = 0.0;
  bool eps_ok = false;
  /// theta > 1 / rhs_max.
  double theta_floor = 0.0;
  bool theta_ok = false;
  /// E[alpha] > 1 / (rhs_max - 1/theta); infinite when rhs_max <= 1/theta.
  double arrival_floor = 0.0;
};

/// Right-hand side of the stability condition at a given xi.
double StabilityRhs(const PlantModel& model, const LimiterParams& params,
                    const PiTildeStats& stats, double tau, double xi);

/// Grid search of the right-hand side over quantiles of pi~ and comparison
/// with E[1/alpha] + 1/theta. Throws DomainError on empty stats.
StabilityReport CheckStability(const PlantModel& model, const LimiterParams& params,
                               const PiTildeStats& stats, const StabilityInputs& in);

struct MseBoundReport {
  double eta = 0.0;
  double bound = 0.0;
};

/// eta at xi*, then (1/eta)(1 + K tau (delta^2/||B Psi||^2) E[1/pi~ | ...]
/// (E[1/alpha] + 1/theta) M(A) M(AA^T)) Tr(W) + theta^2 / eta.
/// Throws BoundUndefinedError when eta <= 0.
MseBoundReport MseBound(const PlantModel& model, const LimiterParams& params,
                        const StabilityReport& stability, const StabilityInputs& in);

/// eta alone; may be non-positive.
double Eta(const PlantModel& model, const LimiterParams& params,
           const StabilityReport& stability, const StabilityInputs& in);

/// (c/2)(eps Tr Sigma + Tr(G + Sigma^-1)^-1) + M^2 Tr(F^H F) tau (theta - E) - Tr(Sigma)/2.
double DriftBound(const DriftContext& ctx, const MatrixXcd& F, double eps);

/// Human-readable report with one "key: value" per line.
std::string FormatStabilityReport(const StabilityReport& report, const StabilityInputs& in,
                                  const MseBoundReport* mse, const std::string& mse_note);

/// Header and row for sweep tables.
std::string StabilityCsvHeader();
std::string StabilityCsvRow(const StabilityReport& report, const StabilityInputs& in,
                            const MseBoundReport* mse);

}  // namespace ncs

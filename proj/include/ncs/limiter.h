#pragma once

#include "ncs/numerics.h"
#include "ncs/plant.h"

namespace ncs {

/// Norm multiplying sqrt(Tr(Sigma) - Tr(W)) in the dynamic range.
///  kClosedLoopGain: ||B Psi A||.
///  kControlGain:    ||B Psi||, the value behind the decoupled worked example.
enum class RangeCoefficient { kClosedLoopGain, kControlGain };

struct LimiterParams {
  double M = 1.0;
  double eps = 0.05;
  double theta_const = 1.0;
  RangeCoefficient coefficient = RangeCoefficient::kClosedLoopGain;

  /// Throws DomainError unless M > 0, 0 < eps < 1 and theta_const > 0.
  void Validate() const;
};

struct LimiterOutput {
  VectorXd q;
  double g = 0.0;
  bool saturated = false;

  /// Indicator of the linear region, 1 unless saturated.
  int gamma() const { return saturated ? 0 : 1; }
};

/// Theta = ||Fc^T Q|| + sqrt(||Fc^T Q||^2 + ||Q||) with Fc = A - B Psi A and
/// Fc^T Q Fc - Q = -I.
double ComputeTheta(const PlantModel& model);

/// Builds parameters with Theta computed from the model.
LimiterParams MakeLimiterParams(const PlantModel& model, double M, double eps,
                                RangeCoefficient coefficient =
                                    RangeCoefficient::kClosedLoopGain);

/// L = (1 + ||Fc|| Theta) (c sqrt([Tr Sigma - Tr W]^+) + sqrt(Tr W)) / sqrt(eps).
double DynamicRange(const PlantModel& model, const LimiterParams& params,
                    const MatrixXd& Sigma);

/// Linear scaling by M / L inside the range, radial clipping to norm M outside.
LimiterOutput Clip(const VectorXd& x, double L, double M);

}  // namespace ncs

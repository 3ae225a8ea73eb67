#include "ncs/limiter.h"

#include <algorithm>
#include <cmath>

namespace ncs {

void LimiterParams::Validate() const {
  if (!(M > 0.0) || !std::isfinite(M)) throw DomainError("LimiterParams: M must be > 0");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("LimiterParams: eps must lie in (0, 1)");
  if (!(theta_const > 0.0) || !std::isfinite(theta_const)) {
    throw DomainError("LimiterParams: Theta must be > 0");
  }
}

double ComputeTheta(const PlantModel& model) {
  const MatrixXd& Fc = model.closed_loop();
  const MatrixXd Q = SolveStein(Fc, MatrixXd::Identity(Fc.rows(), Fc.cols()));
  const double a = SpectralNorm(MatrixXd(Fc.transpose() * Q));
  return a + std::sqrt(a * a + SpectralNorm(Q));
}

LimiterParams MakeLimiterParams(const PlantModel& model, double M, double eps,
                                RangeCoefficient coefficient) {
  LimiterParams params;
  params.M = M;
  params.eps = eps;
  params.theta_const = ComputeTheta(model);
  params.coefficient = coefficient;
  params.Validate();
  return params;
}

double DynamicRange(const PlantModel& model, const LimiterParams& params,
                    const MatrixXd& Sigma) {
  const MatrixXd BPsi = model.B() * model.Psi();
  const double coef = params.coefficient == RangeCoefficient::kClosedLoopGain
                          ? SpectralNorm(MatrixXd(BPsi * model.A()))
                          : SpectralNorm(BPsi);
  const double tr_w = model.W().trace();
  const double excess = std::max(0.0, Sigma.trace() - tr_w);
  const double gain = 1.0 + SpectralNorm(model.closed_loop()) * params.theta_const;
  return gain * (coef * std::sqrt(excess) + std::sqrt(tr_w)) / std::sqrt(params.eps);
}

LimiterOutput Clip(const VectorXd& x, double L, double M) {
  if (!(L > 0.0) || !(M > 0.0)) throw DomainError("Clip: L and M must be > 0");
  LimiterOutput out;
  const double norm = x.norm();
  out.saturated = norm > L;
  out.g = out.saturated ? M / norm : M / L;
  out.q = out.g * x;
  return out;
}

}  // namespace ncs

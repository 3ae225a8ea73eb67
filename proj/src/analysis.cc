#include "ncs/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ncs {

namespace {

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double ControlGainNorm(const PlantModel& model) {
  return SpectralNorm(MatrixXd(model.B() * model.Psi()));
}

}  // namespace

double DeltaConstant(const PlantModel& model, const LimiterParams& params) {
  const double gain = 1.0 + SpectralNorm(model.closed_loop()) * params.theta_const;
  return std::sqrt(2.0 / params.eps) * gain * ControlGainNorm(model) * SpectralNorm(model.A());
}

double StabilityRhs(const PlantModel& model, const LimiterParams& params,
                    const PiTildeStats& stats, double tau, double xi) {
  const double k = model.state_dim();
  const double m_a = InstabilityMeasure(model.A());
  const double m_aat = InstabilityMeasureSymmetric(model.A() * model.A().transpose());
  const double delta = DeltaConstant(model, params);
  const double numerator = 1.0 - (params.eps + k * stats.Cdf(xi)) * m_aat;
  const double denominator = delta * delta * k * tau * stats.ConditionalInverseMean(xi) * m_a * m_aat;
  return numerator / denominator;
}

StabilityReport CheckStability(const PlantModel& model, const LimiterParams& params,
                               const PiTildeStats& stats, const StabilityInputs& in) {
  if (stats.empty()) throw DomainError("CheckStability: empty pi~ statistics");
  if (in.grid_points < 1) throw DomainError("CheckStability: grid_points must be >= 1");
  if (!(in.theta > 0.0) || !(in.tau > 0.0)) throw DomainError("CheckStability: theta, tau > 0");

  StabilityReport r;
  r.delta = DeltaConstant(model, params);
  r.m_a = InstabilityMeasure(model.A());
  r.m_aat = InstabilityMeasureSymmetric(model.A() * model.A().transpose());
  r.lhs = in.inverse_alpha + 1.0 / in.theta;
  r.rhs_max = -std::numeric_limits<double>::infinity();

  const int n = in.grid_points;
  double prev_xi = stats.Quantile(0.0);
  for (int j = 0; j < n; ++j) {
    const double p = n == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(n);
    const double xi = stats.Quantile(p);
    const double rhs = StabilityRhs(model, params, stats, in.tau, xi);
    if (rhs > r.rhs_max) {
      r.rhs_max = rhs;
      r.xi_star = xi;
      const double next = stats.Quantile(std::min(1.0, p + 1.0 / n));
      r.xi_resolution = std::max(xi - prev_xi, next - xi);
    }
    prev_xi = xi;
  }
  const double k = model.state_dim();
  r.pr_below = stats.Cdf(r.xi_star);
  r.cond_inverse_mean = stats.ConditionalInverseMean(r.xi_star);
  r.margin = r.rhs_max - r.lhs;
  r.satisfied = r.lhs < r.rhs_max;

  r.eps_cap = 1.0 / r.m_aat - k * r.pr_below;
  r.eps_ok = params.eps < r.eps_cap;
  r.theta_floor = r.rhs_max > 0.0 ? 1.0 / r.rhs_max : std::numeric_limits<double>::infinity();
  r.theta_ok = in.theta > r.theta_floor;
  const double room = r.rhs_max - 1.0 / in.theta;
  r.arrival_floor = room > 0.0 ? 1.0 / room : std::numeric_limits<double>::infinity();
  return r;
}

double Eta(const PlantModel& model, const LimiterParams& params,
           const StabilityReport& s, const StabilityInputs& in) {
  const double k = model.state_dim();
  const double lhs = in.inverse_alpha + 1.0 / in.theta;
  return 1.0 - (params.eps + k * s.pr_below) * s.m_aat -
         lhs * k * in.eta_extra_factor * s.delta * s.delta * in.tau * s.cond_inverse_mean *
             s.m_a * s.m_aat;
}

MseBoundReport MseBound(const PlantModel& model, const LimiterParams& params,
                        const StabilityReport& s, const StabilityInputs& in) {
  MseBoundReport out;
  out.eta = Eta(model, params, s, in);
  if (!(out.eta > 0.0)) {
    throw BoundUndefinedError("MseBound: eta = " + Num(out.eta) + " is not positive");
  }
  const double k = model.state_dim();
  const double bpsi = ControlGainNorm(model);
  const double lhs = in.inverse_alpha + 1.0 / in.theta;
  const double factor = 1.0 + k * in.tau * (s.delta * s.delta / (bpsi * bpsi)) *
                                  s.cond_inverse_mean * lhs * s.m_a * s.m_aat;
  out.bound = factor * model.W().trace() / out.eta + in.theta * in.theta / out.eta;
  return out;
}

double DriftBound(const DriftContext& ctx, const MatrixXcd& F, double eps) {
  const double tr = ctx.Sigma.trace();
  return Problem1Objective(ctx, F) + 0.5 * ctx.norm_aat * eps * tr - 0.5 * tr;
}

std::string FormatStabilityReport(const StabilityReport& r, const StabilityInputs& in,
                                  const MseBoundReport* mse, const std::string& mse_note) {
  std::ostringstream os;
  os << "satisfied: " << (r.satisfied ? "true" : "false") << "\n";
  os << "lhs: " << Num(r.lhs) << "\n";
  os << "inverse_alpha: " << Num(in.inverse_alpha) << "\n";
  os << "theta: " << Num(in.theta) << "\n";
  os << "rhs_max: " << Num(r.rhs_max) << "\n";
  os << "margin: " << Num(r.margin) << "\n";
  os << "xi_star: " << Num(r.xi_star) << "\n";
  os << "xi_resolution: " << Num(r.xi_resolution) << "\n";
  os << "pr_below_xi_star: " << Num(r.pr_below) << "\n";
  os << "cond_inverse_mean: " << Num(r.cond_inverse_mean) << "\n";
  os << "delta: " << Num(r.delta) << "\n";
  os << "m_a: " << Num(r.m_a) << "\n";
  os << "m_aat: " << Num(r.m_aat) << "\n";
  os << "eps_cap: " << Num(r.eps_cap) << " (" << (r.eps_ok ? "ok" : "violated") << ")\n";
  os << "theta_floor: " << Num(r.theta_floor) << " (" << (r.theta_ok ? "ok" : "violated")
     << ")\n";
  os << "arrival_floor: " << Num(r.arrival_floor) << "\n";
  if (mse != nullptr) {
    os << "eta: " << Num(mse->eta) << "\n";
    os << "mse_bound: " << Num(mse->bound) << "\n";
  } else {
    os << "mse_bound: undefined (" << mse_note << ")\n";
  }
  return os.str();
}

std::string StabilityCsvHeader() {
  return "satisfied,lhs,rhs_max,margin,xi_star,delta,m_a,m_aat,eps_cap,theta_floor,"
         "arrival_floor,eta,mse_bound";
}

std::string StabilityCsvRow(const StabilityReport& r, const StabilityInputs&,
                            const MseBoundReport* mse) {
  std::ostringstream os;
  os << (r.satisfied ? 1 : 0) << "," << Num(r.lhs) << "," << Num(r.rhs_max) << ","
     << Num(r.margin) << "," << Num(r.xi_star) << "," << Num(r.delta) << "," << Num(r.m_a)
     << "," << Num(r.m_aat) << "," << Num(r.eps_cap) << "," << Num(r.theta_floor) << ","
     << Num(r.arrival_floor) << ",";
  if (mse != nullptr) {
    os << Num(mse->eta) << "," << Num(mse->bound);
  } else {
    os << "nan,nan";
  }
  return os.str();
}

}  // namespace ncs

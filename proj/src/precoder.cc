#include "ncs/precoder.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "ncs/energy.h"

namespace ncs {

namespace {

constexpr double kPiFloor = 1e-12;
constexpr double kDormantTol = 1e-12;

bool Usable(const DriftContext& ctx, int i) {
  return ctx.sigma_eig.lambda(i) > 0.0 && ctx.channel.pi_k(i) > kPiFloor;
}

// Allocation for a given multiplier; gap + beta must be positive.
VectorXd AllocationAt(const DriftContext& ctx, double beta) {
  const int k = ctx.k();
  VectorXd y = VectorXd::Zero(k);
  const double scale = std::sqrt(ctx.norm_aat / ((ctx.gap() + beta) * ctx.tau)) / ctx.L;
  for (int i = 0; i < k; ++i) {
    if (!Usable(ctx, i)) continue;
    const double level = ctx.channel.pi_k(i) * scale;
    y(i) = 0.5 * std::max(0.0, level - 1.0 / ctx.sigma_eig.lambda(i));
  }
  return y;
}

// gap + beta at which stream i switches off: c (lambda_i pi_i)^2 / (tau L^2).
double SwitchOff(const DriftContext& ctx, int i) {
  const double lp = ctx.sigma_eig.lambda(i) * ctx.channel.pi_k(i);
  return ctx.norm_aat * lp * lp / (ctx.tau * ctx.L * ctx.L);
}

MatrixXcd AssembleF(const DriftContext& ctx, const VectorXd& y) {
  const int k = ctx.k();
  VectorXd amp = VectorXd::Zero(k);
  for (int i = 0; i < k; ++i) {
    if (y(i) > 0.0) amp(i) = std::sqrt(y(i)) / ctx.channel.pi_k(i);
  }
  const MatrixXcd inner = (amp.asDiagonal() * ctx.sigma_eig.S.transpose()).cast<std::complex<double>>();
  return (ctx.L / ctx.M) * ctx.channel.leading_beams() * inner;
}

PrecoderDecision Finish(const DriftContext& ctx, MatrixXcd F, Mode mode, double beta,
                        VectorXd allocations) {
  PrecoderDecision d;
  d.energy_used = PrecoderEnergy(F, ctx.M, ctx.tau);
  d.F = std::move(F);
  d.mode = mode;
  d.beta = beta;
  d.allocations = std::move(allocations);
  return d;
}

PrecoderDecision Dormant(const DriftContext& ctx) {
  return Finish(ctx, MatrixXcd::Zero(ctx.channel.H.cols(), ctx.k()), Mode::kDormant, 0.0,
                VectorXd::Zero(ctx.k()));
}

// Indices of usable channels sorted by descending gain.
std::vector<int> SortedUsable(const VectorXd& pi) {
  std::vector<int> idx;
  for (int i = 0; i < pi.size(); ++i) {
    if (pi(i) > kPiFloor) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return pi(a) > pi(b); });
  return idx;
}

}  // namespace

double DriftContext::gap() const { return std::max(0.0, theta - E); }

DriftContext MakeDriftContext(ChannelDraw channel, MatrixXd Sigma, double E, double theta,
                              double tau, double M, double L, double norm_aat) {
  if (!(E >= 0.0) || !std::isfinite(E)) throw DomainError("DriftContext: E must be >= 0");
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("DriftContext: L must be > 0");
  if (!(theta > 0.0) || !(tau > 0.0) || !(M > 0.0)) {
    throw DomainError("DriftContext: theta, tau and M must be > 0");
  }
  if (!(norm_aat >= 0.0)) throw DomainError("DriftContext: norm_aat must be >= 0");
  if (Sigma.rows() != channel.k() || Sigma.cols() != channel.k()) {
    throw DomainError("DriftContext: Sigma must be K x K");
  }
  DriftContext ctx;
  ctx.sigma_eig = EigSym(Sigma);
  ctx.channel = std::move(channel);
  ctx.Sigma = std::move(Sigma);
  ctx.E = E;
  ctx.theta = theta;
  ctx.tau = tau;
  ctx.M = M;
  ctx.L = L;
  ctx.norm_aat = norm_aat;
  return ctx;
}

DriftContext MakeDecoupledContext(const VectorXcd& h, const VectorXd& sigma, double E,
                                  double theta, double tau, double M, double L,
                                  double norm_aat) {
  const Eigen::Index k = h.size();
  if (k == 0 || sigma.size() != k) throw DomainError("MakeDecoupledContext: size mismatch");
  if (!(sigma.array() >= 0.0).all()) throw DomainError("MakeDecoupledContext: sigma must be >= 0");
  ChannelDraw draw;
  draw.H = h.asDiagonal();
  draw.pi_k = h.cwiseAbs();
  draw.svd.Pi = draw.pi_k.asDiagonal();
  draw.svd.V = MatrixXcd::Identity(k, k);
  draw.svd.U = MatrixXcd::Identity(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (draw.pi_k(i) > 0.0) draw.svd.U(i, i) = std::conj(h(i)) / draw.pi_k(i);
  }
  DriftContext ctx = MakeDriftContext(draw, sigma.asDiagonal(), E, theta, tau, M, L, norm_aat);
  ctx.channel = std::move(draw);
  ctx.sigma_eig.S = MatrixXd::Identity(k, k);
  ctx.sigma_eig.lambda = sigma;
  return ctx;
}

double AllocationEnergy(const DriftContext& ctx, const VectorXd& y) {
  double sum = 0.0;
  for (int i = 0; i < ctx.k(); ++i) {
    if (y(i) > 0.0) sum += y(i) / (ctx.channel.pi_k(i) * ctx.channel.pi_k(i));
  }
  return ctx.L * ctx.L * ctx.tau * sum;
}

PrecoderDecision SolveDriftMinimizing(const DriftContext& ctx) {
  const int k = ctx.k();
  const double gap = ctx.gap();
  bool dormant = true;
  double max_switch_off = 0.0;
  for (int i = 0; i < k; ++i) {
    const double s = SwitchOff(ctx, i);
    if (!(gap - s > kDormantTol)) dormant = false;
    if (Usable(ctx, i)) max_switch_off = std::max(max_switch_off, s);
  }
  if (dormant) return Dormant(ctx);

  auto energy = [&](double beta) { return AllocationEnergy(ctx, AllocationAt(ctx, beta)); };

  double beta = 0.0;
  if (ctx.E <= 0.0) {
    // No energy: the smallest multiplier that switches every stream off.
    beta = std::max(0.0, max_switch_off - gap);
  } else if (gap > 0.0 && energy(0.0) <= ctx.E) {
    beta = 0.0;
  } else {
    double lo = 0.0;
    double hi = std::max(1.0, gap);
    int grow = 0;
    while (energy(hi) > ctx.E) {
      lo = hi;
      hi *= 2.0;
      if (++grow > 2000) throw ConvergenceError("SolveDriftMinimizing: beta bracket not found");
    }
    for (int it = 0; it < 400 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi;
         ++it) {
      const double mid = 0.5 * (lo + hi);
      if (energy(mid) > ctx.E) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    beta = hi;
  }
  VectorXd y = ctx.E <= 0.0 ? VectorXd::Zero(k) : AllocationAt(ctx, beta);
  MatrixXcd F = AssembleF(ctx, y);
  return Finish(ctx, std::move(F), Mode::kActive, beta, std::move(y));
}

double ReducedObjective(const DriftContext& ctx, const VectorXd& y) {
  double value = ctx.gap() * AllocationEnergy(ctx, y);
  for (int i = 0; i < ctx.k(); ++i) {
    const double lambda = ctx.sigma_eig.lambda(i);
    value += 0.5 * ctx.norm_aat * lambda / (1.0 + 2.0 * lambda * std::max(0.0, y(i)));
  }
  return value;
}

double Problem1Objective(const DriftContext& ctx, const MatrixXcd& F) {
  const MatrixXcd HF = ctx.channel.H * F;
  const MatrixXd G =
      (2.0 * ctx.M * ctx.M / (ctx.L * ctx.L)) * Symmetrize((HF.adjoint() * HF).real());
  const int k = ctx.k();
  const MatrixXd lhs = MatrixXd::Identity(k, k) + ctx.Sigma * G;
  const double trace = lhs.partialPivLu().solve(ctx.Sigma).trace();
  return PrecoderEnergy(F, ctx.M, ctx.tau) * (ctx.theta - ctx.E) + 0.5 * ctx.norm_aat * trace;
}

double KktResidual(const DriftContext& ctx, const PrecoderDecision& decision) {
  const VectorXd& y = decision.allocations;
  const double energy = AllocationEnergy(ctx, y);
  const double e_scale = std::max(1.0, ctx.E);
  double r = std::max(0.0, energy - ctx.E) / e_scale;
  r = std::max(r, std::max(0.0, -decision.beta));
  r = std::max(r, std::abs(decision.beta * (energy - ctx.E)) / e_scale);
  const double mu = ctx.gap() + decision.beta;
  for (int i = 0; i < ctx.k(); ++i) {
    r = std::max(r, std::max(0.0, -y(i)));
    if (!Usable(ctx, i)) {
      r = std::max(r, std::abs(y(i)));
      continue;
    }
    const double pi = ctx.channel.pi_k(i);
    const double lambda = ctx.sigma_eig.lambda(i);
    const double cost = ctx.L * ctx.L * ctx.tau * mu / (pi * pi);
    const double d = 1.0 + 2.0 * lambda * y(i);
    const double benefit = ctx.norm_aat * lambda * lambda / (d * d);
    const double scale = std::max(cost, benefit);
    if (scale == 0.0) continue;
    if (y(i) > 0.0) {
      r = std::max(r, std::abs(cost - benefit) / scale);
    } else {
      r = std::max(r, std::max(0.0, benefit - cost) / scale);
    }
  }
  return r;
}

VectorXd CapacityWaterFill(const VectorXd& pi, double budget) {
  VectorXd p = VectorXd::Zero(pi.size());
  if (!(budget > 0.0)) return p;
  const std::vector<int> idx = SortedUsable(pi);
  for (int m = static_cast<int>(idx.size()); m >= 1; --m) {
    double floors = 0.0;
    for (int j = 0; j < m; ++j) floors += 1.0 / pi(idx[j]);
    const double w = (budget + floors) / m;
    if (w > 1.0 / pi(idx[m - 1])) {
      for (int j = 0; j < m; ++j) p(idx[j]) = w - 1.0 / pi(idx[j]);
      return p;
    }
  }
  return p;
}

VectorXd MmseWaterFill(const VectorXd& pi, double budget) {
  VectorXd p = VectorXd::Zero(pi.size());
  if (!(budget > 0.0)) return p;
  const std::vector<int> idx = SortedUsable(pi);
  for (int m = static_cast<int>(idx.size()); m >= 1; --m) {
    double floors = 0.0;
    double weights = 0.0;
    for (int j = 0; j < m; ++j) {
      floors += 1.0 / pi(idx[j]);
      weights += 1.0 / std::sqrt(pi(idx[j]));
    }
    const double w = (budget + floors) / weights;
    if (w > 1.0 / std::sqrt(pi(idx[m - 1]))) {
      for (int j = 0; j < m; ++j) {
        p(idx[j]) = std::max(0.0, w / std::sqrt(pi(idx[j])) - 1.0 / pi(idx[j]));
      }
      return p;
    }
  }
  return p;
}

PrecoderDecision WaterFillDecision(const DriftContext& ctx, double budget,
                                   PowerProfile profile) {
  const VectorXd p = profile == PowerProfile::kCapacity ? CapacityWaterFill(ctx.channel.pi_k, budget)
                                                        : MmseWaterFill(ctx.channel.pi_k, budget);
  if (p.maxCoeff() <= 0.0) return Dormant(ctx);
  const MatrixXcd F = ctx.channel.leading_beams() *
                      p.cwiseSqrt().asDiagonal().toDenseMatrix().cast<std::complex<double>>();
  return Finish(ctx, F, Mode::kActive, 0.0, p);
}

PrecoderDecision BaselineCapacityWf(const DriftContext& ctx) {
  return WaterFillDecision(ctx, ctx.E / (ctx.M * ctx.M * ctx.tau), PowerProfile::kCapacity);
}

PrecoderDecision BaselinePeriodicWf(const DriftContext& ctx, long slot, int period_slots) {
  if (period_slots < 1) throw DomainError("BaselinePeriodicWf: period must be >= 1");
  if (slot % period_slots != 0) return Dormant(ctx);
  return BaselineCapacityWf(ctx);
}

PrecoderDecision BaselineMmseWf(const DriftContext& ctx) {
  return WaterFillDecision(ctx, ctx.E / (ctx.M * ctx.M * ctx.tau), PowerProfile::kMmse);
}

PrecoderDecision BaselineConstantPower(const DriftContext& ctx, double mean_alpha,
                                       PowerProfile profile) {
  const double per_power = 1.0 / (ctx.M * ctx.M * ctx.tau);
  return WaterFillDecision(ctx, std::min(mean_alpha, ctx.E) * per_power, profile);
}

PolicyKind ParsePolicyKind(const std::string& name) {
  if (name == "proposed") return PolicyKind::kProposed;
  if (name == "baseline1") return PolicyKind::kBaseline1;
  if (name == "baseline2") return PolicyKind::kBaseline2;
  if (name == "baseline3") return PolicyKind::kBaseline3;
  if (name == "baseline4") return PolicyKind::kBaseline4;
  if (name == "baseline5") return PolicyKind::kBaseline5;
  throw DomainError("unknown policy '" + name + "'");
}

std::string PolicyName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kProposed: return "proposed";
    case PolicyKind::kBaseline1: return "baseline1";
    case PolicyKind::kBaseline2: return "baseline2";
    case PolicyKind::kBaseline3: return "baseline3";
    case PolicyKind::kBaseline4: return "baseline4";
    case PolicyKind::kBaseline5: return "baseline5";
  }
  return "unknown";
}

Policy MakePolicy(const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicyKind::kProposed:
      return [](const DriftContext& ctx, long) { return SolveDriftMinimizing(ctx); };
    case PolicyKind::kBaseline1:
      return [](const DriftContext& ctx, long) { return BaselineCapacityWf(ctx); };
    case PolicyKind::kBaseline2: {
      const int period = spec.period_slots;
      return [period](const DriftContext& ctx, long slot) {
        return BaselinePeriodicWf(ctx, slot, period);
      };
    }
    case PolicyKind::kBaseline3:
      return [](const DriftContext& ctx, long) { return BaselineMmseWf(ctx); };
    case PolicyKind::kBaseline4: {
      const double mean = spec.mean_alpha;
      return [mean](const DriftContext& ctx, long) {
        return BaselineConstantPower(ctx, mean, PowerProfile::kCapacity);
      };
    }
    case PolicyKind::kBaseline5: {
      const double mean = spec.mean_alpha;
      return [mean](const DriftContext& ctx, long) {
        return BaselineConstantPower(ctx, mean, PowerProfile::kMmse);
      };
    }
  }
  throw DomainError("MakePolicy: unknown policy");
}

}  // namespace ncs

#pragma once

#include <functional>
#include <string>

#include "ncs/channel.h"
#include "ncs/numerics.h"

namespace ncs {

/// Everything the per-slot precoding decision depends on.
struct DriftContext {
  ChannelDraw channel;
  MatrixXd Sigma;
  EigSymResult sigma_eig;
  double E = 0.0;
  double theta = 0.0;
  double tau = 0.0;
  double M = 1.0;
  double L = 1.0;
  /// Spectral norm of A A^T.
  double norm_aat = 0.0;

  int k() const { return channel.k(); }
  /// [theta - E]^+.
  double gap() const;
};

/// Validates and assembles a context; Sigma is decomposed here.
DriftContext MakeDriftContext(ChannelDraw channel, MatrixXd Sigma, double E, double theta,
                              double tau, double M, double L, double norm_aat);

/// Context for a plant of independent scalar subsystems behind parallel
/// scalar channels, H = diag(h) and Sigma = diag(sigma). Stream i is channel i
/// paired with subsystem i, in the given order.
DriftContext MakeDecoupledContext(const VectorXcd& h, const VectorXd& sigma, double E,
                                  double theta, double tau, double M, double L,
                                  double norm_aat);

enum class Mode { kDormant, kActive };

struct PrecoderDecision {
  MatrixXcd F;
  Mode mode = Mode::kDormant;
  double beta = 0.0;
  /// Per-stream allocation: Y* for the drift-minimizing policy, the water-
  /// filled powers for the baselines.
  VectorXd allocations;
  /// M^2 Tr(F^H F) tau.
  double energy_used = 0.0;
};

/// Event-driven water-filling precoder that minimizes the drift bound.
/// Dormant (F = 0) when every stream fails the activation threshold;
/// otherwise Y*_ii = [level_i - 1/lambda_i]^+ / 2 with the multiplier beta
/// raised from 0 only as far as needed to meet the energy budget.
PrecoderDecision SolveDriftMinimizing(const DriftContext& ctx);

/// Energy L^2 tau sum_i y_i / pi_i^2 of a diagonal allocation.
double AllocationEnergy(const DriftContext& ctx, const VectorXd& y);

/// sum_i [L^2 tau gap y_i / pi_i^2 + (c/2) lambda_i / (1 + 2 lambda_i y_i)].
double ReducedObjective(const DriftContext& ctx, const VectorXd& y);

/// M^2 Tr(F^H F) tau (theta - E) + (c/2) Tr((2M^2/L^2) Re{F^H H^H H F} + Sigma^-1)^-1,
/// the trace evaluated as Tr((I + Sigma G)^-1 Sigma).
double Problem1Objective(const DriftContext& ctx, const MatrixXcd& F);

/// Largest normalized violation among primal feasibility, beta >= 0,
/// complementary slackness and per-stream stationarity (with the sign
/// condition on inactive streams).
double KktResidual(const DriftContext& ctx, const PrecoderDecision& decision);

/// Capacity water-filling p_i = [w - 1/pi_i]^+ with sum p = budget.
VectorXd CapacityWaterFill(const VectorXd& pi, double budget);
/// MMSE water-filling p_i = [w / sqrt(pi_i) - 1/pi_i]^+ with sum p = budget.
VectorXd MmseWaterFill(const VectorXd& pi, double budget);

enum class PowerProfile { kCapacity, kMmse };

/// F = U_K diag(sqrt(p)) with p water-filled to the given power budget.
PrecoderDecision WaterFillDecision(const DriftContext& ctx, double budget,
                                   PowerProfile profile);

/// Baseline 1: whole stored energy, capacity water-filling.
PrecoderDecision BaselineCapacityWf(const DriftContext& ctx);
/// Baseline 2: Baseline 1 on slots that are multiples of period_slots, F = 0 otherwise.
PrecoderDecision BaselinePeriodicWf(const DriftContext& ctx, long slot, int period_slots);
/// Baseline 3: whole stored energy, MMSE water-filling.
PrecoderDecision BaselineMmseWf(const DriftContext& ctx);
/// Baselines 4 and 5: nominal energy mean_alpha per slot, capped by the stored energy.
PrecoderDecision BaselineConstantPower(const DriftContext& ctx, double mean_alpha,
                                       PowerProfile profile);

using Policy = std::function<PrecoderDecision(const DriftContext&, long slot)>;

enum class PolicyKind {
  kProposed,
  kBaseline1,
  kBaseline2,
  kBaseline3,
  kBaseline4,
  kBaseline5,
};

struct PolicySpec {
  PolicyKind kind = PolicyKind::kProposed;
  int period_slots = 3;
  double mean_alpha = 0.0;
};

/// "proposed", "baseline1" ... "baseline5". Throws DomainError otherwise.
PolicyKind ParsePolicyKind(const std::string& name);
std::string PolicyName(PolicyKind kind);
Policy MakePolicy(const PolicySpec& spec);

}  // namespace ncs

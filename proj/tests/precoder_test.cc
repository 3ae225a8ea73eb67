#include "ncs/precoder.h"

#include <gtest/gtest.h>

#include "ncs/analysis.h"
#include "ncs/energy.h"
#include "ncs/limiter.h"
#include "p2_oracle.h"
#include "test_util.h"

namespace ncs {
namespace {

using Complex = std::complex<double>;

DriftContext WithEnergy(DriftContext ctx, double E) {
  ctx.E = E;
  return ctx;
}

MatrixXcd AllocationPrecoder(const DriftContext& ctx, const VectorXd& y) {
  VectorXd amp = VectorXd::Zero(ctx.k());
  for (int i = 0; i < ctx.k(); ++i) amp(i) = std::sqrt(std::max(0.0, y(i))) / ctx.channel.pi_k(i);
  return (ctx.L / ctx.M) * ctx.channel.leading_beams() *
         (amp.asDiagonal() * ctx.sigma_eig.S.transpose()).cast<Complex>();
}

GTEST_TEST(SolveDriftMinimizingTest, DormantWhenThresholdsPositive) {
  const DriftContext ctx = MakeDecoupledContext(VectorXcd::Constant(2, 0.1), test::Diag({0.2, 0.1}).diagonal(),
                                                2.0, 36.0, 1.0, 1.0, 10.0, 2.56);
  const PrecoderDecision d = SolveDriftMinimizing(ctx);
  EXPECT_EQ(d.mode, Mode::kDormant);
  EXPECT_EQ(d.F, MatrixXcd::Zero(2, 2));
  EXPECT_EQ(d.energy_used, 0.0);
  EXPECT_EQ(KktResidual(ctx, d), 0.0);
}

GTEST_TEST(SolveDriftMinimizingTest, ScalarUnconstrained) {
  // c = lambda = pi = tau = L = 1: switch-off at gap 1.
  DriftContext ctx = MakeDecoupledContext(VectorXcd::Ones(1), VectorXd::Ones(1), 5.0, 10.0, 1.0,
                                          1.0, 1.0, 1.0);
  EXPECT_EQ(SolveDriftMinimizing(ctx).mode, Mode::kDormant);
  ctx = WithEnergy(ctx, 9.5);
  const PrecoderDecision d = SolveDriftMinimizing(ctx);
  EXPECT_EQ(d.mode, Mode::kActive);
  EXPECT_EQ(d.beta, 0.0);
  EXPECT_NEAR(d.allocations(0), 0.5 * (std::sqrt(2.0) - 1.0), 1e-15);
  EXPECT_NEAR(d.energy_used, d.allocations(0), 1e-15);
  EXPECT_LT(KktResidual(ctx, d), 1e-12);
}

GTEST_TEST(SolveDriftMinimizingTest, ScalarBinding) {
  // gap 0 forces beta > 0; y = E / (L^2 tau / pi^2) = 0.1.
  const DriftContext ctx = MakeDecoupledContext(VectorXcd::Ones(1), VectorXd::Ones(1), 0.1, 0.1,
                                                1.0, 1.0, 1.0, 1.0);
  const PrecoderDecision d = SolveDriftMinimizing(ctx);
  EXPECT_GT(d.beta, 0.0);
  EXPECT_NEAR(d.allocations(0), 0.1, 1e-12);
  // 0.1 = 0.5 (1/sqrt(beta) - 1).
  EXPECT_NEAR(d.beta, 1.0 / 1.44, 1e-9);
  EXPECT_LT(std::abs(d.beta * (d.energy_used - ctx.E)), 1e-9);
}

GTEST_TEST(SolveDriftMinimizingTest, NoEnergyGivesZeroPrecoder) {
  Rng rng(71);
  for (int i = 0; i < 100; ++i) {
    const DriftContext ctx = WithEnergy(test::RandomDriftContext(rng, 1 + i % 4), 0.0);
    const PrecoderDecision d = SolveDriftMinimizing(ctx);
    EXPECT_EQ(d.energy_used, 0.0);
    EXPECT_EQ(test::MaxAbs(d.F), 0.0);
  }
}

GTEST_TEST(SolveDriftMinimizingTest, ZeroEigenvalueStreamGetsNothing) {
  Rng rng(72);
  DriftContext ctx = MakeDriftContext(SampleChannel(rng, 2, 3, 2), test::Diag({3.0, 0.0}), 5.0,
                                      50.0, 0.1, 1.0, 2.0, 2.0);
  const PrecoderDecision d = SolveDriftMinimizing(ctx);
  EXPECT_EQ(d.allocations(1), 0.0);
}

GTEST_TEST(SolveDriftMinimizingTest, MatchesDiagonalFormula) {
  Rng rng(73);
  for (int i = 0; i < 200; ++i) {
    const DriftContext ctx = test::RandomDriftContext(rng, 1 + i % 4);
    const PrecoderDecision d = SolveDriftMinimizing(ctx);
    if (d.mode == Mode::kDormant) continue;
    for (int j = 0; j < ctx.k(); ++j) {
      const double level = (ctx.channel.pi_k(j) / ctx.L) *
                           std::sqrt(ctx.norm_aat / ((ctx.gap() + d.beta) * ctx.tau));
      const double expected = 0.5 * std::max(0.0, level - 1.0 / ctx.sigma_eig.lambda(j));
      EXPECT_NEAR(d.allocations(j), expected, 1e-12 * std::max(1.0, expected));
    }
    EXPECT_LT(test::MaxAbs(MatrixXcd(d.F - AllocationPrecoder(ctx, d.allocations))), 1e-10);
    EXPECT_LE(d.energy_used, ctx.E + 1e-9);
    if (d.beta > 0.0) EXPECT_NEAR(d.energy_used, ctx.E, 1e-9 * std::max(1.0, ctx.E));
  }
}

GTEST_TEST(SolveDriftMinimizingTest, ObjectiveIdentity) {
  Rng rng(74);
  for (int i = 0; i < 200; ++i) {
    const DriftContext ctx = test::RandomDriftContext(rng, 1 + i % 4);
    VectorXd y(ctx.k());
    for (int j = 0; j < ctx.k(); ++j) y(j) = test::Uniform(rng, 0.0, 2.0);
    const double reduced = ReducedObjective(ctx, y);
    EXPECT_NEAR(Problem1Objective(ctx, AllocationPrecoder(ctx, y)), reduced, 1e-10 * reduced);
  }
}

GTEST_TEST(SolveDriftMinimizingTest, MatchesProjectedGradientOracle) {
  Rng rng(75);
  for (int i = 0; i < 100; ++i) {
    const DriftContext ctx = test::RandomDriftContext(rng, 1 + i % 4);
    const PrecoderDecision d = SolveDriftMinimizing(ctx);
    const test::P2Solution oracle = test::SolveP2ProjectedGradient(ctx);
    const double value = Problem1Objective(ctx, d.F);
    EXPECT_NEAR(value, oracle.value, 1e-6 * std::abs(oracle.value)) << "instance " << i;
    EXPECT_LT(KktResidual(ctx, d), 1e-7) << "instance " << i;
  }
}

GTEST_TEST(SolveDriftMinimizingTest, AllocationsNonDecreasingInEnergy) {
  Rng rng(76);
  for (int i = 0; i < 50; ++i) {
    const DriftContext base = test::RandomDriftContext(rng, 1 + i % 4);
    VectorXd prev = VectorXd::Zero(base.k());
    for (int j = 0; j <= 40; ++j) {
      const PrecoderDecision d = SolveDriftMinimizing(WithEnergy(base, base.theta * j / 40.0));
      for (int s = 0; s < base.k(); ++s) {
        EXPECT_GE(d.allocations(s), prev(s) - 1e-12 * std::max(1.0, prev(s)));
      }
      prev = d.allocations;
    }
  }
}

GTEST_TEST(SolveDriftMinimizingTest, RotationCovariance) {
  Rng rng(77);
  for (int i = 0; i < 100; ++i) {
    const DriftContext ctx = test::RandomDriftContext(rng, 1 + i % 4);
    const MatrixXcd& H = ctx.channel.H;
    const MatrixXcd rotated = test::RandomUnitary(rng, static_cast<int>(H.rows())) * H *
                              test::RandomUnitary(rng, static_cast<int>(H.cols()));
    const DriftContext other =
        MakeDriftContext(ChannelDraw::FromMatrix(rotated, ctx.k()), ctx.Sigma, ctx.E, ctx.theta,
                         ctx.tau, ctx.M, ctx.L, ctx.norm_aat);
    const double a = Problem1Objective(ctx, SolveDriftMinimizing(ctx).F);
    const double b = Problem1Objective(other, SolveDriftMinimizing(other).F);
    EXPECT_NEAR(a, b, 1e-10 * std::abs(a));
  }
}

GTEST_TEST(SolveDriftMinimizingTest, MinimizesDriftOverFeasiblePrecoders) {
  Rng rng(78);
  for (int i = 0; i < 50; ++i) {
    const DriftContext ctx = test::RandomDriftContext(rng, 1 + i % 4);
    const PrecoderDecision d = SolveDriftMinimizing(ctx);
    const double best = DriftBound(ctx, d.F, 0.05);
    const int n_s = static_cast<int>(ctx.channel.H.cols());
    for (int j = 0; j < 100; ++j) {
      MatrixXcd F = j % 2 == 0 ? test::RandomComplex(rng, n_s, ctx.k())
                               : MatrixXcd(d.F + 0.1 * test::RandomComplex(rng, n_s, ctx.k()));
      const double energy = PrecoderEnergy(F, ctx.M, ctx.tau);
      const double target = ctx.E * test::Uniform(rng, 0.0, 1.0);
      if (energy > target) F *= std::sqrt(target / energy);
      ASSERT_LE(PrecoderEnergy(F, ctx.M, ctx.tau), ctx.E + 1e-9);
      EXPECT_LE(best, DriftBound(ctx, F, 0.05) + 1e-9 * std::abs(best));
    }
  }
}

GTEST_TEST(SolveDriftMinimizingTest, MinimizesDriftOverRealCombinationsOfBeams) {
  Rng rng(86);
  for (int i = 0; i < 50; ++i) {
    const DriftContext ctx = test::RandomDriftContext(rng, 1 + i % 4);
    const PrecoderDecision d = SolveDriftMinimizing(ctx);
    const double best = DriftBound(ctx, d.F, 0.05);
    for (int j = 0; j < 100; ++j) {
      // F = U_K R with R real keeps the Gram matrix real.
      const MatrixXd R = test::RandomMatrix(rng, ctx.k(), ctx.k());
      MatrixXcd F = ctx.channel.leading_beams() * R.cast<Complex>();
      const double energy = PrecoderEnergy(F, ctx.M, ctx.tau);
      const double target = ctx.E * test::Uniform(rng, 0.0, 1.0);
      if (energy > target) F *= std::sqrt(target / energy);
      EXPECT_LE(best, DriftBound(ctx, F, 0.05) + 1e-9 * std::abs(best));
    }
  }
}

GTEST_TEST(SolveDriftMinimizingTest, QuadratureMultiplexingCanLowerDrift) {
  // Two real components carried on the in-phase and quadrature parts of the
  // strong eigenmode both see gain |h1|^2, which no beam pairing achieves.
  const VectorXcd h = (VectorXcd(2) << 4.0, 0.05).finished();
  const VectorXd sigma = (VectorXd(2) << 70.0, 70.0).finished();
  const DriftContext ctx = MakeDecoupledContext(h, sigma, 20.0, 36.0, 1.0, 1.0, 10.0, 2.56);
  const PrecoderDecision d = SolveDriftMinimizing(ctx);
  MatrixXcd F = MatrixXcd::Zero(2, 2);
  F(0, 0) = std::sqrt(0.5 * d.energy_used);
  F(0, 1) = Complex(0.0, std::sqrt(0.5 * d.energy_used));
  EXPECT_NEAR(PrecoderEnergy(F, 1.0, 1.0), d.energy_used, 1e-12);
  EXPECT_LT(DriftBound(ctx, F, 0.1), DriftBound(ctx, d.F, 0.1) - 10.0);
}

GTEST_TEST(DriftBoundTest, ZeroPrecoder) {
  Rng rng(79);
  const DriftContext ctx = test::RandomDriftContext(rng, 2);
  const double tr = ctx.Sigma.trace();
  const double expected = 0.5 * ctx.norm_aat * (0.05 * tr + tr) - 0.5 * tr;
  EXPECT_NEAR(DriftBound(ctx, MatrixXcd::Zero(ctx.channel.H.cols(), 2), 0.05), expected,
              1e-12 * std::abs(expected));
}

GTEST_TEST(DriftBoundTest, DecreasesWithStrongerChannel) {
  const VectorXd sigma = (VectorXd(2) << 40.0, 20.0).finished();
  const DriftContext weak = MakeDecoupledContext((VectorXcd(2) << 2.0, 1.0).finished(), sigma, 10.0,
                                                 36.0, 1.0, 1.0, 20.0, 2.56);
  const DriftContext strong = MakeDecoupledContext((VectorXcd(2) << 3.0, 1.0).finished(), sigma,
                                                   10.0, 36.0, 1.0, 1.0, 20.0, 2.56);
  const MatrixXcd F = SolveDriftMinimizing(weak).F;
  ASSERT_GT(std::abs(F(0, 0)), 0.0);
  EXPECT_LT(DriftBound(strong, F, 0.1), DriftBound(weak, F, 0.1));
}

GTEST_TEST(DecoupledExampleTest, ClosedForm) {
  const PlantModel model = test::DecoupledPlant();
  const LimiterParams params =
      MakeLimiterParams(model, 1.0, 0.1, RangeCoefficient::kControlGain);
  const double c = SpectralNorm(MatrixXd(model.A() * model.A().transpose()));
  ASSERT_NEAR(std::sqrt(c), 1.6, 1e-15);
  Rng rng(80);
  int active = 0;
  for (int i = 0; i < 100; ++i) {
    const double h1 = test::Uniform(rng, 0.01, 8.0), h2 = test::Uniform(rng, 0.01, 8.0);
    const double s1 = test::Uniform(rng, 0.01, 100.0), s2 = test::Uniform(rng, 0.01, 100.0);
    const double E = test::Uniform(rng, 0.0, 36.0);
    const VectorXd sigma = (VectorXd(2) << s1, s2).finished();
    const double L = DynamicRange(model, params, MatrixXd(sigma.asDiagonal()));
    const DriftContext ctx = MakeDecoupledContext((VectorXcd(2) << h1, h2).finished(), sigma, E,
                                                  36.0, 1.0, 1.0, L, c);
    const PrecoderDecision d = SolveDriftMinimizing(ctx);
    MatrixXd expected = MatrixXd::Zero(2, 2);
    if (d.mode == Mode::kActive) {
      ++active;
      const double root = std::sqrt(std::max(0.0, 36.0 - E) + d.beta);
      const double h[2] = {h1, h2};
      const double s[2] = {s1, s2};
      for (int j = 0; j < 2; ++j) {
        expected(j, j) = (L / std::sqrt(2.0)) * (1.0 / h[j]) *
                         std::sqrt(std::max(0.0, 1.6 * h[j] / (L * root) - 1.0 / s[j]));
      }
    }
    EXPECT_LT(test::MaxAbs(MatrixXd(d.F.real() - expected)), 1e-9) << "point " << i;
    EXPECT_EQ(test::MaxAbs(MatrixXd(d.F.imag())), 0.0);
  }
  EXPECT_GT(active, 10);
}

VectorXd WaterLevelOracle(const VectorXd& pi, double budget, bool mmse) {
  auto power = [&](double w) {
    VectorXd p(pi.size());
    for (int i = 0; i < pi.size(); ++i) {
      p(i) = std::max(0.0, (mmse ? w / std::sqrt(pi(i)) : w) - 1.0 / pi(i));
    }
    return p;
  };
  double lo = 0.0, hi = 1.0;
  while (power(hi).sum() < budget) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (power(mid).sum() < budget ? lo : hi) = mid;
  }
  return power(hi);
}

GTEST_TEST(WaterFillTest, Examples) {
  EXPECT_NEAR(CapacityWaterFill(VectorXd::Constant(1, 0.7), 3.0)(0), 3.0, 1e-15);
  EXPECT_NEAR(MmseWaterFill(VectorXd::Constant(1, 0.7), 3.0)(0), 3.0, 1e-14);
  const VectorXd equal = CapacityWaterFill(VectorXd::Constant(2, 1.5), 4.0);
  EXPECT_NEAR(equal(0), 2.0, 1e-15);
  EXPECT_NEAR(equal(1), 2.0, 1e-15);
  const VectorXd equal_mmse = MmseWaterFill(VectorXd::Constant(2, 1.5), 4.0);
  EXPECT_NEAR(equal_mmse(0), 2.0, 1e-14);
  const VectorXd pi = (VectorXd(2) << 2.0, 1.0).finished();
  const VectorXd weak = CapacityWaterFill(pi, 0.1);
  EXPECT_NEAR(weak(0), 0.1, 1e-15);
  EXPECT_EQ(weak(1), 0.0);
  const VectorXd both = CapacityWaterFill(pi, 3.0);
  EXPECT_NEAR(both(0), 1.75, 1e-15);
  EXPECT_NEAR(both(1), 1.25, 1e-15);
}

GTEST_TEST(WaterFillTest, MatchesBisectionOracle) {
  Rng rng(81);
  for (int i = 0; i < 500; ++i) {
    const int k = 1 + i % 4;
    VectorXd pi(k);
    for (int j = 0; j < k; ++j) pi(j) = test::Uniform(rng, 0.05, 4.0);
    const double budget = test::Uniform(rng, 0.01, 20.0);
    for (bool mmse : {false, true}) {
      const VectorXd p = mmse ? MmseWaterFill(pi, budget) : CapacityWaterFill(pi, budget);
      EXPECT_NEAR(p.sum(), budget, 1e-9 * budget);
      EXPECT_GE(p.minCoeff(), 0.0);
      EXPECT_LT((p - WaterLevelOracle(pi, budget, mmse)).cwiseAbs().maxCoeff(), 1e-9 * budget);
    }
  }
}

GTEST_TEST(BaselineTest, BudgetsAndFeasibility) {
  Rng rng(82);
  for (int i = 0; i < 200; ++i) {
    const DriftContext ctx = test::RandomDriftContext(rng, 1 + i % 4);
    const double full = ctx.E;
    EXPECT_NEAR(BaselineCapacityWf(ctx).energy_used, full, 1e-9 * std::max(1.0, full));
    EXPECT_NEAR(BaselineMmseWf(ctx).energy_used, full, 1e-9 * std::max(1.0, full));
    const double mean = test::Uniform(rng, 0.0, 2.0 * ctx.theta);
    for (PowerProfile profile : {PowerProfile::kCapacity, PowerProfile::kMmse}) {
      EXPECT_NEAR(BaselineConstantPower(ctx, mean, profile).energy_used, std::min(mean, full),
                  1e-9 * std::max(1.0, full));
    }
    for (const PrecoderDecision& d :
         {SolveDriftMinimizing(ctx), BaselineCapacityWf(ctx), BaselineMmseWf(ctx),
          BaselinePeriodicWf(ctx, i, 3),
          BaselineConstantPower(ctx, mean, PowerProfile::kCapacity)}) {
      EXPECT_TRUE(CheckFeasible(ctx.E, d.F, ctx.M, ctx.tau));
      if (d.mode == Mode::kDormant) EXPECT_EQ(test::MaxAbs(d.F), 0.0);
    }
  }
}

GTEST_TEST(BaselineTest, ConstantPowerNoEnergy) {
  Rng rng(83);
  const DriftContext ctx = WithEnergy(test::RandomDriftContext(rng, 2), 0.0);
  const PrecoderDecision d = BaselineConstantPower(ctx, 40.0, PowerProfile::kMmse);
  EXPECT_EQ(d.mode, Mode::kDormant);
  EXPECT_EQ(test::MaxAbs(d.F), 0.0);
}

GTEST_TEST(BaselineTest, PeriodicDutyCycle) {
  Rng rng(84);
  DriftContext ctx = test::RandomDriftContext(rng, 2);
  ctx = WithEnergy(ctx, std::max(ctx.E, 1.0));
  const PrecoderDecision on = BaselinePeriodicWf(ctx, 0, 3);
  EXPECT_EQ(on.F, BaselineCapacityWf(ctx).F);
  int active = 0;
  for (long n = 0; n < 300; ++n) {
    if (BaselinePeriodicWf(ctx, n, 3).mode == Mode::kActive) ++active;
  }
  EXPECT_EQ(active, 100);
  EXPECT_THROW(BaselinePeriodicWf(ctx, 0, 0), DomainError);
}

GTEST_TEST(PolicyTest, NamesRoundTrip) {
  for (PolicyKind kind : {PolicyKind::kProposed, PolicyKind::kBaseline1, PolicyKind::kBaseline2,
                          PolicyKind::kBaseline3, PolicyKind::kBaseline4, PolicyKind::kBaseline5}) {
    EXPECT_EQ(ParsePolicyKind(PolicyName(kind)), kind);
  }
  EXPECT_THROW(ParsePolicyKind("greedy"), DomainError);
}

GTEST_TEST(DriftContextTest, RejectsBadInput) {
  Rng rng(85);
  const ChannelDraw draw = SampleChannel(rng, 2, 3, 2);
  const MatrixXd I = MatrixXd::Identity(2, 2);
  EXPECT_THROW(MakeDriftContext(draw, I, -1.0, 10.0, 1.0, 1.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(MakeDriftContext(draw, I, 1.0, 10.0, 1.0, 1.0, 0.0, 1.0), DomainError);
  EXPECT_THROW(MakeDriftContext(draw, MatrixXd::Identity(3, 3), 1.0, 10.0, 1.0, 1.0, 1.0, 1.0),
               DomainError);
}

}  // namespace
}  // namespace ncs

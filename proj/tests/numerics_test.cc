#include "ncs/numerics.h"

#include <cmath>

#include <gtest/gtest.h>

#include "test_util.h"

namespace ncs {
namespace {

using test::MaxAbs;

void ExpectValidSvd(const MatrixXcd& H, const SvdResult& s) {
  const double scale = std::max(1.0, MaxAbs(H));
  const MatrixXcd Pi = s.Pi.cast<std::complex<double>>();
  EXPECT_LT(MaxAbs(MatrixXcd(s.V * Pi * s.U.adjoint() - H)), 1e-10 * scale);
  EXPECT_LT(MaxAbs(MatrixXcd(s.U.adjoint() * s.U -
                             MatrixXcd::Identity(s.U.rows(), s.U.cols()))), 1e-10);
  EXPECT_LT(MaxAbs(MatrixXcd(s.V.adjoint() * s.V -
                             MatrixXcd::Identity(s.V.rows(), s.V.cols()))), 1e-10);
  const VectorXd sv = s.singular_values();
  for (Eigen::Index i = 1; i < sv.size(); ++i) EXPECT_GE(sv(i - 1), sv(i));
}

GTEST_TEST(SvdTest, Identity) {
  const SvdResult s = Svd(MatrixXcd::Identity(2, 2));
  EXPECT_LT(MaxAbs(MatrixXd(s.Pi - MatrixXd::Identity(2, 2))), 1e-15);
  ExpectValidSvd(MatrixXcd::Identity(2, 2), s);
}

GTEST_TEST(SvdTest, DiagonalAlreadyDescending) {
  MatrixXcd H = MatrixXcd::Zero(2, 2);
  H(0, 0) = 3.0;
  H(1, 1) = 1.0;
  const SvdResult s = Svd(H);
  EXPECT_NEAR(s.Pi(0, 0), 3.0, 1e-14);
  EXPECT_NEAR(s.Pi(1, 1), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(s.U(0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(s.V(1, 1)), 1.0, 1e-14);
  ExpectValidSvd(H, s);
}

GTEST_TEST(SvdTest, RejectsNonFinite) {
  MatrixXcd H = MatrixXcd::Identity(2, 2);
  H(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Svd(H), DomainError);
}

GTEST_TEST(SvdTest, RandomReconstruction) {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const int rows = 1 + trial % 8;
    const int cols = 1 + (trial / 8) % 8;
    const MatrixXcd H = test::RandomComplex(rng, rows, cols);
    ExpectValidSvd(H, Svd(H));
  }
}

GTEST_TEST(EigSymTest, Diagonal) {
  const EigSymResult e = EigSym(test::Diag({5.0, 2.0}));
  EXPECT_NEAR(e.lambda(0), 5.0, 1e-14);
  EXPECT_NEAR(e.lambda(1), 2.0, 1e-14);
  EXPECT_NEAR(std::abs(e.S(0, 0)), 1.0, 1e-14);
}

GTEST_TEST(EigSymTest, TwoByTwoByHand) {
  MatrixXd m(2, 2);
  m << 2, 1, 1, 2;
  const EigSymResult e = EigSym(m);
  EXPECT_NEAR(e.lambda(0), 3.0, 1e-14);
  EXPECT_NEAR(e.lambda(1), 1.0, 1e-14);
  EXPECT_LT(MaxAbs(MatrixXd(e.Reconstruct() - m)), 1e-12);
}

GTEST_TEST(EigSymTest, Zero) {
  const EigSymResult e = EigSym(MatrixXd::Zero(3, 3));
  EXPECT_EQ(e.lambda.cwiseAbs().maxCoeff(), 0.0);
}

GTEST_TEST(EigSymTest, RejectsAsymmetric) {
  MatrixXd m(2, 2);
  m << 1, 2, 0, 1;
  EXPECT_THROW(EigSym(m), DomainError);
}

GTEST_TEST(EigSymTest, ClampsRoundOffButRejectsIndefinite) {
  EXPECT_EQ(EigSym(test::Diag({1.0, -1e-14})).lambda(1), 0.0);
  EXPECT_THROW(EigSym(test::Diag({1.0, -1e-6})), DomainError);
}

GTEST_TEST(EigSymTest, PreservesTraceAndFrobeniusNorm) {
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const MatrixXd m = test::RandomPsd(rng, 1 + trial % 6);
    const EigSymResult e = EigSym(m);
    const double scale = std::max(1.0, m.norm());
    EXPECT_NEAR(e.lambda.sum(), m.trace(), 1e-10 * scale);
    EXPECT_NEAR(e.lambda.norm(), m.norm(), 1e-10 * scale);
    EXPECT_LT(MaxAbs(MatrixXd(e.Reconstruct() - m)), 1e-10 * scale);
    for (Eigen::Index i = 1; i < e.lambda.size(); ++i) EXPECT_GE(e.lambda(i - 1), e.lambda(i));
  }
}

GTEST_TEST(SteinTest, DiagonalClosedForm) {
  const MatrixXd Q = SolveStein(test::Diag({0.8, 0.55}), MatrixXd::Identity(2, 2));
  EXPECT_NEAR(Q(0, 0), 1.0 / (1.0 - 0.64), 1e-12);
  EXPECT_NEAR(Q(1, 1), 1.0 / (1.0 - 0.3025), 1e-12);
  EXPECT_NEAR(Q(0, 1), 0.0, 1e-12);
}

GTEST_TEST(SteinTest, ZeroDynamics) {
  const MatrixXd Q = SolveStein(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2));
  EXPECT_LT(MaxAbs(MatrixXd(Q - MatrixXd::Identity(2, 2))), 1e-15);
}

GTEST_TEST(SteinTest, RejectsUnstable) {
  EXPECT_THROW(SolveStein(test::Diag({1.0, 0.5}), MatrixXd::Identity(2, 2)),
               NotSchurStableError);
}

GTEST_TEST(SteinTest, RandomResidual) {
  Rng rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + trial % 4;
    const MatrixXd F = test::RandomStable(rng, k, test::Uniform(rng, 0.0, 0.95));
    const MatrixXd T = test::RandomPsd(rng, k) + MatrixXd::Identity(k, k);
    const MatrixXd Q = SolveStein(F, T);
    EXPECT_LT(MaxAbs(MatrixXd(F.transpose() * Q * F - Q + T)), 1e-9);
    EXPECT_GT(EigSym(Q).lambda.minCoeff(), 0.0);
  }
}

GTEST_TEST(DareTest, ScalarFixedPoints) {
  MatrixXd one = MatrixXd::Identity(1, 1);
  EXPECT_NEAR(SolveDare(MatrixXd::Zero(1, 1), one, one, one)(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(SolveDare(0.5 * one, MatrixXd::Zero(1, 1), one, one)(0, 0), 4.0 / 3.0, 1e-9);
}

GTEST_TEST(DareTest, ReferencePlantResidual) {
  const MatrixXd A = test::ReferenceA();
  const MatrixXd I = MatrixXd::Identity(2, 2);
  const MatrixXd Z = SolveDare(A, I, I, I);
  const MatrixXd residual =
      A.transpose() * Z * A -
      A.transpose() * Z * I * (I.transpose() * Z * I + I).inverse() * I.transpose() * Z * A + I -
      Z;
  EXPECT_LT(MaxAbs(residual), 1e-8);
  EXPECT_LT(MaxAbs(MatrixXd(Z - Z.transpose())), 1e-10);
}

GTEST_TEST(DareTest, ReportsNonConvergence) {
  // Uncontrollable unstable mode: the iterates grow without bound.
  const MatrixXd one = MatrixXd::Identity(1, 1);
  EXPECT_THROW(SolveDare(2.0 * one, MatrixXd::Zero(1, 1), one, one, 2000), ConvergenceError);
}

GTEST_TEST(BisectTest, KnownRoots) {
  EXPECT_NEAR(Bisect([](double x) { return x - 1.0; }, 0.0, 2.0, 1e-12), 1.0, 1e-11);
  EXPECT_NEAR(Bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-12), std::sqrt(2.0),
              1e-11);
}

GTEST_TEST(BisectTest, NoSignChange) {
  EXPECT_THROW(Bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12), BracketError);
}

}  // namespace
}  // namespace ncs

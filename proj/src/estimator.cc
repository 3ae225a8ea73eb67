#include "ncs/estimator.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace ncs {

namespace {

using Complex = std::complex<double>;

MatrixXd RealPart(const MatrixXcd& M, double tol, const char* what) {
  const double scale = std::max(1.0, M.real().cwiseAbs().maxCoeff());
  if (M.imag().cwiseAbs().maxCoeff() > tol * scale) {
    throw NumericalError(std::string(what) + ": result has a non-negligible imaginary part");
  }
  return M.real();
}

void CheckCovariance(const MatrixXd& Sigma, const EffectiveChannel& eff) {
  if (Sigma.rows() != Sigma.cols()) throw DomainError("Sigma must be square");
  if (eff.f_tilde.cols() != Sigma.rows()) {
    throw DomainError("effective channel and Sigma dimensions disagree");
  }
}

}  // namespace

EffectiveChannel EffectiveChannel::FromProduct(const MatrixXcd& H, const MatrixXcd& F,
                                               double g) {
  if (H.cols() != F.rows()) throw DomainError("EffectiveChannel: H and F disagree");
  return FromMatrix(H * F * g);
}

EffectiveChannel EffectiveChannel::FromMatrix(MatrixXcd f_tilde) {
  EffectiveChannel eff;
  eff.gram2re = Symmetrize(2.0 * (f_tilde.adjoint() * f_tilde).real());
  eff.f_tilde = std::move(f_tilde);
  return eff;
}

MatrixXcd Augment(const MatrixXcd& M) {
  MatrixXcd out(2 * M.rows(), M.cols());
  out << M, M.conjugate();
  return out;
}

VectorXcd Augment(const VectorXcd& v) {
  VectorXcd out(2 * v.size());
  out << v, v.conjugate();
  return out;
}

MatrixXd PosteriorCovarianceAugmented(const MatrixXd& Sigma, const EffectiveChannel& eff) {
  CheckCovariance(Sigma, eff);
  const MatrixXcd Fa = Augment(eff.f_tilde);
  const MatrixXcd S = Sigma.cast<Complex>();
  const MatrixXcd SFh = S * Fa.adjoint();
  MatrixXcd inner = Fa * SFh;
  inner += MatrixXcd::Identity(inner.rows(), inner.cols());
  const MatrixXcd post = S - SFh * inner.ldlt().solve(SFh.adjoint());
  return Symmetrize(RealPart(post, 1e-9, "PosteriorCovarianceAugmented"));
}

MatrixXd PosteriorCovarianceGram(const MatrixXd& Sigma, const EffectiveChannel& eff) {
  CheckCovariance(Sigma, eff);
  const Eigen::Index k = Sigma.rows();
  const MatrixXd lhs = MatrixXd::Identity(k, k) + Sigma * eff.gram2re;
  return Symmetrize(lhs.partialPivLu().solve(Sigma));
}

MatrixXd SigmaStep(const MatrixXd& Sigma, const EffectiveChannel& eff, int gamma,
                   const MatrixXd& A, const MatrixXd& W, CovariancePath path) {
  CheckCovariance(Sigma, eff);
  if (gamma != 0 && gamma != 1) throw DomainError("SigmaStep: gamma must be 0 or 1");
  EigSym(Sigma);  // symmetry and PSD check
  MatrixXd post;
  if (gamma == 0 || eff.is_zero()) {
    post = Sigma;
  } else if (path == CovariancePath::kGram) {
    post = PosteriorCovarianceGram(Sigma, eff);
  } else {
    post = PosteriorCovarianceAugmented(Sigma, eff);
  }
  return Symmetrize(A * post * A.transpose() + W);
}

VectorXd EstimateStep(const VectorXd& x_hat, const MatrixXd& Sigma, const VectorXcd& y,
                      const EffectiveChannel& eff, int gamma, const MatrixXd& A,
                      const MatrixXd& B, const VectorXd& u) {
  CheckCovariance(Sigma, eff);
  if (x_hat.size() != Sigma.rows() || y.size() != eff.f_tilde.rows() || u.size() != B.cols()) {
    throw DomainError("EstimateStep: dimension mismatch");
  }
  VectorXd corrected = x_hat;
  if (gamma == 1 && !eff.is_zero()) {
    const MatrixXcd Fa = Augment(eff.f_tilde);
    const MatrixXcd S = Sigma.cast<Complex>();
    const MatrixXcd SFh = S * Fa.adjoint();
    MatrixXcd inner = Fa * SFh;
    inner += MatrixXcd::Identity(inner.rows(), inner.cols());
    const VectorXcd innovation = Augment(y) - Fa * x_hat.cast<Complex>();
    const VectorXcd correction = SFh * inner.ldlt().solve(innovation);
    const double scale = std::max(1.0, correction.real().cwiseAbs().maxCoeff());
    if (correction.imag().cwiseAbs().maxCoeff() > 1e-6 * scale) {
      throw NumericalError("EstimateStep: correction has a non-negligible imaginary part");
    }
    corrected += correction.real();
  }
  return A * corrected + B * u;
}

double MseSample(const VectorXd& x, const VectorXd& x_hat) { return (x - x_hat).squaredNorm(); }

void Estimator::Update(const VectorXcd& y, const EffectiveChannel& eff, int gamma,
                       const MatrixXd& A, const MatrixXd& B, const MatrixXd& W,
                       const VectorXd& u) {
  VectorXd next = EstimateStep(x_hat_, Sigma_, y, eff, gamma, A, B, u);
  Sigma_ = SigmaStep(Sigma_, eff, gamma, A, W);
  x_hat_ = std::move(next);
}

}  // namespace ncs

#pragma once

#include "ncs/numerics.h"

namespace ncs {

/// Effective channel seen by the estimator, Ftilde = H F g (Nc x K), with
/// its real-ified Gram matrix 2 Re{Ftilde^H Ftilde}.
struct EffectiveChannel {
  MatrixXcd f_tilde;
  MatrixXd gram2re;

  static EffectiveChannel FromProduct(const MatrixXcd& H, const MatrixXcd& F, double g);
  static EffectiveChannel FromMatrix(MatrixXcd f_tilde);
  bool is_zero() const { return f_tilde.squaredNorm() == 0.0; }
};

/// [M; conj(M)], the 2Nc x K augmented stack.
MatrixXcd Augment(const MatrixXcd& M);
VectorXcd Augment(const VectorXcd& v);

/// Sigma - Sigma Fa^H (Fa Sigma Fa^H + I)^-1 Fa Sigma through the explicit
/// augmented stack. Throws NumericalError if the result is not real.
MatrixXd PosteriorCovarianceAugmented(const MatrixXd& Sigma, const EffectiveChannel& eff);

/// (Gram + Sigma^-1)^-1, evaluated as (I + Sigma Gram)^-1 Sigma; Sigma may be
/// singular.
MatrixXd PosteriorCovarianceGram(const MatrixXd& Sigma, const EffectiveChannel& eff);

enum class CovariancePath { kGram, kAugmented };

/// Sigma' = A Sigma+ A^T + W where Sigma+ = Sigma when gamma = 0 or
/// Ftilde = 0, and the posterior covariance otherwise. Symmetrized.
/// Throws DomainError if Sigma is not symmetric PSD.
MatrixXd SigmaStep(const MatrixXd& Sigma, const EffectiveChannel& eff, int gamma,
                   const MatrixXd& A, const MatrixXd& W,
                   CovariancePath path = CovariancePath::kGram);

/// xhat' = A (xhat + gamma K (ya - Fa xhat)) + B u with
/// K = Sigma Fa^H (Fa Sigma Fa^H + I)^-1 and ya = [y; conj(y)].
/// Throws NumericalError if the correction has an imaginary part above
/// 1e-6 relative to its magnitude.
VectorXd EstimateStep(const VectorXd& x_hat, const MatrixXd& Sigma, const VectorXcd& y,
                      const EffectiveChannel& eff, int gamma, const MatrixXd& A,
                      const MatrixXd& B, const VectorXd& u);

/// ||x - xhat||^2.
double MseSample(const VectorXd& x, const VectorXd& x_hat);

/// Estimate and covariance carried together from slot to slot.
class Estimator {
 public:
  explicit Estimator(int k)
      : x_hat_(VectorXd::Zero(k)), Sigma_(MatrixXd::Zero(k, k)) {}
  Estimator(VectorXd x_hat, MatrixXd Sigma)
      : x_hat_(std::move(x_hat)), Sigma_(std::move(Sigma)) {}

  const VectorXd& x_hat() const { return x_hat_; }
  const MatrixXd& Sigma() const { return Sigma_; }

  /// Advances both the estimate and Sigma by one slot.
  void Update(const VectorXcd& y, const EffectiveChannel& eff, int gamma, const MatrixXd& A,
              const MatrixXd& B, const MatrixXd& W, const VectorXd& u);

 private:
  VectorXd x_hat_;
  MatrixXd Sigma_;
};

}  // namespace ncs

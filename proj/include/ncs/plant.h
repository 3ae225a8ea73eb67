#pragma once

#include "ncs/numerics.h"

namespace ncs {

/// Linear stochastic plant x(n+1) = A x(n) + B u(n) + w(n), w ~ N(0, W),
/// driven by the certainty-equivalent law u(n) = -Psi A xhat(n).
///
/// Construction validates dimensions, that W is symmetric PSD, and that the
/// closed loop A - B Psi A is Schur stable. Immutable afterwards.
class PlantModel {
 public:
  PlantModel(MatrixXd A, MatrixXd B, MatrixXd W, MatrixXd Psi);

  const MatrixXd& A() const { return A_; }
  const MatrixXd& B() const { return B_; }
  const MatrixXd& W() const { return W_; }
  const MatrixXd& Psi() const { return Psi_; }
  int state_dim() const { return static_cast<int>(A_.rows()); }
  int input_dim() const { return static_cast<int>(B_.cols()); }

  /// A - B Psi A.
  const MatrixXd& closed_loop() const { return closed_loop_; }
  /// Lower-triangular factor with W = W_sqrt * W_sqrt^T (used to draw w).
  const MatrixXd& noise_factor() const { return noise_factor_; }

 private:
  MatrixXd A_, B_, W_, Psi_;
  MatrixXd closed_loop_;
  MatrixXd noise_factor_;
};

/// A x + B u + w.
VectorXd Step(const PlantModel& model, const VectorXd& x, const VectorXd& u,
              const VectorXd& w);

/// -Psi A xhat.
VectorXd Control(const PlantModel& model, const VectorXd& x_hat);

/// prod_i max(1, |mu_i(M)|), eigenvalues of a general real square matrix.
double InstabilityMeasure(const MatrixXd& M);

/// Same measure for a symmetric matrix, through the symmetric eigensolver.
double InstabilityMeasureSymmetric(const MatrixXd& M);

/// Sign convention used to turn the Riccati solution into Psi.
///  kStandard: Psi = (B^T Z B + R)^-1 B^T Z, so that -Psi A is the LQR gain.
///  kLiteral:  Psi = -(B^T Z B + R)^-1 B^T Z, exactly as printed.
enum class GainConvention { kStandard, kLiteral };

/// Certainty-equivalent gain from the LQG weights P (state) and R (input).
/// Throws DesignError if the Riccati iteration fails or the resulting closed
/// loop A - B Psi A is not Schur stable.
MatrixXd DesignGainCe(const MatrixXd& A, const MatrixXd& B, const MatrixXd& P,
                      const MatrixXd& R,
                      GainConvention convention = GainConvention::kStandard);

}  // namespace ncs

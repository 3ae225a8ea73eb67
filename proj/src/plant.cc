#include "ncs/plant.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace ncs {

PlantModel::PlantModel(MatrixXd A, MatrixXd B, MatrixXd W, MatrixXd Psi)
    : A_(std::move(A)), B_(std::move(B)), W_(std::move(W)), Psi_(std::move(Psi)) {
  const Eigen::Index k = A_.rows();
  if (A_.cols() != k || k == 0) throw DomainError("PlantModel: A must be square");
  if (B_.rows() != k) throw DomainError("PlantModel: B must have K rows");
  if (W_.rows() != k || W_.cols() != k) throw DomainError("PlantModel: W must be K x K");
  if (Psi_.rows() != B_.cols() || Psi_.cols() != k) {
    throw DomainError("PlantModel: Psi must be D x K");
  }
  if (!AllFinite(A_) || !AllFinite(B_) || !AllFinite(W_) || !AllFinite(Psi_)) {
    throw DomainError("PlantModel: non-finite entry");
  }
  // Throws on asymmetric or indefinite W.
  const EigSymResult w_eig = EigSym(W_);
  noise_factor_ = w_eig.S * w_eig.lambda.cwiseSqrt().asDiagonal();

  closed_loop_ = A_ - B_ * Psi_ * A_;
  const double rho = SpectralRadius(closed_loop_);
  if (!(rho < 1.0)) {
    throw NotSchurStableError("PlantModel: closed loop A - B Psi A has spectral radius " +
                              std::to_string(rho));
  }
}

VectorXd Step(const PlantModel& model, const VectorXd& x, const VectorXd& u,
              const VectorXd& w) {
  if (x.size() != model.state_dim() || w.size() != model.state_dim() ||
      u.size() != model.input_dim()) {
    throw DomainError("Step: dimension mismatch");
  }
  return model.A() * x + model.B() * u + w;
}

VectorXd Control(const PlantModel& model, const VectorXd& x_hat) {
  if (x_hat.size() != model.state_dim()) throw DomainError("Control: dimension mismatch");
  return -(model.Psi() * (model.A() * x_hat));
}

double InstabilityMeasure(const MatrixXd& M) {
  if (M.rows() != M.cols()) throw DomainError("InstabilityMeasure: not square");
  Eigen::EigenSolver<MatrixXd> es(M, false);
  double product = 1.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    product *= std::max(1.0, std::abs(es.eigenvalues()(i)));
  }
  return product;
}

double InstabilityMeasureSymmetric(const MatrixXd& M) {
  if (M.rows() != M.cols()) throw DomainError("InstabilityMeasure: not square");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Symmetrize(M), Eigen::EigenvaluesOnly);
  double product = 1.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    product *= std::max(1.0, std::abs(es.eigenvalues()(i)));
  }
  return product;
}

MatrixXd DesignGainCe(const MatrixXd& A, const MatrixXd& B, const MatrixXd& P,
                      const MatrixXd& R, GainConvention convention) {
  MatrixXd Z;
  try {
    Z = SolveDare(A, B, P, R);
  } catch (const ConvergenceError& e) {
    throw DesignError(std::string("DesignGainCe: Riccati solve failed: ") + e.what());
  }
  const MatrixXd BtZ = B.transpose() * Z;
  MatrixXd psi = (BtZ * B + R).ldlt().solve(BtZ);
  if (convention == GainConvention::kLiteral) psi = -psi;
  const double rho = SpectralRadius(A - B * psi * A);
  if (!(rho < 1.0)) {
    throw DesignError("DesignGainCe: closed loop not Schur stable (rho = " +
                      std::to_string(rho) + ")");
  }
  return psi;
}

}  // namespace ncs

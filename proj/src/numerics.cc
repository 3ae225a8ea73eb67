#include "ncs/numerics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

namespace ncs {

VectorXd SvdResult::singular_values() const {
  const Eigen::Index n = std::min(Pi.rows(), Pi.cols());
  return Pi.diagonal().head(n);
}

bool AllFinite(const MatrixXd& M) { return M.allFinite(); }
bool AllFinite(const MatrixXcd& M) {
  return M.real().allFinite() && M.imag().allFinite();
}

MatrixXd Symmetrize(const MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

SvdResult Svd(const MatrixXcd& H) {
  if (!AllFinite(H)) throw DomainError("Svd: non-finite entry in H");
  // Eigen: H = Ue * diag(s) * Ve^H with s descending.
  Eigen::JacobiSVD<MatrixXcd> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdResult out;
  out.V = svd.matrixU();
  out.U = svd.matrixV();
  out.Pi = MatrixXd::Zero(H.rows(), H.cols());
  const VectorXd& s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) out.Pi(i, i) = s(i);
  return out;
}

EigSymResult EigSym(const MatrixXd& Sigma) {
  if (Sigma.rows() != Sigma.cols()) {
    throw DomainError("EigSym: matrix is not square");
  }
  if (!AllFinite(Sigma)) throw DomainError("EigSym: non-finite entry");
  const double scale = std::max(1.0, Sigma.cwiseAbs().maxCoeff());
  if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError("EigSym: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Symmetrize(Sigma));
  if (es.info() != Eigen::Success) {
    throw NumericalError("EigSym: eigensolver failed");
  }
  const Eigen::Index n = Sigma.rows();
  EigSymResult out;
  out.S.resize(n, n);
  out.lambda.resize(n);
  // Solver order is ascending; reverse it.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.lambda(i) = es.eigenvalues()(n - 1 - i);
    out.S.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  const double clamp_band = 1e-12 * scale;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.lambda(i) < 0.0) {
      if (out.lambda(i) < -clamp_band) {
        throw DomainError("EigSym: matrix is not positive semidefinite (eigenvalue " +
                          std::to_string(out.lambda(i)) + ")");
      }
      out.lambda(i) = 0.0;
    }
  }
  return out;
}

double SpectralRadius(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double SpectralNorm(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  return svd.singularValues()(0);
}

double SpectralNorm(const MatrixXcd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXcd> svd(M);
  return svd.singularValues()(0);
}

MatrixXd SolveStein(const MatrixXd& F, const MatrixXd& T) {
  const Eigen::Index n = F.rows();
  if (F.cols() != n || T.rows() != n || T.cols() != n) {
    throw DomainError("SolveStein: dimension mismatch");
  }
  const double rho = SpectralRadius(F);
  if (!(rho < 1.0)) {
    throw NotSchurStableError("SolveStein: spectral radius " +
                              std::to_string(rho) + " >= 1");
  }
  // vec(F^T Q F) = (F^T kron F^T) vec(Q) for column-major vec.
  const MatrixXd Ft = F.transpose();
  const MatrixXd lhs =
      MatrixXd::Identity(n * n, n * n) - Eigen::kroneckerProduct(Ft, Ft).eval();
  const VectorXd rhs = Eigen::Map<const VectorXd>(T.data(), n * n);
  const VectorXd q = lhs.partialPivLu().solve(rhs);
  return Symmetrize(Eigen::Map<const MatrixXd>(q.data(), n, n));
}

MatrixXd SolveDare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& P,
                   const MatrixXd& R, int max_iterations) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || P.rows() != n || P.cols() != n ||
      R.rows() != B.cols() || R.cols() != B.cols()) {
    throw DomainError("SolveDare: dimension mismatch");
  }
  MatrixXd Z = P;
  for (int it = 0; it < max_iterations; ++it) {
    const MatrixXd BtZ = B.transpose() * Z;
    const MatrixXd gain = (BtZ * B + R).ldlt().solve(BtZ * A);
    MatrixXd next = A.transpose() * Z * A - A.transpose() * BtZ.transpose() * gain + P;
    next = Symmetrize(next);
    if (!AllFinite(next)) {
      throw ConvergenceError("SolveDare: iteration diverged");
    }
    const double diff = (next - Z).cwiseAbs().maxCoeff();
    Z = std::move(next);
    if (diff < 1e-10) return Z;
  }
  throw ConvergenceError("SolveDare: no convergence in " +
                         std::to_string(max_iterations) + " iterations");
}

double Bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol, int max_iterations) {
  if (!(lo <= hi)) throw DomainError("Bisect: lo > hi");
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw BracketError("Bisect: f(lo) and f(hi) do not bracket a root");
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < max_iterations; ++it) {
    mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (std::abs(f_mid) <= tol) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= tol * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace ncs

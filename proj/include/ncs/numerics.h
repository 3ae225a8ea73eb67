#pragma once

#include <functional>

#include <Eigen/Dense>

#include "ncs/errors.h"

namespace ncs {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Full singular value decomposition H = V * Pi * U^H of an Nc x Ns matrix.
/// Pi is rectangular diagonal with its diagonal sorted in descending order.
struct SvdResult {
  MatrixXcd U;   // Ns x Ns, unitary
  MatrixXd Pi;   // Nc x Ns
  MatrixXcd V;   // Nc x Nc, unitary

  /// Diagonal of Pi (length min(Nc, Ns)), descending.
  VectorXd singular_values() const;
};

/// Eigendecomposition Sigma = S * diag(lambda) * S^T of a symmetric PSD
/// matrix, eigenvalues descending. Ties keep the order produced by the
/// underlying solver; callers must not depend on it.
struct EigSymResult {
  MatrixXd S;
  VectorXd lambda;

  MatrixXd Lambda() const { return lambda.asDiagonal(); }
  MatrixXd Reconstruct() const { return S * lambda.asDiagonal() * S.transpose(); }
};

SvdResult Svd(const MatrixXcd& H);

/// Throws DomainError if Sigma is not symmetric to 1e-10 (relative to its
/// magnitude) or has an eigenvalue below the PSD round-off band.
/// Eigenvalues in [-1e-12 * max(1, |Sigma|), 0) are clamped to zero.
EigSymResult EigSym(const MatrixXd& Sigma);

/// Largest eigenvalue modulus of a real square matrix.
double SpectralRadius(const MatrixXd& M);

/// Spectral (operator 2-) norm.
double SpectralNorm(const MatrixXd& M);
double SpectralNorm(const MatrixXcd& M);

/// Solves the discrete Lyapunov (Stein) equation F^T Q F - Q = -T.
/// Throws NotSchurStableError if rho(F) >= 1.
MatrixXd SolveStein(const MatrixXd& F, const MatrixXd& T);

/// Solves Z = A^T Z A - A^T Z B (B^T Z B + R)^-1 B^T Z A + P by fixed-point
/// iteration from Z0 = P. Converged when successive iterates differ by less
/// than 1e-10 in max-norm. Throws ConvergenceError after max_iterations.
MatrixXd SolveDare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& P,
                   const MatrixXd& R, int max_iterations = 100000);

/// Root of a monotone scalar function on [lo, hi]. Stops when |f(root)| <=
/// tol or when the bracket is narrower than tol * max(1, |root|).
/// Throws BracketError when f(lo) and f(hi) have the same strict sign.
double Bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol, int max_iterations = 400);

bool AllFinite(const MatrixXd& M);
bool AllFinite(const MatrixXcd& M);

/// (M + M^T) / 2.
MatrixXd Symmetrize(const MatrixXd& M);

}  // namespace ncs

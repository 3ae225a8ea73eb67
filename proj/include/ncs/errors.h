#pragma once

#include <stdexcept>
#include <string>

namespace ncs {

/// Input outside the domain an operation accepts (non-finite entries,
/// dimension mismatch, negative energy, asymmetric matrix, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix required to have spectral radius < 1 does not.
class NotSchurStableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// f(lo) and f(hi) do not bracket a root.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Controller gain synthesis produced (or would produce) an unstable loop.
class DesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical consistency check failed (e.g. a result that must be real
/// carries a non-negligible imaginary part).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precoder decision violated the energy-availability constraint.
class FeasibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean-square-error bound requested where it does not exist (eta <= 0).
class BoundUndefinedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ncs

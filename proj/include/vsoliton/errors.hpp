#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vsoliton {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (non-real input,
/// non-positive volume, bad parameter).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An axis or component index is out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// A field carries Fourier content above the anti-aliasing cutoff.
class AliasingError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The Hermitian form g_{ij̄} failed the positivity floor at some node.
class NonPositiveMetric : public Error {
 public:
  NonPositiveMetric(std::size_t node, double min_eigenvalue, double floor);

  std::size_t node() const { return node_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  std::size_t node_;
  double min_eigenvalue_;
};

/// The requested operation is not valid for the object's state
/// (e.g. ledger requested from a non-converged solve).
class StateError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition does not hold. Carries the offending Fourier
/// modes when the failure is an invariance check.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& what, std::vector<std::vector<int>> modes = {});

  const std::vector<std::vector<int>>& offending_modes() const { return modes_; }

 private:
  std::vector<std::vector<int>> modes_;
};

class LinearSolveStalled : public Error {
 public:
  LinearSolveStalled(int iterations, double relative_residual);

  int iterations() const { return iterations_; }
  double relative_residual() const { return relative_residual_; }

 private:
  int iterations_;
  double relative_residual_;
};

class LineSearchFailed : public Error {
 public:
  LineSearchFailed(int newton_iteration, double residual);
};

/// A flow trajectory left the admissible annulus.
class TrajectoryError : public Error {
 public:
  TrajectoryError(double exit_time, double radius_sq);

  double exit_time() const { return exit_time_; }
  double radius_sq() const { return radius_sq_; }

 private:
  double exit_time_;
  double radius_sq_;
};

}  // namespace vsoliton

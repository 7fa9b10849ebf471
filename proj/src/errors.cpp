#include "vsoliton/errors.hpp"

#include <sstream>

namespace vsoliton {

namespace {

std::string format_nonpositive(std::size_t node, double eig, double floor) {
  std::ostringstream os;
  os << "metric not positive: min eigenvalue " << eig << " <= floor " << floor << " at node " << node;
  return os.str();
}

std::string num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

NonPositiveMetric::NonPositiveMetric(std::size_t node, double min_eigenvalue, double floor)
    : Error(format_nonpositive(node, min_eigenvalue, floor)), node_(node), min_eigenvalue_(min_eigenvalue) {}

PreconditionError::PreconditionError(const std::string& what, std::vector<std::vector<int>> modes)
    : Error(what), modes_(std::move(modes)) {}

LinearSolveStalled::LinearSolveStalled(int iterations, double relative_residual)
    : Error("linear solve stalled after " + std::to_string(iterations) +
            " iterations (relative residual " + num(relative_residual) + ")"),
      iterations_(iterations),
      relative_residual_(relative_residual) {}

LineSearchFailed::LineSearchFailed(int newton_iteration, double residual)
    : Error("line search failed at Newton iteration " + std::to_string(newton_iteration) +
            " (residual " + num(residual) + ")") {}

TrajectoryError::TrajectoryError(double exit_time, double radius_sq)
    : Error("trajectory left the annulus at t = " + num(exit_time) +
            " (|z|^2 = " + num(radius_sq) + ")"),
      exit_time_(exit_time),
      radius_sq_(radius_sq) {}

}  // namespace vsoliton

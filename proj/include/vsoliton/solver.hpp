#pragma once

// The ε-perturbed scalar V-soliton equation on the torus, in log form:
//
//   r(u) = log(det g̃ / det g) − log(|Z|²_g̃ + ε) − F − c_ε + λu = 0,
//   g̃ = g + ∂∂̄u,   ∫ ((ε + |Z|²_g) e^{F + c_ε} − 1) ωⁿ = 0.
//
// Its exact linearization is L[v] = g̃_H^{i j̄} v_{i j̄} + λv with
// g̃_H^{i j̄} = g̃^{i j̄} − Z^i Z̄^j / (|Z|²_g̃ + ε).

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vsoliton/fields.hpp"
#include "vsoliton/geometry.hpp"
#include "vsoliton/grid.hpp"

namespace vsoliton {

/// c_ε = −log(∫ (ε + |Z|²_g) e^F ωⁿ / ∫ ωⁿ).
double normalization_constant(const MetricField& g, const HoloField& Z, const RealField& F, double eps);
/// Same with det g and |Z|²_g supplied directly.
double normalization_constant(const RealField& det_g, const RealField& z_norm_g, const RealField& F, double eps);

class SolitonProblem {
 public:
  /// Validates λ <= 0 and ε > 0, builds the background metric δ + ∂∂̄φ and
  /// computes c_ε. The band-limit guard applies to φ.
  SolitonProblem(RealField phi, HoloField Z, RealField F, double lambda, double eps,
                 const BandLimitGuard& guard = {});

  const GridSpec& grid() const { return phi_->grid(); }
  const RealField& phi() const { return *phi_; }
  const HoloField& Z() const { return Z_; }
  const RealField& F() const { return *F_; }
  double lambda() const { return lambda_; }
  double eps() const { return eps_; }
  double c_eps() const { return c_eps_; }
  /// λ = 0 problems are solved modulo the discrete kernel of ∂∂̄ (constants
  /// and the all-Nyquist sawtooth modes), which is removed from u and r.
  bool mean_zero_gauge() const { return lambda_ == 0.0; }
  const RealField& log_det_g() const { return *log_det_g_; }
  const RealField& det_g() const { return *det_g_; }
  /// |Z|²_g of the background metric.
  const RealField& z_norm_g() const { return *z_norm_g_; }
  const BandLimitGuard& guard() const { return guard_; }

  /// Same data at another ε, with c_ε recomputed. Field data is shared.
  SolitonProblem with_epsilon(double eps) const;

  /// Known solution of the discrete problem, if any. For λ = 0 the
  /// solution is the mean-zero representative and the residual at it equals
  /// the constant `exact_shift`.
  const RealField* exact_solution() const { return exact_.get(); }
  double exact_shift() const { return exact_shift_; }
  void set_exact_solution(RealField u, double shift = 0.0);

 private:
  std::shared_ptr<const RealField> phi_;
  HoloField Z_;
  std::shared_ptr<const RealField> F_;
  double lambda_;
  double eps_;
  double c_eps_ = 0.0;
  BandLimitGuard guard_;
  std::shared_ptr<const RealField> log_det_g_;
  std::shared_ptr<const RealField> det_g_;
  std::shared_ptr<const RealField> z_norm_g_;
  std::shared_ptr<const RealField> exact_;
  double exact_shift_ = 0.0;
};

/// Log-form residual. Throws NonPositiveMetric when g̃ fails the floor.
RealField residual(const SolitonProblem& p, const RealField& u,
                   double positivity_floor = kDefaultPositivityFloor);

/// L[v] at u.
RealField linearize_apply(const SolitonProblem& p, const RealField& u, const RealField& v,
                          double positivity_floor = kDefaultPositivityFloor);

/// g̃_H^{i j̄} at every node.
HermitianField linearized_coefficients(const SolitonProblem& p, const RealField& u,
                                       double positivity_floor = kDefaultPositivityFloor);

struct SolveOptions {
  int max_newton_iters = 50;
  /// Max norm of the log residual (of its part off the ∂∂̄ kernel when λ = 0).
  double residual_tol = 1e-10;
  double damping = 0.5;
  int max_halvings = 30;
  /// Relative 2-norm tolerance of the inner Krylov solve.
  double linear_tol = 1e-8;
  int max_linear_iters = 400;
  double positivity_floor = kDefaultPositivityFloor;

  /// Throws DomainError on invalid values.
  void validate() const;
};

struct IterateRecord {
  int iteration = 0;
  double residual = 0.0;         // max norm after the step
  double damping = 0.0;          // accepted step length (0 for the initial state)
  double min_eig_metric = 0.0;   // min eigenvalue of g̃
  double min_eig_operator = 0.0; // min eigenvalue of g̃_H^{i j̄}
  int linear_iterations = 0;
  double linear_residual = 0.0;
};

struct CherrierEntry {
  double p = 0.0;
  double lhs = 0.0;
  double rhs_core = 0.0;
};

/// Estimate quantities evaluated on a converged solve (see estimates.hpp).
/// Entries that do not apply to the problem are left empty.
struct EstimateLedger {
  double sup_u = 0.0;
  double inf_u = 0.0;
  double sup_lap_u = 0.0;
  double sup_znorm_tilde = 0.0;
  double fitted_C = 0.0;
  double hypothesis_min = 0.0;
  std::optional<double> minpoint_gap;
  std::optional<double> maxpoint_witness;
  std::optional<double> zhu_sup;
  std::optional<double> zhu_imag;
  std::vector<CherrierEntry> cherrier;
  std::optional<double> cherrier_C;
  std::optional<double> moser_lhs;
  std::optional<double> moser_rhs_integral;
  std::optional<double> moser_C;
};

struct SolveReport {
  std::shared_ptr<const SolitonProblem> problem;
  RealField u{GridSpec(1, 16)};
  bool converged = false;
  double final_residual = 0.0;
  /// λ = 0 only: the constant the residual converges to.
  double compatibility_shift = 0.0;
  std::vector<IterateRecord> iterates;
  std::optional<EstimateLedger> ledger;

  int newton_steps() const { return iterates.empty() ? 0 : static_cast<int>(iterates.size()) - 1; }
  /// Smallest ellipticity eigenvalue over all recorded iterates.
  double min_operator_eigenvalue() const;
};

/// Damped Newton from u0 = 0.
SolveReport newton_solve(const SolitonProblem& p, const SolveOptions& opts = {});
/// Damped Newton from u0. For λ = 0 the ∂∂̄ kernel part of u0 is removed
/// first.
/// Throws LinearSolveStalled or LineSearchFailed; an inadmissible u0 is a
/// DomainError.
SolveReport newton_solve(const SolitonProblem& p, const RealField& u0, const SolveOptions& opts = {});

struct ContinuationFailure {
  double eps = 0.0;
  std::string stage;  // "linear_solve", "line_search", "metric", "iterations"
  std::string message;
};

struct ContinuationResult {
  std::vector<SolveReport> reports;
  std::optional<ContinuationFailure> failure;
  /// The non-converged solve when the failure stage is "iterations".
  std::optional<SolveReport> last_attempt;
};

/// Throws DomainError unless the schedule is strictly decreasing and every
/// entry is >= floor.
void validate_schedule(const std::vector<double>& schedule, double floor = 1e-3);

/// Solves along the schedule, warm-starting each ε from the previous
/// solution. F stays fixed and c_ε is recomputed per ε. Stops at the first
/// failure and returns the completed prefix together with the failure.
ContinuationResult continuation_solve(const SolitonProblem& base, const std::vector<double>& schedule,
                                      const SolveOptions& opts = {}, double schedule_floor = 1e-3);
/// Same, starting the first solve from u0.
ContinuationResult continuation_solve(const SolitonProblem& base, const std::vector<double>& schedule,
                                      const RealField& u0, const SolveOptions& opts = {},
                                      double schedule_floor = 1e-3);

/// Builds F so that u* solves the equation up to the additive constant
/// forced by the normalization: the stored exact solution is u* + c_ε/λ for
/// λ < 0 and u* − mean(u*) (with shift −c_ε) for λ = 0.
SolitonProblem manufactured_problem(const RealField& u_star, const RealField& phi, const HoloField& Z,
                                    double lambda, double eps, const BandLimitGuard& guard = {});

}  // namespace vsoliton

#pragma once

// Flat local model ℂ² with ω = Σ dx^k ∧ dy^k and the diagonal circle action
// e^{iθ}(z¹, z²). Real coordinates are ordered (x¹, y¹, x², y²).
//
// Conventions: V = d/dθ e^{iθ}z = iz, J is multiplication by i, so JV = −z.
// The moment map μ = ½|z|² satisfies i_V ω = −dμ. Along U = JV/|V|² one has
// dμ(U) = −1, hence μ(φ_t(p)) = μ(p) + c t with c = kTransportConstant.

#include <array>
#include <cstdint>

#include "vsoliton/grid.hpp"

namespace vsoliton {

inline constexpr double kAnnulusInner = 1e-6;
inline constexpr double kTransportConstant = -1.0;

using RealVec4 = std::array<double, 4>;

class LocalModelPoint {
 public:
  /// Throws DomainError unless |z|² >= kAnnulusInner.
  LocalModelPoint(cplx z1, cplx z2);

  cplx z1() const { return z_[0]; }
  cplx z2() const { return z_[1]; }
  cplx operator[](int k) const { return z_[static_cast<std::size_t>(k)]; }
  double norm_sq() const { return std::norm(z_[0]) + std::norm(z_[1]); }
  RealVec4 real() const;
  LocalModelPoint rotated(double theta) const;

 private:
  std::array<cplx, 2> z_;
};

/// μ = (weight/2)|z|², the moment map of the action e^{i weight θ}.
double moment_map(const LocalModelPoint& p, double weight = 1.0);

/// Generator of e^{i weight θ} and J applied to it, in real coordinates.
RealVec4 generator_V(const LocalModelPoint& p, double weight = 1.0);
RealVec4 generator_JV(const LocalModelPoint& p, double weight = 1.0);

/// ω(a, b) for the flat form.
double omega(const RealVec4& a, const RealVec4& b);

/// max_a |dμ(e_a) + ω(V, e_a)| with dμ from central differences of μ and V
/// from central differences of the group action, both with step h.
/// Requires 1e-6 <= h <= 1e-2. The residual is O(h²).
double check_hamiltonian(const LocalModelPoint& p, double h, double weight = 1.0);

struct FlowResult {
  LocalModelPoint point;
  double dt = 0.0;     // step size of the accepted integration
  int halvings = 0;
};

/// RK4 integration of U = JV/|V|² up to time t. The step starts at dt and
/// is halved until two successive endpoints agree to tol. Throws
/// TrajectoryError if |z|² drops below kAnnulusInner.
FlowResult flow_U(const LocalModelPoint& p, double t, double dt = 0.05, double tol = 1e-13);

/// Orthogonal projection onto Q = (span{V, JV})^⊥.
RealVec4 horizontal_projection(const LocalModelPoint& p, const RealVec4& xi);

/// dw for the chart w = z²/z¹ of the quotient, as a complex number.
cplx chart_differential(const LocalModelPoint& p, const RealVec4& xi);

/// Scaled Fubini–Study metric 2τ Re(a b̄)/(1 + |w|²)² at chart point w.
double fubini_study(double tau, cplx w, cplx a, cplx b);

struct PointResidual {
  double metric = 0.0;      // max relative |g(U,W) − g_FS(dw U, dw W)|
  double projection = 0.0;  // idempotence and ω-orthogonality defect
  double gram_det = 0.0;    // Gram determinant of the pushed unit frame of Q
};

/// Compares g on horizontal pairs at p with the quotient metric at level
/// τ = μ(p). Throws DomainError when z¹ is too close to 0 for the chart.
PointResidual reduced_metric_residual(const LocalModelPoint& p);

struct ReducedMetricReport {
  double max_residual = 0.0;
  double max_projection_residual = 0.0;
  double min_gram_det = 0.0;
  int samples = 0;
  int resampled = 0;  // draws rejected near z¹ = 0
};

/// Samples points uniformly on μ⁻¹(τ) and collects the worst residuals.
ReducedMetricReport reduced_metric_check(double tau, int samples, std::uint64_t seed = 0);

}  // namespace vsoliton

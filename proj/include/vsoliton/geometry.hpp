#pragma once

// Kähler metrics g = δ + ∂∂̄ψ on the flat torus and their curvature.
//
// Volume convention: ∫ f ωⁿ is evaluated as ∫ f det(g) dLeb, i.e. ωⁿ/n! is
// identified with det(g) times Lebesgue measure and the factor n! is dropped
// everywhere. Every quantity in the library uses this one normalization.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "vsoliton/grid.hpp"

namespace vsoliton {

inline constexpr double kDefaultPositivityFloor = 1e-8;

class MetricField {
 public:
  /// Builds g = δ + ddbar(potential). Throws NonPositiveMetric when the
  /// smallest eigenvalue at some node is <= floor.
  explicit MetricField(RealField potential, double positivity_floor = kDefaultPositivityFloor);

  const GridSpec& grid() const { return potential_.grid(); }
  int n() const { return potential_.grid().n(); }
  std::size_t size() const { return potential_.size(); }

  /// Total potential ψ relative to the flat metric.
  const RealField& potential() const { return potential_; }
  const HermitianField& g() const { return g_; }
  const RealField& det() const { return det_; }
  Herm at(std::size_t node) const { return g_.at(node); }
  /// g^{i j̄} at one node.
  Herm inverse_at(std::size_t node) const { return g_.at(node).inverse(); }
  HermitianField inverse() const;
  double min_eigenvalue() const { return min_eig_; }
  std::size_t worst_node() const { return worst_node_; }

 private:
  RealField potential_;
  HermitianField g_;
  RealField det_;
  double min_eig_;
  std::size_t worst_node_;
};

/// g = δ + ∂∂̄φ. The band-limit guard is applied to φ.
MetricField assemble_metric(const RealField& phi, double positivity_floor = kDefaultPositivityFloor,
                            const BandLimitGuard& guard = {});

/// g̃ = g + ∂∂̄u.
MetricField perturb_metric(const MetricField& g, const RealField& u,
                           double positivity_floor = kDefaultPositivityFloor);

/// det g̃ / det g.
RealField det_ratio(const MetricField& g_tilde, const MetricField& g);

/// R_{k l̄} = −∂_k ∂_l̄ log det g.
HermitianField ricci(const MetricField& g);

/// Full curvature tensor R_{i j̄ k l̄} per node.
class CurvatureField {
 public:
  explicit CurvatureField(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  ComplexField& component(int i, int j, int k, int l) { return comps_[index(i, j, k, l)]; }
  const ComplexField& component(int i, int j, int k, int l) const { return comps_[index(i, j, k, l)]; }
  cplx at(std::size_t node, int i, int j, int k, int l) const { return comps_[index(i, j, k, l)][node]; }

  /// g^{i j̄} R_{i j̄ k l̄}.
  HermitianField contract_ricci(const MetricField& g) const;
  /// R_{i j̄ k l̄} Z^k Z̄^l, the form R(·,·,Z,Z̄).
  HermitianField contract_field(std::span<const cplx> Z) const;
  /// Largest violation of the Hermitian pair and Kähler swap symmetries.
  double symmetry_residual() const;
  double max_abs() const;

 private:
  std::size_t index(int i, int j, int k, int l) const;
  GridSpec grid_;
  std::vector<ComplexField> comps_;
};

/// R_{i j̄ k l̄} = −ψ_{i j̄ k l̄} + g^{s t̄} ψ_{i k t̄} ψ_{s j̄ l̄}.
CurvatureField curvature(const MetricField& g);

/// Δf = g^{i j̄} f_{i j̄}.
RealField laplacian(const MetricField& g, const RealField& f);

/// tr_ω ω̃ = g^{i j̄} g̃_{i j̄}.
RealField trace_metric(const MetricField& g, const MetricField& g_tilde);
/// Trace g^{i j̄} h_{i j̄} of an arbitrary Hermitian form.
RealField trace_metric(const MetricField& g, const HermitianField& form);

/// |∂f|²_g = g^{i j̄} f_i f_j̄ for real f.
RealField gradient_norm_sq(const MetricField& g, const RealField& f);

}  // namespace vsoliton

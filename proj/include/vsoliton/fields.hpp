#pragma once

// Constant holomorphic vector fields Z = JV + √−1 V on the torus, their
// norms and divergences, and pointwise identity checks.
//
// As a (1,0)-field Z = Z^k ∂/∂z^k. Writing z^k = x^k + i y^k, the real
// fields are
//   JV = Σ_k (Re Z^k / 2) ∂/∂x^k + (Im Z^k / 2) ∂/∂y^k
//   V  = Σ_k (Im Z^k / 2) ∂/∂x^k − (Re Z^k / 2) ∂/∂y^k
// so that Z(f) = Z^k f_k = JV(f) + i V(f) for every function f.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "vsoliton/geometry.hpp"
#include "vsoliton/grid.hpp"

namespace vsoliton {

class HoloField {
 public:
  /// One coefficient per complex dimension (n = 1 or 2).
  explicit HoloField(std::vector<cplx> coefficients);

  int n() const { return static_cast<int>(z_.size()); }
  std::span<const cplx> coefficients() const { return z_; }
  cplx operator[](int k) const { return z_[static_cast<std::size_t>(k)]; }
  bool is_zero() const;
  HoloField scaled(cplx a) const;

  /// Real components of V and JV along the 2n real axes.
  std::vector<double> V() const;
  std::vector<double> JV() const;

 private:
  std::vector<cplx> z_;
};

/// |Z|²_g = g_{k l̄} Z^k Z̄^l.
RealField z_norm_sq(const MetricField& g, const HoloField& Z);

/// div Z = ∂_i Z^i + Γ^i_{ik} Z^k; for constant Z this is Z^k g^{i l̄} ψ_{i k l̄}.
ComplexField divergence(const MetricField& g, const HoloField& Z);

/// Ric(Z, Z̄) = R_{k l̄} Z^k Z̄^l.
RealField ricci_zz(const MetricField& g, const HoloField& Z);

/// max |¼ u_{i j̄} Z^i Z̄^j − ¼ JV(JV(u))|. The two sides agree when u is
/// invariant along V; for other u the residual measures V(V(u)).
double check_vjv_identity(const RealField& u, const HoloField& Z);

struct DivRicciOptions {
  /// Test hook: differentiates div Z along Z instead of Z̄.
  bool corrupt_derivative = false;
};

/// max |Z̄(div Z) + Ric(Z, Z̄)|.
double check_div_ricci(const MetricField& g, const HoloField& Z, const DivRicciOptions& options = {});

/// ∂∂̄ log(|Z|²_g + ε) + R(Z, Z̄, ·, ·)/(|Z|²_g + ε) per node.
HermitianField lemma41_form(const MetricField& g, const HoloField& Z, double eps);
/// Minimum over nodes of the smallest eigenvalue of lemma41_form.
double lemma41_min_eig(const MetricField& g, const HoloField& Z, double eps);

/// Fourier modes of u that are not annihilated by V, largest first, with
/// coefficients above rel_tol times the largest coefficient.
std::vector<std::vector<int>> non_invariant_modes(const RealField& u, const HoloField& Z, double rel_tol = 1e-10,
                                                  std::size_t limit = 16);

/// Throws PreconditionError listing the offending modes unless u is
/// invariant along V.
void require_invariant(const RealField& u, const HoloField& Z, double rel_tol = 1e-10);

struct ZhuGap {
  double sup_zu = 0.0;    // sup |Z(u)|
  double imag_max = 0.0;  // sup |Im Z(u)| = sup |V(u)|
};

/// Z(u) = JV(u) for invariant u. Checks invariance first.
ZhuGap zhu_gap(const RealField& u, const HoloField& Z, double rel_tol = 1e-10);

/// |div Z|² − Ric(Z, Z̄).
RealField infimum_hypothesis(const MetricField& g, const HoloField& Z);

}  // namespace vsoliton

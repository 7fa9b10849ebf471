#pragma once

// Periodic grids on the real torus underlying C^n / Lambda, grid-sampled
// fields, and Fourier-spectral calculus on them.
//
// Real axes are ordered (x^1, y^1, x^2, y^2) with z^k = x^k + i y^k; axis
// 2k is x^{k+1} and axis 2k+1 is y^{k+1}. Nodes are stored row-major with the
// last real axis fastest.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "vsoliton/aligned.hpp"

namespace vsoliton {

using cplx = std::complex<double>;

class GridSpec {
 public:
  /// Throws DomainError unless n in {1,2}, N a power of two >= 16 and
  /// period > 0.
  GridSpec(int n, int N, double period = 2.0 * std::numbers::pi);

  int n() const { return n_; }
  int N() const { return N_; }
  double period() const { return period_; }
  int dims() const { return 2 * n_; }
  std::size_t size() const { return size_; }
  double spacing() const { return period_ / N_; }
  double cell_volume() const;
  /// Lebesgue volume of the torus, period^(2n).
  double volume() const;

  std::array<int, 4> unravel(std::size_t node) const;
  std::size_t ravel(const std::array<int, 4>& index) const;
  double coord(std::size_t node, int axis) const;

  bool operator==(const GridSpec& other) const = default;

 private:
  int n_;
  int N_;
  double period_;
  std::size_t size_;
};

void require_same_grid(const GridSpec& a, const GridSpec& b);

class RealField {
 public:
  explicit RealField(const GridSpec& grid, double fill = 0.0);
  RealField(const GridSpec& grid, std::span<const double> values);

  /// Samples f(x) where x holds the 2n real coordinates of a node.
  static RealField from_function(const GridSpec& grid,
                                 const std::function<double(std::span<const double>)>& f);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  RealField& operator+=(const RealField& other);
  RealField& operator-=(const RealField& other);
  RealField& operator*=(double s);
  RealField& operator+=(double s);

  double min() const;
  double max() const;
  double max_abs() const;
  double mean() const;
  /// Lowest flat index attaining the minimum / maximum.
  std::size_t argmin() const;
  std::size_t argmax() const;

 private:
  GridSpec grid_;
  AlignedVector<double> values_;
};

RealField operator+(RealField a, const RealField& b);
RealField operator-(RealField a, const RealField& b);
RealField operator*(double s, RealField a);
/// Pointwise product.
RealField hadamard(const RealField& a, const RealField& b);

class ComplexField {
 public:
  explicit ComplexField(const GridSpec& grid, cplx fill = {});
  explicit ComplexField(const RealField& re);
  ComplexField(const RealField& re, const RealField& im);

  static ComplexField from_function(const GridSpec& grid,
                                    const std::function<cplx(std::span<const double>)>& f);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  cplx operator[](std::size_t i) const { return values_[i]; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  std::span<cplx> values() { return values_; }
  std::span<const cplx> values() const { return values_; }
  cplx* data() { return values_.data(); }
  const cplx* data() const { return values_.data(); }

  ComplexField& operator+=(const ComplexField& other);
  ComplexField& operator-=(const ComplexField& other);
  ComplexField& operator*=(cplx s);

  RealField real() const;
  RealField imag() const;
  ComplexField conj() const;
  double max_abs() const;
  double max_abs_imag() const;
  /// Returns the real part; throws DomainError when an imaginary part
  /// exceeds rel_tol * max magnitude.
  RealField to_real(double rel_tol = 1e-12) const;

 private:
  GridSpec grid_;
  AlignedVector<cplx> values_;
};

ComplexField operator+(ComplexField a, const ComplexField& b);
ComplexField operator-(ComplexField a, const ComplexField& b);
ComplexField operator*(cplx s, ComplexField a);

/// Hermitian n x n matrix for n in {1,2}. Entry (i,j) stands for h_{i j̄};
/// the storage makes h_{j ī} = conj(h_{i j̄}) hold exactly.
struct Herm {
  int n = 1;
  double a = 0.0;  // (0,0)
  double d = 0.0;  // (1,1), unused for n = 1
  cplx b{};        // (0,1), unused for n = 1

  static Herm identity(int n);
  cplx entry(int i, int j) const;
  double trace() const { return n == 1 ? a : a + d; }
  double det() const;
  /// Inverse in the upper-index convention: h^{i j̄} h_{k j̄} = δ^i_k.
  Herm inverse() const;
  double min_eigenvalue() const;
  double max_eigenvalue() const;
  /// sum_{ij} this_{i j̄} other_{i j̄}; real for Hermitian arguments.
  double contract(const Herm& other) const;
  /// sum_{kl} this_{k l̄} v^k conj(v^l).
  double quad(std::span<const cplx> v) const;

  Herm operator+(const Herm& o) const;
  Herm operator-(const Herm& o) const;
  Herm operator*(double s) const;
};

/// Outer product v^i conj(v^j) as a Herm.
Herm outer(std::span<const cplx> v);

/// Grid-sampled Hermitian (1,1)-tensor. Stores the independent real
/// components: n = 1 -> {h11}; n = 2 -> {h11, h22, Re h12, Im h12}.
class HermitianField {
 public:
  explicit HermitianField(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  std::size_t size() const { return grid_.size(); }
  Herm at(std::size_t node) const;
  void set(std::size_t node, const Herm& h);
  cplx entry(std::size_t node, int i, int j) const;
  /// Field of the (i,j) entry.
  ComplexField component(int i, int j) const;

  std::size_t num_components() const { return comps_.size(); }
  RealField& raw(std::size_t c) { return comps_[c]; }
  const RealField& raw(std::size_t c) const { return comps_[c]; }

  double max_abs() const;

 private:
  GridSpec grid_;
  std::vector<RealField> comps_;
};

// ---------------------------------------------------------------------------
// Spectral calculus. Derivatives are exact on band-limited input; the
// Nyquist mode is treated as wavenumber zero.

/// Real partial derivative along real axis 0 <= axis < 2n.
RealField partial(const RealField& f, int axis);
/// Derivative along a constant real direction (one weight per real axis).
RealField directional(const RealField& f, std::span<const double> direction);

/// Wirtinger derivative ∂/∂z^k = (∂_x - i ∂_y)/2, k < n.
ComplexField d_dz(const RealField& f, int axis);
ComplexField d_dz(const ComplexField& f, int axis);
/// ∂/∂z̄^k = (∂_x + i ∂_y)/2.
ComplexField d_dzbar(const RealField& f, int axis);
ComplexField d_dzbar(const ComplexField& f, int axis);

/// Mixed Hessian f_{i j̄}.
HermitianField ddbar(const RealField& f);
/// Throws DomainError for a field with non-negligible imaginary part.
HermitianField ddbar(const ComplexField& f);

/// Trapezoidal (spectrally exact) quadrature of field * volume.
/// Throws DomainError when volume <= 0 anywhere.
double integrate(const RealField& field, const RealField& volume);
cplx integrate(const ComplexField& field, const RealField& volume);
/// Plain quadrature with unit density.
double integrate(const RealField& field);

/// Normalised Fourier coefficients c_m with f(x) = sum_m c_m exp(i k_m.x),
/// in FFT order.
std::vector<cplx> fourier_coefficients(const ComplexField& f);

/// Signed integer mode of FFT index i on an N-point axis.
int signed_mode(int i, int N);

struct BandLimitGuard {
  bool enabled = true;
  /// Modes with |m_a| > cutoff_fraction * N on any axis count as aliased.
  double cutoff_fraction = 1.0 / 3.0;
  /// Relative to the largest coefficient.
  double rel_tol = 1e-10;
};

/// Largest coefficient magnitude above the cutoff, relative to the largest
/// coefficient overall.
double aliased_fraction(const RealField& f, double cutoff_fraction);
/// Throws AliasingError when the guard is enabled and violated.
void check_band_limit(const RealField& f, const BandLimitGuard& guard, const char* what);

struct RandomFieldOptions {
  int max_mode = 3;
  int terms = 6;
  double amplitude = 0.1;  // target max |f|
  /// When non-empty (length 2n), only integer modes m with
  /// sum_a m_a * orthogonal_to[a] == 0 are drawn.
  std::vector<double> orthogonal_to;
};

/// Random real trigonometric polynomial scaled to the requested max |f|.
RealField random_band_limited(const GridSpec& grid, std::mt19937_64& rng,
                              const RandomFieldOptions& options = {});

}  // namespace vsoliton

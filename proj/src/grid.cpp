#include "vsoliton/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spectral.hpp"
#include "vsoliton/errors.hpp"

namespace vsoliton {

// ---------------------------------------------------------------------------
// GridSpec

GridSpec::GridSpec(int n, int N, double period) : n_(n), N_(N), period_(period), size_(1) {
  if (n != 1 && n != 2) throw DomainError("grid: complex dimension must be 1 or 2, got " + std::to_string(n));
  if (N < 16 || (N & (N - 1)) != 0) {
    throw DomainError("grid: samples per axis must be a power of two >= 16, got " + std::to_string(N));
  }
  if (!(period > 0.0) || !std::isfinite(period)) throw DomainError("grid: period must be positive");
  for (int a = 0; a < dims(); ++a) size_ *= static_cast<std::size_t>(N);
}

double GridSpec::cell_volume() const { return std::pow(spacing(), dims()); }

double GridSpec::volume() const { return std::pow(period_, dims()); }

std::array<int, 4> GridSpec::unravel(std::size_t node) const {
  std::array<int, 4> idx{0, 0, 0, 0};
  for (int a = dims() - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(node % static_cast<std::size_t>(N_));
    node /= static_cast<std::size_t>(N_);
  }
  return idx;
}

std::size_t GridSpec::ravel(const std::array<int, 4>& index) const {
  std::size_t node = 0;
  for (int a = 0; a < dims(); ++a) node = node * static_cast<std::size_t>(N_) + static_cast<std::size_t>(index[a]);
  return node;
}

double GridSpec::coord(std::size_t node, int axis) const {
  if (axis < 0 || axis >= dims()) throw IndexError("grid: real axis out of range");
  return unravel(node)[axis] * spacing();
}

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw DomainError("fields live on different grids");
}

// ---------------------------------------------------------------------------
// RealField

RealField::RealField(const GridSpec& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

RealField::RealField(const GridSpec& grid, std::span<const double> values)
    : grid_(grid), values_(values.begin(), values.end()) {
  if (values.size() != grid.size()) throw DomainError("field length does not match grid size");
}

RealField RealField::from_function(const GridSpec& grid,
                                   const std::function<double(std::span<const double>)>& f) {
  RealField out(grid);
  const int d = grid.dims();
  const double h = grid.spacing();
  double x[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto idx = grid.unravel(i);
    for (int a = 0; a < d; ++a) x[a] = idx[a] * h;
    out[i] = f(std::span<const double>(x, static_cast<std::size_t>(d)));
  }
  return out;
}

RealField& RealField::operator+=(const RealField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

RealField& RealField::operator-=(const RealField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

RealField& RealField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

RealField& RealField::operator+=(double s) {
  for (double& v : values_) v += s;
  return *this;
}

double RealField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double RealField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double RealField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double RealField::mean() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

std::size_t RealField::argmin() const {
  return static_cast<std::size_t>(std::min_element(values_.begin(), values_.end()) - values_.begin());
}

std::size_t RealField::argmax() const {
  return static_cast<std::size_t>(std::max_element(values_.begin(), values_.end()) - values_.begin());
}

RealField operator+(RealField a, const RealField& b) { return a += b; }
RealField operator-(RealField a, const RealField& b) { return a -= b; }
RealField operator*(double s, RealField a) { return a *= s; }

RealField hadamard(const RealField& a, const RealField& b) {
  require_same_grid(a.grid(), b.grid());
  RealField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

// ---------------------------------------------------------------------------
// ComplexField

ComplexField::ComplexField(const GridSpec& grid, cplx fill) : grid_(grid), values_(grid.size(), fill) {}

ComplexField::ComplexField(const RealField& re) : grid_(re.grid()), values_(re.size()) {
  for (std::size_t i = 0; i < re.size(); ++i) values_[i] = re[i];
}

ComplexField::ComplexField(const RealField& re, const RealField& im) : grid_(re.grid()), values_(re.size()) {
  require_same_grid(re.grid(), im.grid());
  for (std::size_t i = 0; i < re.size(); ++i) values_[i] = cplx(re[i], im[i]);
}

ComplexField ComplexField::from_function(const GridSpec& grid,
                                         const std::function<cplx(std::span<const double>)>& f) {
  ComplexField out(grid);
  const int d = grid.dims();
  const double h = grid.spacing();
  double x[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto idx = grid.unravel(i);
    for (int a = 0; a < d; ++a) x[a] = idx[a] * h;
    out[i] = f(std::span<const double>(x, static_cast<std::size_t>(d)));
  }
  return out;
}

ComplexField& ComplexField::operator+=(const ComplexField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator-=(const ComplexField& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ComplexField& ComplexField::operator*=(cplx s) {
  for (cplx& v : values_) v *= s;
  return *this;
}

RealField ComplexField::real() const {
  RealField out(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i].real();
  return out;
}

RealField ComplexField::imag() const {
  RealField out(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i].imag();
  return out;
}

ComplexField ComplexField::conj() const {
  ComplexField out(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = std::conj(values_[i]);
  return out;
}

double ComplexField::max_abs() const {
  double m = 0.0;
  for (cplx v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ComplexField::max_abs_imag() const {
  double m = 0.0;
  for (cplx v : values_) m = std::max(m, std::abs(v.imag()));
  return m;
}

RealField ComplexField::to_real(double rel_tol) const {
  const double scale = max_abs();
  if (max_abs_imag() > rel_tol * scale) {
    std::ostringstream os;
    os << "field is not real: max |imag| = " << max_abs_imag() << " exceeds " << rel_tol << " * " << scale;
    throw DomainError(os.str());
  }
  return real();
}

ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }
ComplexField operator*(cplx s, ComplexField a) { return a *= s; }

// ---------------------------------------------------------------------------
// Herm

Herm Herm::identity(int n) {
  Herm h;
  h.n = n;
  h.a = 1.0;
  h.d = (n == 2) ? 1.0 : 0.0;
  return h;
}

cplx Herm::entry(int i, int j) const {
  if (i == 0 && j == 0) return a;
  if (n == 1) throw IndexError("Herm: index out of range");
  if (i == 1 && j == 1) return d;
  if (i == 0 && j == 1) return b;
  if (i == 1 && j == 0) return std::conj(b);
  throw IndexError("Herm: index out of range");
}

double Herm::det() const { return n == 1 ? a : a * d - std::norm(b); }

Herm Herm::inverse() const {
  Herm out;
  out.n = n;
  if (n == 1) {
    out.a = 1.0 / a;
    return out;
  }
  const double det_value = det();
  out.a = d / det_value;
  out.d = a / det_value;
  out.b = -std::conj(b) / det_value;
  return out;
}

double Herm::min_eigenvalue() const {
  if (n == 1) return a;
  const double mid = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), std::abs(b));
  return mid - rad;
}

double Herm::max_eigenvalue() const {
  if (n == 1) return a;
  return 0.5 * (a + d) + std::hypot(0.5 * (a - d), std::abs(b));
}

double Herm::contract(const Herm& o) const {
  if (n == 1) return a * o.a;
  return a * o.a + d * o.d + 2.0 * (b * o.b).real();
}

double Herm::quad(std::span<const cplx> v) const {
  if (n == 1) return a * std::norm(v[0]);
  return a * std::norm(v[0]) + d * std::norm(v[1]) + 2.0 * (b * v[0] * std::conj(v[1])).real();
}

Herm Herm::operator+(const Herm& o) const { return Herm{n, a + o.a, d + o.d, b + o.b}; }
Herm Herm::operator-(const Herm& o) const { return Herm{n, a - o.a, d - o.d, b - o.b}; }
Herm Herm::operator*(double s) const { return Herm{n, a * s, d * s, b * s}; }

Herm outer(std::span<const cplx> v) {
  Herm h;
  h.n = static_cast<int>(v.size());
  h.a = std::norm(v[0]);
  if (h.n == 2) {
    h.d = std::norm(v[1]);
    h.b = v[0] * std::conj(v[1]);
  }
  return h;
}

// ---------------------------------------------------------------------------
// HermitianField

HermitianField::HermitianField(const GridSpec& grid) : grid_(grid) {
  const std::size_t count = grid.n() == 1 ? 1 : 4;
  comps_.reserve(count);
  for (std::size_t c = 0; c < count; ++c) comps_.emplace_back(grid);
}

Herm HermitianField::at(std::size_t node) const {
  Herm h;
  h.n = grid_.n();
  h.a = comps_[0][node];
  if (h.n == 2) {
    h.d = comps_[1][node];
    h.b = cplx(comps_[2][node], comps_[3][node]);
  }
  return h;
}

void HermitianField::set(std::size_t node, const Herm& h) {
  comps_[0][node] = h.a;
  if (grid_.n() == 2) {
    comps_[1][node] = h.d;
    comps_[2][node] = h.b.real();
    comps_[3][node] = h.b.imag();
  }
}

cplx HermitianField::entry(std::size_t node, int i, int j) const {
  if (i < 0 || j < 0 || i >= n() || j >= n()) throw IndexError("HermitianField: index out of range");
  return at(node).entry(i, j);
}

ComplexField HermitianField::component(int i, int j) const {
  if (i < 0 || j < 0 || i >= n() || j >= n()) throw IndexError("HermitianField: index out of range");
  ComplexField out(grid_);
  for (std::size_t node = 0; node < size(); ++node) out[node] = at(node).entry(i, j);
  return out;
}

double HermitianField::max_abs() const {
  double m = 0.0;
  for (std::size_t node = 0; node < size(); ++node) {
    Herm h = at(node);
    m = std::max({m, std::abs(h.a), std::abs(h.d), std::abs(h.b)});
  }
  return m;
}

// ---------------------------------------------------------------------------
// Spectral calculus

namespace {

void require_axis(const GridSpec& grid, int axis, int limit, const char* what) {
  if (axis < 0 || axis >= limit) {
    throw IndexError(std::string(what) + ": axis " + std::to_string(axis) + " out of range for n = " +
                     std::to_string(grid.n()));
  }
}

}  // namespace

RealField partial(const RealField& f, int axis) {
  require_axis(f.grid(), axis, f.grid().dims(), "partial");
  auto fhat = spectral::forward_real(f);
  return spectral::inverse_real(f.grid(), fhat, [axis](const double* k) { return cplx(0.0, k[axis]); });
}

RealField directional(const RealField& f, std::span<const double> direction) {
  const int d = f.grid().dims();
  if (static_cast<int>(direction.size()) != d) throw DomainError("directional: direction length must be 2n");
  auto fhat = spectral::forward_real(f);
  return spectral::inverse_real(f.grid(), fhat, [&](const double* k) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += direction[a] * k[a];
    return cplx(0.0, s);
  });
}

ComplexField d_dz(const RealField& f, int axis) {
  require_axis(f.grid(), axis, f.grid().n(), "d_dz");
  auto fhat = spectral::forward_real(f);
  const int ax = 2 * axis;
  const int ay = 2 * axis + 1;
  RealField re = spectral::inverse_real(f.grid(), fhat, [ax](const double* k) { return cplx(0.0, 0.5 * k[ax]); });
  RealField im = spectral::inverse_real(f.grid(), fhat, [ay](const double* k) { return cplx(0.0, -0.5 * k[ay]); });
  return ComplexField(re, im);
}

ComplexField d_dzbar(const RealField& f, int axis) {
  require_axis(f.grid(), axis, f.grid().n(), "d_dzbar");
  auto fhat = spectral::forward_real(f);
  const int ax = 2 * axis;
  const int ay = 2 * axis + 1;
  RealField re = spectral::inverse_real(f.grid(), fhat, [ax](const double* k) { return cplx(0.0, 0.5 * k[ax]); });
  RealField im = spectral::inverse_real(f.grid(), fhat, [ay](const double* k) { return cplx(0.0, 0.5 * k[ay]); });
  return ComplexField(re, im);
}

ComplexField d_dz(const ComplexField& f, int axis) {
  require_axis(f.grid(), axis, f.grid().n(), "d_dz");
  auto fhat = spectral::forward_complex(f);
  return spectral::inverse_complex(f.grid(), fhat, [axis](const double* k) { return spectral::dz_symbol(k, axis); });
}

ComplexField d_dzbar(const ComplexField& f, int axis) {
  require_axis(f.grid(), axis, f.grid().n(), "d_dzbar");
  auto fhat = spectral::forward_complex(f);
  return spectral::inverse_complex(f.grid(), fhat,
                                   [axis](const double* k) { return spectral::dzbar_symbol(k, axis); });
}

HermitianField ddbar(const RealField& f) {
  auto fhat = spectral::forward_real(f);
  return spectral::ddbar_from_spectrum(f.grid(), fhat);
}

HermitianField ddbar(const ComplexField& f) { return ddbar(f.to_real(1e-12)); }

namespace {

void require_positive_volume(const RealField& volume) {
  for (std::size_t i = 0; i < volume.size(); ++i) {
    if (!(volume[i] > 0.0)) {
      throw DomainError("integrate: volume density must be strictly positive (node " + std::to_string(i) + ")");
    }
  }
}

}  // namespace

double integrate(const RealField& field, const RealField& volume) {
  require_same_grid(field.grid(), volume.grid());
  require_positive_volume(volume);
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) s += field[i] * volume[i];
  return s * field.grid().cell_volume();
}

cplx integrate(const ComplexField& field, const RealField& volume) {
  require_same_grid(field.grid(), volume.grid());
  require_positive_volume(volume);
  cplx s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) s += field[i] * volume[i];
  return s * field.grid().cell_volume();
}

double integrate(const RealField& field) {
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) s += field[i];
  return s * field.grid().cell_volume();
}

std::vector<cplx> fourier_coefficients(const ComplexField& f) {
  auto fhat = spectral::forward_complex(f);
  const double scale = 1.0 / static_cast<double>(f.size());
  std::vector<cplx> out(fhat.size());
  for (std::size_t i = 0; i < fhat.size(); ++i) out[i] = fhat[i] * scale;
  return out;
}

int signed_mode(int i, int N) { return (2 * i <= N) ? i : i - N; }

double aliased_fraction(const RealField& f, double cutoff_fraction) {
  auto fhat = spectral::forward_real(f);
  const double cutoff = cutoff_fraction * f.grid().N();
  const int d = f.grid().dims();
  double largest = 0.0;
  double aliased = 0.0;
  spectral::for_each_half_mode(f.grid(), [&](std::size_t i, const int* m) {
    const double mag = std::abs(fhat[i]);
    largest = std::max(largest, mag);
    for (int a = 0; a < d; ++a) {
      if (std::abs(m[a]) > cutoff) {
        aliased = std::max(aliased, mag);
        break;
      }
    }
  });
  return largest > 0.0 ? aliased / largest : 0.0;
}

void check_band_limit(const RealField& f, const BandLimitGuard& guard, const char* what) {
  if (!guard.enabled) return;
  const double frac = aliased_fraction(f, guard.cutoff_fraction);
  if (frac > guard.rel_tol) {
    std::ostringstream os;
    os << what << ": Fourier content above " << guard.cutoff_fraction << " N (relative size " << frac
       << ") would alias in nonlinear products";
    throw AliasingError(os.str());
  }
}

RealField random_band_limited(const GridSpec& grid, std::mt19937_64& rng, const RandomFieldOptions& options) {
  const int d = grid.dims();
  if (!options.orthogonal_to.empty() && static_cast<int>(options.orthogonal_to.size()) != d) {
    throw DomainError("random_band_limited: orthogonal_to must have length 2n");
  }
  std::uniform_int_distribution<int> mode_dist(-options.max_mode, options.max_mode);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

  struct Term {
    std::array<int, 4> m;
    double coef;
    double phase;
  };
  std::vector<Term> terms;
  int attempts = 0;
  while (static_cast<int>(terms.size()) < options.terms) {
    if (++attempts > 100000) throw DomainError("random_band_limited: no admissible modes for the constraint");
    Term t{{0, 0, 0, 0}, unit(rng), phase_dist(rng)};
    bool zero = true;
    for (int a = 0; a < d; ++a) {
      t.m[a] = mode_dist(rng);
      zero = zero && t.m[a] == 0;
    }
    if (zero) continue;
    if (!options.orthogonal_to.empty()) {
      double dot = 0.0;
      double scale = 0.0;
      for (int a = 0; a < d; ++a) {
        dot += t.m[a] * options.orthogonal_to[a];
        scale += std::abs(options.orthogonal_to[a]);
      }
      if (std::abs(dot) > 1e-12 * scale) continue;
    }
    terms.push_back(t);
  }

  const double base = 2.0 * std::numbers::pi / grid.period();
  RealField out = RealField::from_function(grid, [&](std::span<const double> x) {
    double s = 0.0;
    for (const Term& t : terms) {
      double arg = t.phase;
      for (int a = 0; a < d; ++a) arg += base * t.m[a] * x[a];
      s += t.coef * std::cos(arg);
    }
    return s;
  });
  const double peak = out.max_abs();
  if (peak > 0.0) out *= options.amplitude / peak;
  return out;
}

}  // namespace vsoliton

#pragma once

// FFT plumbing shared by the spectral operators. Private to the library.

#include <array>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "vsoliton/aligned.hpp"
#include "vsoliton/grid.hpp"

namespace vsoliton::spectral {

using Spectrum = AlignedVector<cplx>;

/// Number of coefficients of the real-to-complex half spectrum.
std::size_t half_size(const GridSpec& grid);

/// Cached FFTW plans for one (n, N) shape. Plans are created under a global
/// lock; execution uses the new-array interface and is thread-safe.
class Plans {
 public:
  static const Plans& get(const GridSpec& grid);
  ~Plans();

  void r2c(const double* in, cplx* out) const;
  /// Destroys `in`.
  void c2r(cplx* in, double* out) const;
  void forward(const cplx* in, cplx* out) const;
  void backward(const cplx* in, cplx* out) const;

  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;

 private:
  explicit Plans(const GridSpec& grid);
  struct Impl;
  Impl* impl_;
};

/// Wavenumbers 2*pi*m/period for each FFT index of one axis; the Nyquist
/// index maps to zero.
std::vector<double> axis_wavenumbers(const GridSpec& grid);

/// Calls f(index, k) for every coefficient of the half spectrum, where k
/// points at the 2n wavenumbers of that coefficient.
template <class F>
void for_each_half(const GridSpec& grid, F&& f) {
  const int d = grid.dims();
  const int N = grid.N();
  const int H = N / 2 + 1;
  const std::vector<double> waves = axis_wavenumbers(grid);
  std::size_t outer = 1;
  for (int a = 0; a + 1 < d; ++a) outer *= static_cast<std::size_t>(N);
  double k[4] = {0, 0, 0, 0};
  std::size_t idx = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t rem = o;
    for (int a = d - 2; a >= 0; --a) {
      k[a] = waves[rem % N];
      rem /= N;
    }
    for (int j = 0; j < H; ++j) {
      k[d - 1] = waves[j];
      f(idx++, static_cast<const double*>(k));
    }
  }
}

/// Same over the full complex spectrum.
template <class F>
void for_each_full(const GridSpec& grid, F&& f) {
  const int d = grid.dims();
  const int N = grid.N();
  const std::vector<double> waves = axis_wavenumbers(grid);
  std::size_t outer = 1;
  for (int a = 0; a + 1 < d; ++a) outer *= static_cast<std::size_t>(N);
  double k[4] = {0, 0, 0, 0};
  std::size_t idx = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t rem = o;
    for (int a = d - 2; a >= 0; --a) {
      k[a] = waves[rem % N];
      rem /= N;
    }
    for (int j = 0; j < N; ++j) {
      k[d - 1] = waves[j];
      f(idx++, static_cast<const double*>(k));
    }
  }
}

/// Calls f(index, m) over the half spectrum with the signed integer modes
/// of each coefficient (the Nyquist index reports +N/2).
template <class F>
void for_each_half_mode(const GridSpec& grid, F&& f) {
  const int d = grid.dims();
  const int N = grid.N();
  const int H = N / 2 + 1;
  std::size_t outer = 1;
  for (int a = 0; a + 1 < d; ++a) outer *= static_cast<std::size_t>(N);
  int m[4] = {0, 0, 0, 0};
  std::size_t idx = 0;
  for (std::size_t o = 0; o < outer; ++o) {
    std::size_t rem = o;
    for (int a = d - 2; a >= 0; --a) {
      m[a] = signed_mode(static_cast<int>(rem % N), N);
      rem /= N;
    }
    for (int j = 0; j < H; ++j) {
      m[d - 1] = j;
      f(idx++, static_cast<const int*>(m));
    }
  }
}

Spectrum forward_real(const RealField& f);
Spectrum forward_complex(const ComplexField& f);

/// out = IFFT(sym(k) * fhat) for a Hermitian symbol (real output).
/// `scratch` must have half_size elements.
template <class Sym>
void inverse_real_into(const GridSpec& grid, const Spectrum& fhat, Sym&& sym, Spectrum& scratch,
                       double* out) {
  const double scale = 1.0 / static_cast<double>(grid.size());
  for_each_half(grid, [&](std::size_t i, const double* k) { scratch[i] = fhat[i] * (sym(k) * scale); });
  Plans::get(grid).c2r(scratch.data(), out);
}

template <class Sym>
RealField inverse_real(const GridSpec& grid, const Spectrum& fhat, Sym&& sym) {
  Spectrum scratch(fhat.size());
  RealField out(grid);
  inverse_real_into(grid, fhat, sym, scratch, out.data());
  return out;
}

/// IFFT(sym(k) * fhat) over the full spectrum.
template <class Sym>
ComplexField inverse_complex(const GridSpec& grid, const Spectrum& fhat, Sym&& sym) {
  const double scale = 1.0 / static_cast<double>(grid.size());
  Spectrum scratch(fhat.size());
  for_each_full(grid, [&](std::size_t i, const double* k) { scratch[i] = fhat[i] * (sym(k) * scale); });
  ComplexField out(grid);
  Plans::get(grid).backward(scratch.data(), out.data());
  return out;
}

/// Symbol of ∂/∂z^j: (i/2)(kx - i ky).
inline cplx dz_symbol(const double* k, int j) {
  return cplx(0.0, 0.5) * cplx(k[2 * j], -k[2 * j + 1]);
}
/// Symbol of ∂/∂z̄^j: (i/2)(kx + i ky).
inline cplx dzbar_symbol(const double* k, int j) {
  return cplx(0.0, 0.5) * cplx(k[2 * j], k[2 * j + 1]);
}

/// Real symbols of the independent ddbar components.
/// Components: n = 1 -> {11}; n = 2 -> {11, 22, Re 12, Im 12}.
inline double ddbar_component_symbol(const double* k, int c) {
  switch (c) {
    case 0: return -0.25 * (k[0] * k[0] + k[1] * k[1]);
    case 1: return -0.25 * (k[2] * k[2] + k[3] * k[3]);
    case 2: return -0.25 * (k[0] * k[2] + k[1] * k[3]);
    default: return -0.25 * (k[0] * k[3] - k[1] * k[2]);
  }
}

/// Mixed Wirtinger derivative ∂_{holo...} ∂̄_{anti...} of a field given its
/// full complex spectrum.
ComplexField wirtinger(const GridSpec& grid, const Spectrum& full, std::initializer_list<int> holo,
                       std::initializer_list<int> anti);

/// Writes the independent ddbar components of a real field given its half
/// spectrum.
HermitianField ddbar_from_spectrum(const GridSpec& grid, const Spectrum& fhat);

}  // namespace vsoliton::spectral

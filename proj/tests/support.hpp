#pragma once

// Shared helpers for the unit and acceptance tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "vsoliton/fields.hpp"
#include "vsoliton/geometry.hpp"
#include "vsoliton/grid.hpp"

namespace testsupport {

using vsoliton::ComplexField;
using vsoliton::cplx;
using vsoliton::GridSpec;
using vsoliton::Herm;
using vsoliton::HermitianField;
using vsoliton::RealField;

inline double max_diff(const RealField& a, const RealField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_diff(const HermitianField& a, const HermitianField& b) {
  double m = 0.0;
  for (std::size_t c = 0; c < a.num_components(); ++c) m = std::max(m, max_diff(a.raw(c), b.raw(c)));
  return m;
}

inline Eigen::MatrixXcd to_matrix(const Herm& h) {
  Eigen::MatrixXcd m(h.n, h.n);
  for (int i = 0; i < h.n; ++i)
    for (int j = 0; j < h.n; ++j) m(i, j) = h.entry(i, j);
  return m;
}

/// Smallest eigenvalue from a general Hermitian eigensolver.
inline double eigen_min(const Herm& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(to_matrix(h));
  return es.eigenvalues().minCoeff();
}

/// Smooth random potential small enough to keep δ + ∂∂̄φ well inside the
/// Kähler cone.
inline RealField random_potential(const GridSpec& g, std::mt19937_64& rng, double amplitude = 0.1) {
  vsoliton::RandomFieldOptions opts;
  opts.max_mode = 2;
  opts.terms = 5;
  opts.amplitude = amplitude;
  return vsoliton::random_band_limited(g, rng, opts);
}

inline std::vector<cplx> random_z(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<cplx> z(n);
  for (auto& c : z) c = cplx(nd(rng), nd(rng));
  return z;
}

/// Constant field whose V direction is rational, so that V-invariant
/// trigonometric polynomials exist.
inline vsoliton::HoloField random_rational_z(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coef(-2, 2);
  std::uniform_real_distribution<double> scale(0.5, 1.5);
  const double s = scale(rng);
  std::vector<cplx> z(n);
  do {
    for (auto& c : z) c = s * cplx(coef(rng), coef(rng));
  } while (std::all_of(z.begin(), z.end(), [](cplx c) { return c == cplx(0.0); }));
  return vsoliton::HoloField(z);
}

inline RealField random_invariant(const GridSpec& g, const vsoliton::HoloField& Z, std::mt19937_64& rng,
                                  double amplitude = 0.1) {
  vsoliton::RandomFieldOptions opts;
  opts.max_mode = 2;
  opts.terms = 5;
  opts.amplitude = amplitude;
  opts.orthogonal_to = Z.V();
  return vsoliton::random_band_limited(g, rng, opts);
}

}  // namespace testsupport

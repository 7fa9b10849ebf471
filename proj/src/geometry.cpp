#include "vsoliton/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spectral.hpp"
#include "vsoliton/errors.hpp"

namespace vsoliton {

MetricField::MetricField(RealField potential, double positivity_floor)
    : potential_(std::move(potential)), g_(ddbar(potential_)), det_(potential_.grid()) {
  min_eig_ = std::numeric_limits<double>::infinity();
  worst_node_ = 0;
  const bool two = n() == 2;
  for (std::size_t node = 0; node < size(); ++node) {
    g_.raw(0)[node] += 1.0;
    if (two) g_.raw(1)[node] += 1.0;
    const Herm h = g_.at(node);
    const double lo = h.min_eigenvalue();
    if (lo < min_eig_) {
      min_eig_ = lo;
      worst_node_ = node;
    }
    det_[node] = h.det();
  }
  if (!(min_eig_ > positivity_floor)) throw NonPositiveMetric(worst_node_, min_eig_, positivity_floor);
}

HermitianField MetricField::inverse() const {
  HermitianField out(grid());
  for (std::size_t node = 0; node < size(); ++node) out.set(node, inverse_at(node));
  return out;
}

MetricField assemble_metric(const RealField& phi, double positivity_floor, const BandLimitGuard& guard) {
  check_band_limit(phi, guard, "assemble_metric");
  return MetricField(phi, positivity_floor);
}

MetricField perturb_metric(const MetricField& g, const RealField& u, double positivity_floor) {
  return MetricField(g.potential() + u, positivity_floor);
}

RealField det_ratio(const MetricField& g_tilde, const MetricField& g) {
  require_same_grid(g_tilde.grid(), g.grid());
  RealField out(g.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g_tilde.det()[i] / g.det()[i];
  return out;
}

HermitianField ricci(const MetricField& g) {
  RealField log_det(g.grid());
  for (std::size_t i = 0; i < log_det.size(); ++i) log_det[i] = std::log(g.det()[i]);
  HermitianField r = ddbar(log_det);
  for (std::size_t c = 0; c < r.num_components(); ++c) r.raw(c) *= -1.0;
  return r;
}

// ---------------------------------------------------------------------------
// Curvature

CurvatureField::CurvatureField(const GridSpec& grid) : grid_(grid) {
  const int n = grid.n();
  comps_.assign(static_cast<std::size_t>(n * n * n * n), ComplexField(grid));
}

std::size_t CurvatureField::index(int i, int j, int k, int l) const {
  const int n = grid_.n();
  if (std::min({i, j, k, l}) < 0 || std::max({i, j, k, l}) >= n) throw IndexError("curvature index out of range");
  return static_cast<std::size_t>(((i * n + j) * n + k) * n + l);
}

HermitianField CurvatureField::contract_ricci(const MetricField& g) const {
  const int n = grid_.n();
  HermitianField out(grid_);
  for (std::size_t node = 0; node < grid_.size(); ++node) {
    const Herm inv = g.inverse_at(node);
    Herm r;
    r.n = n;
    for (int k = 0; k < n; ++k) {
      for (int l = k; l < n; ++l) {
        cplx s = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) s += inv.entry(i, j) * at(node, i, j, k, l);
        if (k == l) {
          (k == 0 ? r.a : r.d) = s.real();
        } else {
          r.b = s;
        }
      }
    }
    out.set(node, r);
  }
  return out;
}

HermitianField CurvatureField::contract_field(std::span<const cplx> Z) const {
  const int n = grid_.n();
  HermitianField out(grid_);
  for (std::size_t node = 0; node < grid_.size(); ++node) {
    Herm r;
    r.n = n;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        cplx s = 0.0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) s += at(node, i, j, k, l) * Z[k] * std::conj(Z[l]);
        if (i == j) {
          (i == 0 ? r.a : r.d) = s.real();
        } else {
          r.b = s;
        }
      }
    }
    out.set(node, r);
  }
  return out;
}

double CurvatureField::symmetry_residual() const {
  const int n = grid_.n();
  double worst = 0.0;
  for (std::size_t node = 0; node < grid_.size(); ++node) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const cplx r = at(node, i, j, k, l);
            worst = std::max(worst, std::abs(r - std::conj(at(node, j, i, l, k))));
            worst = std::max(worst, std::abs(r - at(node, k, j, i, l)));
            worst = std::max(worst, std::abs(r - at(node, i, l, k, j)));
          }
  }
  return worst;
}

double CurvatureField::max_abs() const {
  double m = 0.0;
  for (const auto& c : comps_) m = std::max(m, c.max_abs());
  return m;
}

CurvatureField curvature(const MetricField& g) {
  const GridSpec& grid = g.grid();
  const int n = grid.n();
  spectral::Spectrum full = spectral::forward_complex(ComplexField(g.potential()));

  // T[i][k][t] = ψ_{i k t̄}, symmetric in (i, k).
  std::vector<ComplexField> third(static_cast<std::size_t>(n * n * n), ComplexField(grid));
  auto t_index = [n](int i, int k, int t) { return static_cast<std::size_t>((i * n + k) * n + t); };
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k)
      for (int t = 0; t < n; ++t) {
        third[t_index(i, k, t)] = spectral::wirtinger(grid, full, {i, k}, {t});
        if (k != i) third[t_index(k, i, t)] = third[t_index(i, k, t)];
      }

  CurvatureField R(grid);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          ComplexField& out = R.component(i, j, k, l);
          out = spectral::wirtinger(grid, full, {i, k}, {j, l});
          out *= -1.0;
        }

  for (std::size_t node = 0; node < grid.size(); ++node) {
    const Herm inv = g.inverse_at(node);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            cplx s = 0.0;
            for (int p = 0; p < n; ++p)
              for (int q = 0; q < n; ++q) {
                // ψ_{p j̄ l̄} = conj(ψ_{j l p̄})
                s += inv.entry(p, q) * third[t_index(i, k, q)][node] * std::conj(third[t_index(j, l, p)][node]);
              }
            R.component(i, j, k, l)[node] += s;
          }
  }
  return R;
}

RealField laplacian(const MetricField& g, const RealField& f) {
  require_same_grid(g.grid(), f.grid());
  HermitianField h = ddbar(f);
  RealField out(g.grid());
  for (std::size_t node = 0; node < out.size(); ++node) out[node] = g.inverse_at(node).contract(h.at(node));
  return out;
}

RealField trace_metric(const MetricField& g, const MetricField& g_tilde) {
  require_same_grid(g.grid(), g_tilde.grid());
  RealField out(g.grid());
  for (std::size_t node = 0; node < out.size(); ++node) out[node] = g.inverse_at(node).contract(g_tilde.at(node));
  return out;
}

RealField trace_metric(const MetricField& g, const HermitianField& form) {
  require_same_grid(g.grid(), form.grid());
  RealField out(g.grid());
  for (std::size_t node = 0; node < out.size(); ++node) out[node] = g.inverse_at(node).contract(form.at(node));
  return out;
}

RealField gradient_norm_sq(const MetricField& g, const RealField& f) {
  require_same_grid(g.grid(), f.grid());
  const int n = g.n();
  std::vector<ComplexField> df;
  for (int k = 0; k < n; ++k) df.push_back(d_dz(f, k));
  RealField out(g.grid());
  cplx v[2];
  for (std::size_t node = 0; node < out.size(); ++node) {
    for (int k = 0; k < n; ++k) v[k] = df[k][node];
    out[node] = g.inverse_at(node).quad(std::span<const cplx>(v, static_cast<std::size_t>(n)));
  }
  return out;
}

}  // namespace vsoliton

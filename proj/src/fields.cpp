#include "vsoliton/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spectral.hpp"
#include "vsoliton/errors.hpp"

namespace vsoliton {

HoloField::HoloField(std::vector<cplx> coefficients) : z_(std::move(coefficients)) {
  if (z_.size() != 1 && z_.size() != 2) throw DomainError("holomorphic field needs 1 or 2 coefficients");
  for (cplx c : z_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw DomainError("holomorphic field not finite");
  }
}

bool HoloField::is_zero() const {
  return std::all_of(z_.begin(), z_.end(), [](cplx c) { return c == cplx(0.0); });
}

HoloField HoloField::scaled(cplx a) const {
  std::vector<cplx> out = z_;
  for (cplx& c : out) c *= a;
  return HoloField(std::move(out));
}

std::vector<double> HoloField::V() const {
  std::vector<double> v;
  for (cplx c : z_) {
    v.push_back(0.5 * c.imag());
    v.push_back(-0.5 * c.real());
  }
  return v;
}

std::vector<double> HoloField::JV() const {
  std::vector<double> v;
  for (cplx c : z_) {
    v.push_back(0.5 * c.real());
    v.push_back(0.5 * c.imag());
  }
  return v;
}

namespace {

void require_dimension(const GridSpec& grid, const HoloField& Z) {
  if (grid.n() != Z.n()) throw DomainError("holomorphic field dimension does not match the grid");
}

// B_{i l̄} = ∂_i ∂_l̄ (Z^k ψ_k) = Z^k ψ_{i k l̄}, indexed i * n + l.
std::vector<ComplexField> z_hessian(const MetricField& g, const HoloField& Z) {
  const GridSpec& grid = g.grid();
  const int n = grid.n();
  spectral::Spectrum full = spectral::forward_complex(ComplexField(g.potential()));
  std::vector<ComplexField> out;
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) {
      out.push_back(spectral::inverse_complex(grid, full, [&](const double* k) {
        cplx zs = 0.0;
        for (int c = 0; c < n; ++c) zs += Z[c] * spectral::dz_symbol(k, c);
        return zs * spectral::dz_symbol(k, i) * spectral::dzbar_symbol(k, l);
      }));
    }
  }
  return out;
}

}  // namespace

RealField z_norm_sq(const MetricField& g, const HoloField& Z) {
  require_dimension(g.grid(), Z);
  RealField out(g.grid());
  for (std::size_t node = 0; node < out.size(); ++node) out[node] = g.at(node).quad(Z.coefficients());
  return out;
}

ComplexField divergence(const MetricField& g, const HoloField& Z) {
  require_dimension(g.grid(), Z);
  const int n = g.n();
  std::vector<ComplexField> B = z_hessian(g, Z);
  ComplexField out(g.grid());
  for (std::size_t node = 0; node < out.size(); ++node) {
    const Herm inv = g.inverse_at(node);
    cplx s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < n; ++l) s += inv.entry(i, l) * B[static_cast<std::size_t>(i * n + l)][node];
    out[node] = s;
  }
  return out;
}

RealField ricci_zz(const MetricField& g, const HoloField& Z) {
  require_dimension(g.grid(), Z);
  HermitianField ric = ricci(g);
  RealField out(g.grid());
  for (std::size_t node = 0; node < out.size(); ++node) out[node] = ric.at(node).quad(Z.coefficients());
  return out;
}

double check_vjv_identity(const RealField& u, const HoloField& Z) {
  require_dimension(u.grid(), Z);
  HermitianField h = ddbar(u);
  const std::vector<double> jv = Z.JV();
  RealField jjv = directional(directional(u, jv), jv);
  double worst = 0.0;
  for (std::size_t node = 0; node < u.size(); ++node) {
    const double lhs = 0.25 * h.at(node).quad(Z.coefficients());
    const double rhs = 0.25 * jjv[node];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double check_div_ricci(const MetricField& g, const HoloField& Z, const DivRicciOptions& options) {
  require_dimension(g.grid(), Z);
  const int n = g.n();
  ComplexField div = divergence(g, Z);
  ComplexField zbar_div(g.grid());
  for (int j = 0; j < n; ++j) {
    ComplexField d = options.corrupt_derivative ? d_dz(div, j) : d_dzbar(div, j);
    d *= std::conj(Z[j]);
    zbar_div += d;
  }
  RealField ric = ricci_zz(g, Z);
  double worst = 0.0;
  for (std::size_t node = 0; node < ric.size(); ++node) worst = std::max(worst, std::abs(zbar_div[node] + ric[node]));
  return worst;
}

HermitianField lemma41_form(const MetricField& g, const HoloField& Z, double eps) {
  require_dimension(g.grid(), Z);
  if (!(eps > 0.0)) throw DomainError("lemma41_form: eps must be positive");
  const int n = g.n();
  RealField norm = z_norm_sq(g, Z);
  RealField log_norm(g.grid());
  for (std::size_t node = 0; node < norm.size(); ++node) log_norm[node] = std::log(norm[node] + eps);
  HermitianField out = ddbar(log_norm);
  HermitianField w = ddbar(norm);
  std::vector<ComplexField> B = z_hessian(g, Z);
  auto b = [&](int i, int t, std::size_t node) { return B[static_cast<std::size_t>(i * n + t)][node]; };
  for (std::size_t node = 0; node < out.size(); ++node) {
    const Herm inv = g.inverse_at(node);
    // R_{i j̄ k l̄} Z^k Z̄^l = −w_{i j̄} + g^{s t̄} B_{i t̄} conj(B_{j s̄})
    Herm quad;
    quad.n = n;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        cplx s = 0.0;
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) s += inv.entry(p, q) * b(i, q, node) * std::conj(b(j, p, node));
        if (i == j) {
          (i == 0 ? quad.a : quad.d) = s.real();
        } else {
          quad.b = s;
        }
      }
    }
    const Herm rzz = quad - w.at(node);
    out.set(node, out.at(node) + rzz * (1.0 / (norm[node] + eps)));
  }
  return out;
}

double lemma41_min_eig(const MetricField& g, const HoloField& Z, double eps) {
  HermitianField h = lemma41_form(g, Z, eps);
  double lo = h.at(0).min_eigenvalue();
  for (std::size_t node = 1; node < h.size(); ++node) lo = std::min(lo, h.at(node).min_eigenvalue());
  return lo;
}

std::vector<std::vector<int>> non_invariant_modes(const RealField& u, const HoloField& Z, double rel_tol,
                                                  std::size_t limit) {
  require_dimension(u.grid(), Z);
  const GridSpec& grid = u.grid();
  const int d = grid.dims();
  const std::vector<double> v = Z.V();
  double vscale = 0.0;
  for (double x : v) vscale += std::abs(x);
  spectral::Spectrum uhat = spectral::forward_real(u);
  double largest = 0.0;
  for (const cplx& c : uhat) largest = std::max(largest, std::abs(c));
  struct Hit {
    double mag;
    std::vector<int> m;
  };
  std::vector<Hit> hits;
  spectral::for_each_half_mode(grid, [&](std::size_t i, const int* m) {
    const double mag = std::abs(uhat[i]);
    if (mag <= rel_tol * largest || mag == 0.0) return;
    double dot = 0.0;
    for (int a = 0; a < d; ++a) dot += m[a] * v[a];
    if (std::abs(dot) > 1e-12 * vscale) hits.push_back({mag, std::vector<int>(m, m + d)});
  });
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.mag > b.mag; });
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < hits.size() && i < limit; ++i) out.push_back(hits[i].m);
  return out;
}

void require_invariant(const RealField& u, const HoloField& Z, double rel_tol) {
  auto modes = non_invariant_modes(u, Z, rel_tol);
  if (modes.empty()) return;
  std::ostringstream os;
  os << "field is not invariant along V; offending modes:";
  for (const auto& m : modes) {
    os << " (";
    for (std::size_t a = 0; a < m.size(); ++a) os << (a ? "," : "") << m[a];
    os << ")";
  }
  throw PreconditionError(os.str(), std::move(modes));
}

ZhuGap zhu_gap(const RealField& u, const HoloField& Z, double rel_tol) {
  require_invariant(u, Z, rel_tol);
  const int n = Z.n();
  ComplexField zu(u.grid());
  for (int k = 0; k < n; ++k) {
    ComplexField d = d_dz(u, k);
    d *= Z[k];
    zu += d;
  }
  ZhuGap out;
  out.sup_zu = zu.max_abs();
  out.imag_max = zu.max_abs_imag();
  return out;
}

RealField infimum_hypothesis(const MetricField& g, const HoloField& Z) {
  ComplexField div = divergence(g, Z);
  RealField out = ricci_zz(g, Z);
  for (std::size_t node = 0; node < out.size(); ++node) out[node] = std::norm(div[node]) - out[node];
  return out;
}

}  // namespace vsoliton

#include "vsoliton/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "vsoliton/errors.hpp"

namespace vsoliton {

namespace {

// Below this |z¹|²/|z|² a sample is rejected by the chart.
constexpr double kChartFloor = 1e-3;

RealVec4 to_real(cplx a, cplx b) { return {a.real(), a.imag(), b.real(), b.imag()}; }

double dot(const RealVec4& a, const RealVec4& b) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += a[i] * b[i];
  return s;
}

std::array<cplx, 2> velocity(const std::array<cplx, 2>& z) {
  const double r = std::norm(z[0]) + std::norm(z[1]);
  return {-z[0] / r, -z[1] / r};
}

std::array<cplx, 2> axpy(const std::array<cplx, 2>& z, double a, const std::array<cplx, 2>& k) {
  return {z[0] + a * k[0], z[1] + a * k[1]};
}

// Integrates with a fixed number of RK4 steps. Throws on annulus exit at any
// stage, reporting the start time of the offending step.
std::array<cplx, 2> rk4(std::array<cplx, 2> z, double t, int steps) {
  const double h = t / steps;
  for (int s = 0; s < steps; ++s) {
    auto stage = [&](const std::array<cplx, 2>& y) {
      const double r = std::norm(y[0]) + std::norm(y[1]);
      if (!(r >= kAnnulusInner)) throw TrajectoryError(h * s, r);
      return velocity(y);
    };
    auto k1 = stage(z);
    auto k2 = stage(axpy(z, 0.5 * h, k1));
    auto k3 = stage(axpy(z, 0.5 * h, k2));
    auto k4 = stage(axpy(z, h, k3));
    for (int i = 0; i < 2; ++i) z[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  const double r = std::norm(z[0]) + std::norm(z[1]);
  if (!(r >= kAnnulusInner)) throw TrajectoryError(t, r);
  return z;
}

}  // namespace

LocalModelPoint::LocalModelPoint(cplx z1, cplx z2) : z_{z1, z2} {
  const double r = norm_sq();
  if (!(r >= kAnnulusInner) || !std::isfinite(r)) {
    throw DomainError("point lies outside the annulus |z|^2 >= 1e-6");
  }
}

RealVec4 LocalModelPoint::real() const { return to_real(z_[0], z_[1]); }

LocalModelPoint LocalModelPoint::rotated(double theta) const {
  const cplx e = std::polar(1.0, theta);
  return LocalModelPoint(e * z_[0], e * z_[1]);
}

double moment_map(const LocalModelPoint& p, double weight) { return 0.5 * weight * p.norm_sq(); }

RealVec4 generator_V(const LocalModelPoint& p, double weight) {
  const cplx i(0.0, weight);
  return to_real(i * p.z1(), i * p.z2());
}

RealVec4 generator_JV(const LocalModelPoint& p, double weight) {
  return to_real(-weight * p.z1(), -weight * p.z2());
}

double omega(const RealVec4& a, const RealVec4& b) {
  return a[0] * b[1] - a[1] * b[0] + a[2] * b[3] - a[3] * b[2];
}

double check_hamiltonian(const LocalModelPoint& p, double h, double weight) {
  if (!(h >= 1e-6 && h <= 1e-2)) throw DomainError("check_hamiltonian: step must lie in [1e-6, 1e-2]");
  const RealVec4 x = p.real();
  auto mu_at = [&](const RealVec4& y) { return 0.5 * weight * dot(y, y); };
  LocalModelPoint fwd = p.rotated(weight * h);
  LocalModelPoint bwd = p.rotated(-weight * h);
  const RealVec4 xf = fwd.real();
  const RealVec4 xb = bwd.real();
  RealVec4 v;
  for (int a = 0; a < 4; ++a) v[a] = (xf[a] - xb[a]) / (2.0 * h);
  double worst = 0.0;
  for (int a = 0; a < 4; ++a) {
    RealVec4 up = x, dn = x, e{};
    up[a] += h;
    dn[a] -= h;
    e[a] = 1.0;
    const double dmu = (mu_at(up) - mu_at(dn)) / (2.0 * h);
    worst = std::max(worst, std::abs(dmu + omega(v, e)));
  }
  return worst;
}

FlowResult flow_U(const LocalModelPoint& p, double t, double dt, double tol) {
  if (!(dt > 0.0) || !(tol > 0.0)) throw DomainError("flow_U: dt and tol must be positive");
  const std::array<cplx, 2> z0{p.z1(), p.z2()};
  if (t == 0.0) return FlowResult{p, dt, 0};
  int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / dt)));
  auto coarse = rk4(z0, t, steps);
  for (int halvings = 1; halvings <= 30; ++halvings) {
    steps *= 2;
    auto fine = rk4(z0, t, steps);
    const double diff = std::max(std::abs(fine[0] - coarse[0]), std::abs(fine[1] - coarse[1]));
    if (diff <= tol) return FlowResult{LocalModelPoint(fine[0], fine[1]), std::abs(t) / steps, halvings};
    coarse = fine;
  }
  return FlowResult{LocalModelPoint(coarse[0], coarse[1]), std::abs(t) / steps, 30};
}

RealVec4 horizontal_projection(const LocalModelPoint& p, const RealVec4& xi) {
  const RealVec4 v = generator_V(p);
  const RealVec4 jv = generator_JV(p);
  const double r = p.norm_sq();
  const double a = dot(xi, v) / r;
  const double b = dot(xi, jv) / r;
  RealVec4 out;
  for (int i = 0; i < 4; ++i) out[i] = xi[i] - a * v[i] - b * jv[i];
  return out;
}

cplx chart_differential(const LocalModelPoint& p, const RealVec4& xi) {
  const cplx d1(xi[0], xi[1]);
  const cplx d2(xi[2], xi[3]);
  const cplx z1 = p.z1();
  return (d2 * z1 - p.z2() * d1) / (z1 * z1);
}

double fubini_study(double tau, cplx w, cplx a, cplx b) {
  const double s = 1.0 + std::norm(w);
  return 2.0 * tau * (a * std::conj(b)).real() / (s * s);
}

PointResidual reduced_metric_residual(const LocalModelPoint& p) {
  if (std::norm(p.z1()) < kChartFloor * p.norm_sq()) throw DomainError("point outside the chart z1 != 0");
  const double tau = moment_map(p);
  const cplx w = p.z2() / p.z1();
  const double r = std::sqrt(p.norm_sq());
  // Unit frame of Q: e = (−z̄², z̄¹)/|z| and i e.
  const cplx e1 = -std::conj(p.z2()) / r;
  const cplx e2 = std::conj(p.z1()) / r;
  const RealVec4 f0 = to_real(e1, e2);
  const RealVec4 f1 = to_real(cplx(0.0, 1.0) * e1, cplx(0.0, 1.0) * e2);
  const std::array<RealVec4, 3> frame{f0, f1, RealVec4{0.6 * f0[0] - 0.8 * f1[0], 0.6 * f0[1] - 0.8 * f1[1],
                                                       0.6 * f0[2] - 0.8 * f1[2], 0.6 * f0[3] - 0.8 * f1[3]}};
  PointResidual out;
  const RealVec4 v = generator_V(p);
  const RealVec4 jv = generator_JV(p);
  for (const RealVec4& f : frame) {
    const RealVec4 pf = horizontal_projection(p, f);
    const RealVec4 ppf = horizontal_projection(p, pf);
    double idem = 0.0;
    for (int i = 0; i < 4; ++i) idem = std::max(idem, std::abs(ppf[i] - pf[i]));
    out.projection = std::max({out.projection, idem, std::abs(omega(pf, v)) / r, std::abs(omega(pf, jv)) / r});
  }
  for (const RealVec4& a : frame) {
    for (const RealVec4& b : frame) {
      const double g = dot(a, b);
      const double fs = fubini_study(tau, w, chart_differential(p, a), chart_differential(p, b));
      const double scale = std::max(std::sqrt(dot(a, a) * dot(b, b)), 1e-300);
      out.metric = std::max(out.metric, std::abs(g - fs) / scale);
    }
  }
  const cplx d0 = chart_differential(p, f0);
  const cplx d1 = chart_differential(p, f1);
  const double g00 = std::norm(d0);
  const double g11 = std::norm(d1);
  const double g01 = (d0 * std::conj(d1)).real();
  out.gram_det = g00 * g11 - g01 * g01;
  return out;
}

ReducedMetricReport reduced_metric_check(double tau, int samples, std::uint64_t seed) {
  if (!(tau > 0.0)) throw DomainError("reduced_metric_check: tau must be positive");
  if (samples <= 0) throw DomainError("reduced_metric_check: samples must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ReducedMetricReport out;
  out.min_gram_det = std::numeric_limits<double>::infinity();
  const double radius = std::sqrt(2.0 * tau);
  while (out.samples < samples) {
    cplx z1(nd(rng), nd(rng));
    cplx z2(nd(rng), nd(rng));
    const double s = std::sqrt(std::norm(z1) + std::norm(z2));
    if (s == 0.0) continue;
    z1 *= radius / s;
    z2 *= radius / s;
    if (std::norm(z1) < kChartFloor * radius * radius) {
      ++out.resampled;
      continue;
    }
    PointResidual r = reduced_metric_residual(LocalModelPoint(z1, z2));
    out.max_residual = std::max(out.max_residual, r.metric);
    out.max_projection_residual = std::max(out.max_projection_residual, r.projection);
    out.min_gram_det = std::min(out.min_gram_det, r.gram_det);
    ++out.samples;
  }
  return out;
}

}  // namespace vsoliton

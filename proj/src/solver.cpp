#include "vsoliton/solver.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "spectral.hpp"
#include "vsoliton/errors.hpp"

namespace vsoliton {

// ---------------------------------------------------------------------------
// Normalization and problem data

double normalization_constant(const RealField& det_g, const RealField& z_norm_g, const RealField& F, double eps) {
  if (!(eps > 0.0)) throw DomainError("normalization_constant: eps must be positive");
  require_same_grid(det_g.grid(), F.grid());
  require_same_grid(z_norm_g.grid(), F.grid());
  const double top = F.max();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    num += (eps + z_norm_g[i]) * std::exp(F[i] - top) * det_g[i];
    den += det_g[i];
  }
  return -(top + std::log(num / den));
}

double normalization_constant(const MetricField& g, const HoloField& Z, const RealField& F, double eps) {
  return normalization_constant(g.det(), z_norm_sq(g, Z), F, eps);
}

SolitonProblem::SolitonProblem(RealField phi, HoloField Z, RealField F, double lambda, double eps,
                               const BandLimitGuard& guard)
    : Z_(std::move(Z)), lambda_(lambda), eps_(eps), guard_(guard) {
  if (!(lambda <= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must satisfy lambda <= 0 (got " + std::to_string(lambda) + ")");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be positive (got " + std::to_string(eps) + ")");
  require_same_grid(phi.grid(), F.grid());
  if (Z_.n() != phi.grid().n()) throw DomainError("holomorphic field dimension does not match the grid");
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (!std::isfinite(F[i]) || !std::isfinite(phi[i])) throw DomainError("problem data is not finite");
  }
  MetricField g = assemble_metric(phi, kDefaultPositivityFloor, guard);
  RealField log_det(phi.grid());
  for (std::size_t i = 0; i < log_det.size(); ++i) log_det[i] = std::log(g.det()[i]);
  auto zn = std::make_shared<const RealField>(z_norm_sq(g, Z_));
  det_g_ = std::make_shared<const RealField>(g.det());
  z_norm_g_ = zn;
  log_det_g_ = std::make_shared<const RealField>(std::move(log_det));
  phi_ = std::make_shared<const RealField>(std::move(phi));
  F_ = std::make_shared<const RealField>(std::move(F));
  c_eps_ = normalization_constant(*det_g_, *z_norm_g_, *F_, eps_);
}

SolitonProblem SolitonProblem::with_epsilon(double eps) const {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be positive (got " + std::to_string(eps) + ")");
  SolitonProblem out = *this;
  out.eps_ = eps;
  out.c_eps_ = normalization_constant(*det_g_, *z_norm_g_, *F_, eps);
  if (eps != eps_) {
    out.exact_.reset();
    out.exact_shift_ = 0.0;
  }
  return out;
}

void SolitonProblem::set_exact_solution(RealField u, double shift) {
  require_same_grid(u.grid(), grid());
  exact_ = std::make_shared<const RealField>(std::move(u));
  exact_shift_ = shift;
}

void SolveOptions::validate() const {
  if (max_newton_iters <= 0) throw DomainError("max_newton_iters must be positive");
  if (!(residual_tol > 0.0 && residual_tol < 1.0)) throw DomainError("residual_tol must lie in (0, 1)");
  if (!(damping > 0.0 && damping < 1.0)) throw DomainError("damping must lie in (0, 1)");
  if (max_halvings <= 0) throw DomainError("max_halvings must be positive");
  if (!(linear_tol > 0.0 && linear_tol < 1.0)) throw DomainError("linear_tol must lie in (0, 1)");
  if (max_linear_iters <= 0) throw DomainError("max_linear_iters must be positive");
  if (!(positivity_floor > 0.0)) throw DomainError("positivity_floor must be positive");
}

double SolveReport::min_operator_eigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& it : iterates) lo = std::min(lo, it.min_eig_operator);
  return lo;
}

// ---------------------------------------------------------------------------
// Evaluation workspace

namespace {

double mean_of(const RealField& f) { return f.mean(); }

// Removes the discrete kernel of ∂∂̄: the modes whose wavenumber is zero or
// Nyquist on every axis (constants and sawtooth patterns).
void remove_kernel(RealField& f) {
  const GridSpec& g = f.grid();
  const int d = g.dims();
  const std::size_t N = static_cast<std::size_t>(g.N());
  const int classes = 1 << d;
  auto parity = [&](std::size_t node) {
    int p = 0;
    for (int a = d - 1; a >= 0; --a) {
      p |= static_cast<int>(node % N % 2) << a;
      node /= N;
    }
    return p;
  };
  std::array<double, 16> sums{};
  for (std::size_t i = 0; i < f.size(); ++i) sums[parity(i)] += f[i];
  std::array<double, 16> shift{};
  const double scale = 1.0 / static_cast<double>(f.size());
  for (int s = 0; s < classes; ++s) {
    double c = 0.0;
    for (int q = 0; q < classes; ++q) c += (std::popcount(static_cast<unsigned>(s & q)) % 2 ? -1.0 : 1.0) * sums[q];
    c *= scale;
    for (int q = 0; q < classes; ++q) shift[q] += (std::popcount(static_cast<unsigned>(s & q)) % 2 ? -1.0 : 1.0) * c;
  }
  for (std::size_t i = 0; i < f.size(); ++i) f[i] -= shift[parity(i)];
}

double dot(const RealField& a, const RealField& b) {
  double s = 0.0;
  const double* x = a.data();
  const double* y = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) s += x[i] * y[i];
  return s;
}

double max_norm(const RealField& f, bool centred) {
  if (!centred) return f.max_abs();
  RealField g = f;
  remove_kernel(g);
  return g.max_abs();
}

struct EvalInfo {
  bool admissible = true;
  double min_eig = 0.0;
  std::size_t worst_node = 0;
};

// Holds the scratch arrays of one solve. The ddbar components of the last
// evaluated potential stay in `hess` so that the operator coefficients can
// be formed without another transform.
class Workspace {
 public:
  Workspace(const SolitonProblem& p, double floor)
      : p_(p),
        grid_(p.grid()),
        ncomp_(p.grid().n() == 1 ? 1 : 4),
        floor_(floor),
        psi_(p.grid()),
        hat_(spectral::half_size(p.grid())),
        scratch_(spectral::half_size(p.grid())) {
    for (int c = 0; c < ncomp_; ++c) {
      hess_.emplace_back(grid_);
      coef_.emplace_back(grid_);
    }
  }

  const GridSpec& grid() const { return grid_; }

  /// Residual at u into r. Leaves ddbar(φ + u) in hess_.
  EvalInfo evaluate(const RealField& u, RealField& r) {
    const RealField& phi = p_.phi();
    for (std::size_t i = 0; i < psi_.size(); ++i) psi_[i] = phi[i] + u[i];
    spectral::Plans::get(grid_).r2c(psi_.data(), hat_.data());
    for (int c = 0; c < ncomp_; ++c) {
      spectral::inverse_real_into(
          grid_, hat_, [c](const double* k) { return spectral::ddbar_component_symbol(k, c); }, scratch_,
          hess_[c].data());
    }
    const RealField& F = p_.F();
    const RealField& ldg = p_.log_det_g();
    const double eps = p_.eps();
    const double shift = p_.c_eps();
    const double lambda = p_.lambda();
    const auto Z = p_.Z().coefficients();
    EvalInfo info;
    info.min_eig = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Herm g = metric_at(i);
      const double lo = g.min_eigenvalue();
      if (lo < info.min_eig) {
        info.min_eig = lo;
        info.worst_node = i;
      }
      if (!(lo > floor_)) {
        r[i] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      r[i] = std::log(g.det()) - ldg[i] - std::log(g.quad(Z) + eps) - F[i] - shift + lambda * u[i];
    }
    info.admissible = info.min_eig > floor_;
    return info;
  }

  /// g̃_H^{i j̄} from the last evaluation; returns its smallest eigenvalue.
  double form_coefficients() {
    const auto Z = p_.Z().coefficients();
    const double eps = p_.eps();
    const Herm zz = outer(Z);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < psi_.size(); ++i) {
      const Herm g = metric_at(i);
      const Herm a = g.inverse() - zz * (1.0 / (g.quad(Z) + eps));
      lo = std::min(lo, a.min_eigenvalue());
      coef_[0][i] = a.a;
      if (ncomp_ == 4) {
        coef_[1][i] = a.d;
        coef_[2][i] = 2.0 * a.b.real();
        coef_[3][i] = -2.0 * a.b.imag();
      }
    }
    for (int c = 0; c < ncomp_; ++c) mean_coef_[c] = coef_[c].mean();
    return lo;
  }

  HermitianField coefficient_field() const {
    HermitianField out(grid_);
    for (std::size_t i = 0; i < psi_.size(); ++i) {
      Herm a;
      a.n = grid_.n();
      a.a = coef_[0][i];
      if (ncomp_ == 4) {
        a.d = coef_[1][i];
        a.b = cplx(0.5 * coef_[2][i], -0.5 * coef_[3][i]);
      }
      out.set(i, a);
    }
    return out;
  }

  /// out = L[v] with the current coefficients.
  void apply(const RealField& v, RealField& out) {
    spectral::Plans::get(grid_).r2c(v.data(), hat_.data());
    accumulate(out, false);
    const double lambda = p_.lambda();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += lambda * v[i];
  }

  /// out = L[M⁻¹ y], where M is the constant-coefficient operator with the
  /// mean coefficients.
  void apply_preconditioned(const RealField& y, RealField& out) {
    spectral::Plans::get(grid_).r2c(y.data(), hat_.data());
    divide_by_symbol();
    const bool use_identity = p_.lambda() != 0.0;
    accumulate(out, use_identity);
    if (use_identity) {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
    } else {
      remove_kernel(out);
    }
  }

  /// x = M⁻¹ y.
  void precondition(const RealField& y, RealField& x) {
    spectral::Plans::get(grid_).r2c(y.data(), hat_.data());
    divide_by_symbol();
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (std::size_t i = 0; i < hat_.size(); ++i) hat_[i] *= scale;
    spectral::Plans::get(grid_).c2r(hat_.data(), x.data());
  }

 private:
  Herm metric_at(std::size_t i) const {
    Herm g;
    g.n = grid_.n();
    g.a = 1.0 + hess_[0][i];
    if (ncomp_ == 4) {
      g.d = 1.0 + hess_[1][i];
      g.b = cplx(hess_[2][i], hess_[3][i]);
    }
    return g;
  }

  double symbol(const double* k) const {
    double s = p_.lambda();
    for (int c = 0; c < ncomp_; ++c) s += mean_coef_[c] * spectral::ddbar_component_symbol(k, c);
    return s;
  }

  void divide_by_symbol() {
    spectral::for_each_half(grid_, [&](std::size_t i, const double* k) {
      const double s = symbol(k);
      hat_[i] = (s == 0.0) ? cplx(0.0) : hat_[i] / s;
    });
  }

  // out = Σ_c (coef_c − [centred] mean_c) D_c x, with x given by hat_.
  void accumulate(RealField& out, bool centred) {
    std::fill(out.values().begin(), out.values().end(), 0.0);
    for (int c = 0; c < ncomp_; ++c) {
      spectral::inverse_real_into(
          grid_, hat_, [c](const double* k) { return spectral::ddbar_component_symbol(k, c); }, scratch_,
          psi_.data());
      const double m = centred ? mean_coef_[c] : 0.0;
      const double* coef = coef_[c].data();
      const double* d = psi_.data();
      double* o = out.data();
      for (std::size_t i = 0; i < out.size(); ++i) o[i] += (coef[i] - m) * d[i];
    }
  }

  const SolitonProblem& p_;
  GridSpec grid_;
  int ncomp_;
  double floor_;
  RealField psi_;
  spectral::Spectrum hat_;
  spectral::Spectrum scratch_;
  std::vector<RealField> hess_;
  std::vector<RealField> coef_;
  std::array<double, 4> mean_coef_{};
};

struct KrylovResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Right-preconditioned BiCGSTAB for L M⁻¹ y = b. On return x holds y.
KrylovResult bicgstab(Workspace& ws, const RealField& b, RealField& x, bool centred, double tol, int max_iters) {
  const GridSpec& g = ws.grid();
  RealField r = b;
  RealField rhat = b;
  RealField p(g), v(g), s(g), t(g);
  std::fill(x.values().begin(), x.values().end(), 0.0);
  const double bnorm = std::sqrt(dot(b, b));
  KrylovResult out;
  if (bnorm == 0.0) return out;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 1; it <= max_iters; ++it) {
    const double rho_new = dot(rhat, r);
    if (rho_new == 0.0 || !std::isfinite(rho_new)) throw LinearSolveStalled(it, std::sqrt(dot(r, r)) / bnorm);
    const double beta = (rho_new / rho) * (alpha / omega);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    ws.apply_preconditioned(p, v);
    const double rv = dot(rhat, v);
    if (rv == 0.0 || !std::isfinite(rv)) throw LinearSolveStalled(it, std::sqrt(dot(r, r)) / bnorm);
    alpha = rho_new / rv;
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = r[i] - alpha * v[i];
    const double snorm = std::sqrt(dot(s, s));
    if (snorm <= tol * bnorm) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * p[i];
      out.iterations = it;
      out.relative_residual = snorm / bnorm;
      return out;
    }
    ws.apply_preconditioned(s, t);
    const double tt = dot(t, t);
    if (tt == 0.0) throw LinearSolveStalled(it, snorm / bnorm);
    omega = dot(t, s) / tt;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += alpha * p[i] + omega * s[i];
      r[i] = s[i] - omega * t[i];
    }
    if (centred) remove_kernel(r);
    const double rnorm = std::sqrt(dot(r, r));
    out.iterations = it;
    out.relative_residual = rnorm / bnorm;
    if (rnorm <= tol * bnorm) return out;
    if (omega == 0.0 || !std::isfinite(omega)) throw LinearSolveStalled(it, out.relative_residual);
    rho = rho_new;
  }
  throw LinearSolveStalled(max_iters, out.relative_residual);
}

}  // namespace

RealField residual(const SolitonProblem& p, const RealField& u, double positivity_floor) {
  require_same_grid(p.grid(), u.grid());
  Workspace ws(p, positivity_floor);
  RealField r(p.grid());
  EvalInfo info = ws.evaluate(u, r);
  if (!info.admissible) throw NonPositiveMetric(info.worst_node, info.min_eig, positivity_floor);
  return r;
}

HermitianField linearized_coefficients(const SolitonProblem& p, const RealField& u, double positivity_floor) {
  require_same_grid(p.grid(), u.grid());
  Workspace ws(p, positivity_floor);
  RealField r(p.grid());
  EvalInfo info = ws.evaluate(u, r);
  if (!info.admissible) throw NonPositiveMetric(info.worst_node, info.min_eig, positivity_floor);
  ws.form_coefficients();
  return ws.coefficient_field();
}

RealField linearize_apply(const SolitonProblem& p, const RealField& u, const RealField& v, double positivity_floor) {
  require_same_grid(p.grid(), u.grid());
  require_same_grid(p.grid(), v.grid());
  Workspace ws(p, positivity_floor);
  RealField r(p.grid());
  EvalInfo info = ws.evaluate(u, r);
  if (!info.admissible) throw NonPositiveMetric(info.worst_node, info.min_eig, positivity_floor);
  ws.form_coefficients();
  RealField out(p.grid());
  ws.apply(v, out);
  return out;
}

// ---------------------------------------------------------------------------
// Newton

SolveReport newton_solve(const SolitonProblem& p, const SolveOptions& opts) {
  return newton_solve(p, RealField(p.grid()), opts);
}

SolveReport newton_solve(const SolitonProblem& p, const RealField& u0, const SolveOptions& opts) {
  opts.validate();
  require_same_grid(p.grid(), u0.grid());
  const bool centred = p.mean_zero_gauge();
  const GridSpec& grid = p.grid();

  SolveReport report;
  report.problem = std::make_shared<const SolitonProblem>(p);
  RealField u = u0;
  if (centred) remove_kernel(u);

  Workspace ws(p, opts.positivity_floor);
  RealField r(grid);
  EvalInfo info = ws.evaluate(u, r);
  if (!info.admissible) {
    std::ostringstream os;
    os << "initial guess is not admissible: min eigenvalue " << info.min_eig << " at node " << info.worst_node;
    throw DomainError(os.str());
  }
  double rnorm = max_norm(r, centred);
  IterateRecord rec;
  rec.residual = rnorm;
  rec.min_eig_metric = info.min_eig;
  rec.min_eig_operator = ws.form_coefficients();
  report.iterates.push_back(rec);

  RealField rhs(grid), y(grid), step(grid), trial(grid), r_trial(grid);
  for (int it = 1; rnorm > opts.residual_tol && it <= opts.max_newton_iters; ++it) {
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -r[i];
    if (centred) remove_kernel(rhs);
    KrylovResult kr = bicgstab(ws, rhs, y, centred, opts.linear_tol, opts.max_linear_iters);
    ws.precondition(y, step);
    if (centred) remove_kernel(step);

    double t = 1.0;
    bool accepted = false;
    EvalInfo trial_info;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + t * step[i];
      trial_info = ws.evaluate(trial, r_trial);
      if (trial_info.admissible) {
        const double trial_norm = max_norm(r_trial, centred);
        if (trial_norm < rnorm) {
          rnorm = trial_norm;
          accepted = true;
          break;
        }
      }
      t *= opts.damping;
    }
    if (!accepted) throw LineSearchFailed(it, rnorm);
    std::swap(u, trial);
    std::swap(r, r_trial);

    IterateRecord step_rec;
    step_rec.iteration = it;
    step_rec.residual = rnorm;
    step_rec.damping = t;
    step_rec.min_eig_metric = trial_info.min_eig;
    step_rec.min_eig_operator = ws.form_coefficients();
    step_rec.linear_iterations = kr.iterations;
    step_rec.linear_residual = kr.relative_residual;
    report.iterates.push_back(step_rec);
  }

  report.converged = rnorm <= opts.residual_tol;
  report.final_residual = rnorm;
  report.compatibility_shift = centred ? mean_of(r) : 0.0;
  report.u = std::move(u);
  return report;
}

// ---------------------------------------------------------------------------
// Continuation

void validate_schedule(const std::vector<double>& schedule, double floor) {
  if (schedule.empty()) throw DomainError("eps schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double e = schedule[i];
    if (!(e > 0.0) || !std::isfinite(e)) throw DomainError("eps schedule entries must be positive");
    if (e < floor) {
      std::ostringstream os;
      os << "eps schedule entry " << e << " is below the floor " << floor;
      throw DomainError(os.str());
    }
    if (i > 0 && !(e < schedule[i - 1])) throw DomainError("eps schedule must be strictly decreasing");
  }
}

ContinuationResult continuation_solve(const SolitonProblem& base, const std::vector<double>& schedule,
                                      const SolveOptions& opts, double schedule_floor) {
  return continuation_solve(base, schedule, RealField(base.grid()), opts, schedule_floor);
}

ContinuationResult continuation_solve(const SolitonProblem& base, const std::vector<double>& schedule,
                                      const RealField& u0, const SolveOptions& opts, double schedule_floor) {
  validate_schedule(schedule, schedule_floor);
  opts.validate();
  require_same_grid(base.grid(), u0.grid());
  ContinuationResult out;
  RealField u = u0;
  for (double eps : schedule) {
    ContinuationFailure failure;
    failure.eps = eps;
    try {
      SolitonProblem p = base.with_epsilon(eps);
      SolveReport rep = newton_solve(p, u, opts);
      if (!rep.converged) {
        failure.stage = "iterations";
        std::ostringstream os;
        os << "no convergence within " << opts.max_newton_iters << " Newton steps (residual " << rep.final_residual
           << ")";
        failure.message = os.str();
        out.failure = failure;
        out.last_attempt = std::move(rep);
        return out;
      }
      u = rep.u;
      out.reports.push_back(std::move(rep));
      continue;
    } catch (const LinearSolveStalled& e) {
      failure.stage = "linear_solve";
      failure.message = e.what();
    } catch (const LineSearchFailed& e) {
      failure.stage = "line_search";
      failure.message = e.what();
    } catch (const DomainError& e) {
      failure.stage = "metric";
      failure.message = e.what();
    } catch (const NonPositiveMetric& e) {
      failure.stage = "metric";
      failure.message = e.what();
    }
    out.failure = failure;
    return out;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manufactured problems

SolitonProblem manufactured_problem(const RealField& u_star, const RealField& phi, const HoloField& Z, double lambda,
                                    double eps, const BandLimitGuard& guard) {
  require_same_grid(u_star.grid(), phi.grid());
  check_band_limit(u_star, guard, "manufactured_problem");
  if (!(eps > 0.0)) throw DomainError("eps must be positive (got " + std::to_string(eps) + ")");
  if (Z.n() != phi.grid().n()) throw DomainError("holomorphic field dimension does not match the grid");
  MetricField g = assemble_metric(phi, kDefaultPositivityFloor, guard);
  MetricField gt(phi + u_star);
  RealField zn = z_norm_sq(gt, Z);
  RealField F(phi.grid());
  for (std::size_t i = 0; i < F.size(); ++i) {
    F[i] = std::log(gt.det()[i] / g.det()[i]) - std::log(zn[i] + eps) + lambda * u_star[i];
  }
  SolitonProblem p(phi, Z, std::move(F), lambda, eps, guard);
  RealField exact = u_star;
  if (lambda < 0.0) {
    exact += p.c_eps() / lambda;
    p.set_exact_solution(std::move(exact));
  } else {
    exact += -exact.mean();
    p.set_exact_solution(std::move(exact), -p.c_eps());
  }
  return p;
}

}  // namespace vsoliton

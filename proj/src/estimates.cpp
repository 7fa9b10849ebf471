#include "vsoliton/estimates.hpp"

#include <algorithm>
#include <cmath>

#include "vsoliton/errors.hpp"

namespace vsoliton {

namespace {

void require_converged(const SolveReport& report, const char* what) {
  if (!report.problem) throw StateError(std::string(what) + ": report has no problem attached");
  if (!report.converged) throw StateError(std::string(what) + ": report did not converge");
}

void require_lambda_minus_one(const SolveReport& report, const char* what) {
  require_converged(report, what);
  if (report.problem->lambda() != -1.0) throw StateError(std::string(what) + ": needs lambda = -1");
}

MetricField background(const SolitonProblem& p) { return MetricField(p.phi()); }

double minpoint_gap(const SolitonProblem& p, const RealField& u, const RealField& zn) {
  const std::size_t lo = u.argmin();
  return std::log(zn[lo] + p.eps()) + p.F()[lo] + p.c_eps() + u[lo];
}

double maxpoint_witness(const SolitonProblem& p, const MetricField& gt, const RealField& zn) {
  const std::size_t top = zn.argmax();
  HermitianField hess = ddbar(zn);
  const Herm a = gt.inverse_at(top) - outer(p.Z().coefficients()) * (1.0 / (zn[top] + p.eps()));
  return -a.contract(hess.at(top));
}

CherrierEntry cherrier_entry(const RealField& u, const MetricField& g, double p) {
  RealField f(u.grid());
  RealField w(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) {
    f[i] = std::exp(-0.5 * p * u[i]);
    w[i] = std::exp(-(p - 1.0) * u[i]);
  }
  CherrierEntry out;
  out.p = p;
  out.lhs = integrate(gradient_norm_sq(g, f), g.det());
  out.rhs_core = p * p * integrate(w, g.det());
  return out;
}

MoserEndpoint moser(const RealField& u, const MetricField& g, double q) {
  RealField e(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) e[i] = std::exp(-q * u[i]);
  MoserEndpoint out;
  out.lhs = std::exp(-q * u.min());
  out.integral = integrate(e, g.det()) / integrate(RealField(u.grid(), 1.0), g.det());
  out.C = out.lhs / out.integral;
  return out;
}

}  // namespace

C0Ledger c0_ledger(const SolveReport& report) {
  require_lambda_minus_one(report, "c0_ledger");
  const SolitonProblem& p = *report.problem;
  const RealField& u = report.u;
  C0Ledger out;
  out.inf_u = u.min();
  out.sup_u = u.max();
  out.minpoint_gap = minpoint_gap(p, u, z_norm_sq(MetricField(p.phi() + u), p.Z()));
  return out;
}

LaplacianLedger laplacian_ledger(const SolveReport& report) {
  require_converged(report, "laplacian_ledger");
  const SolitonProblem& p = *report.problem;
  MetricField g = background(p);
  LaplacianLedger out;
  out.sup_lap_u = laplacian(g, report.u).max();
  out.sup_znorm_tilde = z_norm_sq(perturb_metric(g, report.u), p.Z()).max();
  out.fitted_C = std::max(out.sup_lap_u, 0.0) / std::max(out.sup_znorm_tilde, 1.0);
  return out;
}

ZnormLedger znorm_ledger(const SolveReport& report) {
  require_lambda_minus_one(report, "znorm_ledger");
  const SolitonProblem& p = *report.problem;
  MetricField gt(p.phi() + report.u);
  RealField zn = z_norm_sq(gt, p.Z());
  ZnormLedger out;
  out.sup_znorm_tilde = zn.max();
  out.maxpoint_witness = maxpoint_witness(p, gt, zn);
  return out;
}

CherrierEntry cherrier_check(const SolveReport& report, double p) {
  require_lambda_minus_one(report, "cherrier_check");
  if (!(p >= 1.0)) throw DomainError("cherrier_check: p must be >= 1");
  const SolitonProblem& prob = *report.problem;
  require_invariant(report.u, prob.Z());
  return cherrier_entry(report.u, background(prob), p);
}

double cherrier_constant(const std::vector<CherrierEntry>& entries) {
  double c = 0.0;
  for (const auto& e : entries) c = std::max(c, e.lhs / e.rhs_core);
  return c;
}

double hypothesis_ledger(const SolitonProblem& problem) {
  return infimum_hypothesis(background(problem), problem.Z()).min();
}

MoserEndpoint moser_endpoint(const SolveReport& report, double q) {
  require_lambda_minus_one(report, "moser_endpoint");
  if (!(q > 0.0)) throw DomainError("moser_endpoint: q must be positive");
  return moser(report.u, background(*report.problem), q);
}

EstimateLedger compute_ledger(const SolveReport& report, const std::vector<double>& cherrier_p,
                              std::optional<double> hypothesis_min) {
  require_converged(report, "compute_ledger");
  const SolitonProblem& p = *report.problem;
  const RealField& u = report.u;
  const MetricField g = background(p);
  const MetricField gt = perturb_metric(g, u);
  const RealField zn = z_norm_sq(gt, p.Z());

  EstimateLedger out;
  out.sup_u = u.max();
  out.inf_u = u.min();
  out.sup_lap_u = laplacian(g, u).max();
  out.sup_znorm_tilde = zn.max();
  out.fitted_C = std::max(out.sup_lap_u, 0.0) / std::max(out.sup_znorm_tilde, 1.0);
  out.hypothesis_min = hypothesis_min ? *hypothesis_min : infimum_hypothesis(g, p.Z()).min();

  const bool invariant = non_invariant_modes(u, p.Z()).empty();
  if (invariant) {
    ZhuGap zg = zhu_gap(u, p.Z());
    out.zhu_sup = zg.sup_zu;
    out.zhu_imag = zg.imag_max;
  }
  if (p.lambda() == -1.0) {
    out.minpoint_gap = minpoint_gap(p, u, zn);
    out.maxpoint_witness = maxpoint_witness(p, gt, zn);
    MoserEndpoint m = moser(u, g, 2.0);
    out.moser_lhs = m.lhs;
    out.moser_rhs_integral = m.integral;
    out.moser_C = m.C;
    if (invariant) {
      for (double q : cherrier_p) {
        if (!(q >= 1.0)) throw DomainError("cherrier_check: p must be >= 1");
        out.cherrier.push_back(cherrier_entry(u, g, q));
      }
      if (!out.cherrier.empty()) out.cherrier_C = cherrier_constant(out.cherrier);
    }
  }
  return out;
}

}  // namespace vsoliton

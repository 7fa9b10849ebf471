// Acceptance run: one PASS/FAIL line per criterion. Exit status is 0 when
// every failing line is listed in kKnownRed.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "vsoliton/cli/commands.hpp"
#include "vsoliton/estimates.hpp"
#include "vsoliton/reduction.hpp"
#include "vsoliton/solver.hpp"

using namespace vsoliton;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kIdentityTol = 1e-8;
constexpr double kIdentitySeconds = 30.0;
constexpr double kLemmaTol = 1e-8;
constexpr double kLemmaFlatTol = 1e-10;
constexpr double kLemmaSeconds = 60.0;
constexpr double kRecoveryTol = 1e-10;
constexpr int kRecoverySteps = 8;
constexpr double kManufacturedRelTol = 1e-8;
constexpr double kSpectralDrop = 1e3;
constexpr double kSlopeTarget = 1.0;
constexpr double kSlopeTol = 0.2;
constexpr double kUniformity = 2.0;
constexpr double kGapTol = -1e-6;
constexpr double kCherrierMax = 1e3;
constexpr double kHamiltonianRatio = 4.0;
constexpr double kHamiltonianTol = 0.5;
constexpr double kTransportTol = 1e-6;
constexpr double kReducedTol = 1e-8;
constexpr double kSolveSeconds = 10.0;
constexpr double kSweepSeconds = 300.0;

// Expected to fail: C4b asks for a 1e3 error drop on a band-limited u*,
// which both grids already resolve to roundoff.
const std::set<std::string> kKnownRed = {"C4b"};

struct Outcome {
  std::string id;
  bool pass;
};
std::vector<Outcome> outcomes;
std::vector<double> operator_eigs;

void line(const std::string& id, bool pass, const std::string& text) {
  std::cout << (pass ? "PASS " : "FAIL ") << id << "  " << text;
  if (!pass && kKnownRed.count(id)) std::cout << "  [known]";
  std::cout << std::endl;
  outcomes.push_back({id, pass});
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void collect(const SolveReport& r) {
  for (const auto& it : r.iterates) operator_eigs.push_back(it.min_eig_operator);
}

HoloField unit(const HoloField& Z) {
  double s = 0.0;
  for (cplx c : Z.coefficients()) s += std::norm(c);
  return Z.scaled(1.0 / std::sqrt(s));
}

double max_abs_diff(const RealField& a, const RealField& b) { return max_diff(a, b); }

// ---------------------------------------------------------------------------

void identities() {
  std::mt19937_64 rng(2024);
  Stopwatch sw;
  double vjv = 0.0, dr = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int n = i % 2 == 0 ? 1 : 2;
    GridSpec g(n, n == 1 ? 64 : 32);
    HoloField Z = unit(random_rational_z(n, rng));
    RealField phi = random_potential(g, rng, n == 1 ? 0.1 : 0.05);
    RealField u = random_invariant(g, Z, rng, 0.1);
    vjv = std::max(vjv, check_vjv_identity(u, Z));
    dr = std::max(dr, check_div_ricci(assemble_metric(phi), Z));
  }
  const double t = sw.seconds();
  line("C1", vjv <= kIdentityTol && dr <= kIdentityTol && t < kIdentitySeconds,
       "identity suite: max vjv " + sci(vjv) + ", max div-Ricci " + sci(dr) + " (tol " + sci(kIdentityTol) +
           "), " + sci(t) + " s (limit " + sci(kIdentitySeconds) + " s)");
}

void lemma41() {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> expo(-3.0, 0.0);
  Stopwatch sw;
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const int n = i % 2 == 0 ? 1 : 2;
    GridSpec g(n, n == 1 ? 64 : 32);
    RealField phi = random_potential(g, rng, n == 1 ? 0.1 : 0.05);
    HoloField Z(random_z(n, rng));
    const double eps = std::pow(10.0, expo(rng));
    worst = std::min(worst, lemma41_min_eig(assemble_metric(phi), Z, eps));
  }
  const double t = sw.seconds();
  double flat = 0.0;
  for (int n : {1, 2}) {
    GridSpec g(n, 16);
    std::vector<cplx> z{1.0};
    if (n == 2) z.push_back(cplx(0.0, 1.0));
    flat = std::max(flat, std::abs(lemma41_min_eig(assemble_metric(RealField(g)), HoloField(z), 0.1)));
  }
  line("C2", worst >= -kLemmaTol && flat <= kLemmaFlatTol && t < kLemmaSeconds,
       "log-norm form scan: min eigenvalue " + sci(worst) + " (>= " + sci(-kLemmaTol) + "), flat |value| " +
           sci(flat) + " (<= " + sci(kLemmaFlatTol) + "), " + sci(t) + " s (limit " + sci(kLemmaSeconds) + " s)");
}

void constant_recovery() {
  std::mt19937_64 rng(3);
  SolveOptions opts;
  opts.residual_tol = 1e-12;
  opts.linear_tol = 1e-10;
  double worst = 0.0;
  int steps = 0;
  bool ok = true;
  int runs = 0;
  for (double lambda : {0.0, -1.0}) {
    for (int n : {1, 2}) {
      for (int s = 0; s < 3; ++s) {
        GridSpec g(n, n == 1 ? 32 : 16);
        SolitonProblem p(RealField(g), HoloField(random_z(n, rng)), RealField(g), lambda, 0.1);
        RandomFieldOptions ro;
        ro.amplitude = 0.05;
        RealField u0 = random_band_limited(g, rng, ro);
        SolveReport r = newton_solve(p, u0, opts);
        collect(r);
        ok = ok && r.converged;
        worst = std::max(worst, r.u.max_abs());
        steps = std::max(steps, r.newton_steps());
        ++runs;
      }
    }
  }
  line("C3", ok && worst <= kRecoveryTol && steps <= kRecoverySteps,
       "constant data, lambda in {0, -1}, " + std::to_string(runs) + " random starts: max |u| " + sci(worst) +
           " (<= " + sci(kRecoveryTol) + "), max Newton steps " + std::to_string(steps) + " (<= " +
           std::to_string(kRecoverySteps) + ")");
}

// u* depends on x¹ only, φ = 0, Z = (1): g̃ = 1 + u*''/4 and |Z|²_g̃ = g̃.
struct Profile {
  std::function<double(double)> u;
  std::function<double(double)> u_xx;
};

struct Recovery {
  double abs_error;
  double rel_error;
  bool converged;
};

Recovery recover(const Profile& prof, int N, double eps, SolveReport* keep = nullptr) {
  const double lambda = -1.0;
  GridSpec g(1, N);
  auto F_of = [&](double x) {
    const double gt = 1.0 + 0.25 * prof.u_xx(x);
    return std::log(gt) - std::log(gt + eps) + lambda * prof.u(x);
  };
  RealField F = RealField::from_function(g, [&](std::span<const double> x) { return F_of(x[0]); });
  // Normalization constant by fine midpoint quadrature.
  const int M = 1 << 14;
  double s = 0.0;
  for (int k = 0; k < M; ++k) s += (1.0 + eps) * std::exp(F_of(2.0 * std::numbers::pi * (k + 0.5) / M));
  const double c = -std::log(s / M);
  RealField exact = RealField::from_function(g, [&](std::span<const double> x) { return prof.u(x[0]) + c / lambda; });

  BandLimitGuard guard;
  guard.enabled = false;
  SolitonProblem p(RealField(g), HoloField({1.0}), F, lambda, eps, guard);
  SolveOptions opts;
  opts.residual_tol = 1e-12;
  opts.linear_tol = 1e-12;
  SolveReport r = newton_solve(p, opts);
  collect(r);
  const double err = max_abs_diff(r.u, exact);
  if (keep) *keep = r;
  return {err, err / exact.max_abs(), r.converged};
}

void manufactured_recovery() {
  const Profile cosine{[](double x) { return 0.05 * std::cos(x); }, [](double x) { return -0.05 * std::cos(x); }};
  SolveReport r64;
  const Recovery a = recover(cosine, 64, 0.1, &r64);
  line("C4a", a.converged && a.rel_error <= kManufacturedRelTol,
       "u* = 0.05 cos(x1), n=1 N=64: relative max error " + sci(a.rel_error) + " (<= " + sci(kManufacturedRelTol) +
           ")");

  const Recovery b = recover(cosine, 32, 0.1);
  const double drop = b.abs_error / std::max(a.abs_error, std::numeric_limits<double>::min());
  line("C4b", drop >= kSpectralDrop,
       "same u*: error N=32 " + sci(b.abs_error) + " vs N=64 " + sci(a.abs_error) + ", drop " + sci(drop) +
           " (>= " + sci(kSpectralDrop) + "); both errors sit at roundoff because u* is resolved exactly");

  // Poisson kernel profile with Fourier coefficients r^k.
  const double A = 0.05, rr = 0.5;
  const Profile poisson{
      [=](double x) { return A * (1 - rr * rr) / (1 - 2 * rr * std::cos(x) + rr * rr); },
      [=](double x) {
        const double D = 1 - 2 * rr * std::cos(x) + rr * rr;
        const double D1 = 2 * rr * std::sin(x), D2 = 2 * rr * std::cos(x);
        return A * (1 - rr * rr) * (2 * D1 * D1 / (D * D * D) - D2 / (D * D));
      }};
  const Recovery c32 = recover(poisson, 32, 0.1);
  const Recovery c64 = recover(poisson, 64, 0.1);
  const double drop2 = c32.abs_error / c64.abs_error;
  line("C4c", c32.converged && c64.converged && drop2 >= kSpectralDrop,
       "supplement, non-band-limited u* (Poisson kernel r=0.5): error N=32 " + sci(c32.abs_error) + " vs N=64 " +
           sci(c64.abs_error) + ", drop " + sci(drop2) + " (>= " + sci(kSpectralDrop) + ")");

  // Ellipticity record against a dense eigensolver on the final iterate.
  HermitianField A_op = linearized_coefficients(*r64.problem, r64.u);
  double oracle = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < A_op.size(); ++i) oracle = std::min(oracle, eigen_min(A_op.at(i)));
  const double recorded = r64.iterates.back().min_eig_operator;
  line("C6a", std::abs(recorded - oracle) <= 1e-12 * std::abs(oracle),
       "recorded operator min eigenvalue " + sci(recorded) + " matches dense eigensolver " + sci(oracle));
}

void linearization() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> expo(-3.0, 0.0);
  const std::vector<double> hs{1e-2, 1e-3, 1e-4, 1e-5};
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 10; ++i) {
    const int n = i % 2 == 0 ? 1 : 2;
    GridSpec g(n, n == 1 ? 32 : 16);
    const double lambda = i % 3 == 0 ? 0.0 : -1.0;
    SolitonProblem p = manufactured_problem(random_potential(g, rng, 0.05), random_potential(g, rng, 0.05),
                                            HoloField(random_z(n, rng)), lambda, std::pow(10.0, expo(rng)));
    RealField u = random_potential(g, rng, 0.05);
    RealField v = random_potential(g, rng, 0.05);
    v *= 1.0 / v.max_abs();
    const RealField r0 = residual(p, u);
    const RealField Lv = linearize_apply(p, u, v);
    std::vector<double> lx, ly;
    for (double h : hs) {
      RealField fd = residual(p, u + h * v);
      fd -= r0;
      fd *= 1.0 / h;
      lx.push_back(std::log(h));
      ly.push_back(std::log(max_abs_diff(fd, Lv)));
    }
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) mx += lx[k] / lx.size(), my += ly[k] / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) sxy += (lx[k] - mx) * (ly[k] - my), sxx += (lx[k] - mx) * (lx[k] - mx);
    const double slope = sxy / sxx;
    lo = std::min(lo, slope);
    hi = std::max(hi, slope);
  }
  line("C5", std::abs(lo - kSlopeTarget) <= kSlopeTol && std::abs(hi - kSlopeTarget) <= kSlopeTol,
       "finite-difference slope over h in [1e-5, 1e-2], 10 triples: range [" + sci(lo) + ", " + sci(hi) +
           "] (target " + sci(kSlopeTarget) + " +- " + sci(kSlopeTol) + ")");
}

struct FamilyStats {
  double sup_u_ratio = 0, fitted_ratio = 0, znorm_ratio = 0, worst_gap = 1e300, cherrier = 0, rhs_mismatch = 0,
         ledger_mismatch = 0;
  int failures = 0, runs = 0;
};

double ratio(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

void uniformity_and_cherrier() {
  const std::vector<double> schedule{1.0, 0.1, 0.01, 0.001};
  SolveOptions opts;
  opts.residual_tol = 1e-11;
  FamilyStats st;
  struct Family {
    int n, N;
    std::uint64_t seed;
  };
  for (const Family& fam : {Family{1, 64, 11}, Family{1, 64, 12}, Family{1, 64, 13}, Family{2, 32, 14}}) {
    std::mt19937_64 rng(fam.seed);
    GridSpec g(fam.n, fam.N);
    HoloField Z = random_rational_z(fam.n, rng);
    RealField phi = random_invariant(g, Z, rng, fam.n == 1 ? 0.1 : 0.05);
    RealField u_star = random_invariant(g, Z, rng, 0.1);
    SolitonProblem base = manufactured_problem(u_star, phi, Z, -1.0, schedule.front());
    ContinuationResult res = continuation_solve(base, schedule, opts);
    if (res.failure) {
      ++st.failures;
      continue;
    }
    MetricField g0 = assemble_metric(phi);
    std::vector<double> sup_u, fitted, znorm;
    for (const SolveReport& r : res.reports) {
      collect(r);
      ++st.runs;
      const SolitonProblem& p = *r.problem;
      // Oracles: |Z|²_g̃ by explicit contraction and Δu = tr(G⁻¹ U) with a dense inverse.
      MetricField gt(phi + r.u);
      HermitianField U = ddbar(r.u);
      RealField zn(g);
      double lap_max = -1e300;
      for (std::size_t i = 0; i < g.size(); ++i) {
        double q = 0.0;
        for (int k = 0; k < fam.n; ++k)
          for (int l = 0; l < fam.n; ++l) q += (gt.at(i).entry(k, l) * Z[k] * std::conj(Z[l])).real();
        zn[i] = q;
        lap_max = std::max(lap_max, (to_matrix(g0.at(i)).inverse() * to_matrix(U.at(i))).trace().real());
      }
      const double zmax = zn.max();
      const double fc = std::max(lap_max, 0.0) / std::max(zmax, 1.0);
      const std::size_t m = r.u.argmin();
      const double gap = std::log(zn[m] + p.eps()) + p.F()[m] + p.c_eps() + r.u[m];

      sup_u.push_back(r.u.max_abs());
      fitted.push_back(fc);
      znorm.push_back(zmax);
      st.worst_gap = std::min(st.worst_gap, gap);

      const EstimateLedger l = compute_ledger(r);
      st.ledger_mismatch = std::max({st.ledger_mismatch, std::abs(l.fitted_C - fc), std::abs(l.sup_znorm_tilde - zmax),
                                     std::abs(*l.minpoint_gap - gap)});
      for (const CherrierEntry& e : l.cherrier) {
        double rhs = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rhs += std::exp(-(e.p - 1.0) * r.u[i]) * g0.det()[i];
        rhs *= e.p * e.p * g.cell_volume();
        st.rhs_mismatch = std::max(st.rhs_mismatch, std::abs(rhs - e.rhs_core) / rhs);
        st.cherrier = std::max(st.cherrier, e.lhs / e.rhs_core);
      }
      if (l.cherrier.size() != 4) st.cherrier = std::numeric_limits<double>::infinity();
    }
    st.sup_u_ratio = std::max(st.sup_u_ratio, ratio(sup_u));
    st.fitted_ratio = std::max(st.fitted_ratio, ratio(fitted));
    st.znorm_ratio = std::max(st.znorm_ratio, ratio(znorm));
  }
  const bool ok7 = st.failures == 0 && st.sup_u_ratio < kUniformity && st.fitted_ratio < kUniformity &&
                   st.znorm_ratio < kUniformity && st.worst_gap >= kGapTol && st.ledger_mismatch <= 1e-10;
  line("C7", ok7,
       "eps-uniformity over {1, 0.1, 0.01, 0.001}, 4 families: sup|u| x" + sci(st.sup_u_ratio) + ", fitted C x" +
           sci(st.fitted_ratio) + ", sup|Z|^2 x" + sci(st.znorm_ratio) + " (< " + sci(kUniformity) +
           "), min gap " + sci(st.worst_gap) + " (>= " + sci(kGapTol) + "), ledger vs oracle " +
           sci(st.ledger_mismatch) + ", failed families " + std::to_string(st.failures));
  line("C8", st.failures == 0 && st.cherrier <= kCherrierMax && st.rhs_mismatch <= 1e-12,
       "Cherrier constant over p in {2,4,8,16}, " + std::to_string(st.runs) + " invariant solutions: C " +
           sci(st.cherrier) + " (<= " + sci(kCherrierMax) + "), rhs vs oracle " + sci(st.rhs_mismatch));
}

void reduction() {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  auto level_point = [&](double tau) {
    cplx a(nd(rng), nd(rng)), b(nd(rng), nd(rng));
    const double s = std::sqrt(2.0 * tau / (std::norm(a) + std::norm(b)));
    return LocalModelPoint(s * a, s * b);
  };
  double worst_ratio = 0.0;
  double ratio_lo = 1e9, ratio_hi = 0;
  for (int i = 0; i < 10; ++i) {
    LocalModelPoint p = level_point(0.5);
    const double q = check_hamiltonian(p, 1e-2) / check_hamiltonian(p, 5e-3);
    ratio_lo = std::min(ratio_lo, q);
    ratio_hi = std::max(ratio_hi, q);
    worst_ratio = std::max(worst_ratio, std::abs(q - kHamiltonianRatio));
  }
  double transport = 0.0, closed_form = 0.0;
  for (int i = 0; i < 10; ++i) {
    LocalModelPoint p = level_point(0.5);
    for (double t : {0.1, 0.3}) {
      FlowResult f = flow_U(p, t);
      transport = std::max(transport, std::abs(moment_map(f.point) - moment_map(p) - kTransportConstant * t));
      const double s = std::sqrt(1.0 - 2.0 * t / p.norm_sq());
      closed_form = std::max({closed_form, std::abs(f.point.z1() - s * p.z1()), std::abs(f.point.z2() - s * p.z2())});
    }
  }
  ReducedMetricReport rm = reduced_metric_check(0.5, 100, 17);
  line("C9", worst_ratio <= kHamiltonianTol && transport <= kTransportTol && closed_form <= 1e-8 &&
                 rm.max_residual <= kReducedTol && rm.samples == 100,
       "reduction: Hamiltonian ratio in [" + sci(ratio_lo) + ", " + sci(ratio_hi) + "] (4 +- 0.5), transport " +
           sci(transport) + " (<= " + sci(kTransportTol) + "), flow vs closed form " + sci(closed_form) +
           ", reduced metric " + sci(rm.max_residual) + " over " + std::to_string(rm.samples) + " samples (<= " +
           sci(kReducedTol) + ")");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism_and_runtime() {
  const fs::path root = fs::temp_directory_path() / "vsoliton_acceptance";
  fs::remove_all(root);
  std::ostringstream log;

  cli::RunConfig c = cli::parse_config(R"yaml(grid: {n: 1, N: 32}
problem:
  phi: "0.1*cos(0,1)"
  F: manufactured
  u_star: "0.05*cos(1,0) + 0.02*sin(2,0)"
  eps_schedule: [1, 0.1, 0.01]
  initial_guess: random
suites: [identities, reduction]
verify: {identity_samples: 4, lemma41_samples: 2, reduction_samples: 20}
seed: 42
)yaml");
  bool same = true;
  for (const char* cmd : {"solve", "verify"}) {
    std::string first;
    for (int k = 0; k < 2; ++k) {
      c.output_dir = (root / (std::string(cmd) + std::to_string(k))).string();
      const int code = std::string(cmd) == "solve" ? cli::cmd_solve(c, log) : cli::cmd_verify(c, log);
      const std::string text = slurp(fs::path(c.output_dir) / (std::string(cmd) + "_report.json"));
      same = same && code == 0 && !text.empty();
      if (k == 0) first = text;
      else same = same && text == first;
    }
  }
  line("C10a", same, "identical config and seed give byte-identical solve and verify reports");

  GridSpec g1(1, 128);
  RealField phi = RealField::from_function(
      g1, [](std::span<const double> x) { return 0.05 * std::cos(x[0]) + 0.03 * std::sin(x[1]); });
  RealField F = RealField::from_function(
      g1, [](std::span<const double> x) { return 0.3 * std::cos(x[0]) - 0.2 * std::sin(x[0] + x[1]); });
  Stopwatch sw;
  SolveReport r = newton_solve(SolitonProblem(phi, HoloField({1.0}), F, -1.0, 0.1));
  const double t1 = sw.seconds();
  collect(r);
  line("C10b", r.converged && t1 < kSolveSeconds,
       "n=1 N=128 solve: " + sci(t1) + " s (limit " + sci(kSolveSeconds) + " s), " +
           std::to_string(r.newton_steps()) + " Newton steps");

  cli::RunConfig s = cli::parse_config(R"yaml(grid: {n: 2, N: 64}
problem:
  phi: "0.05*cos(1,0,0,0) + 0.03*sin(0,0,1,1)"
  Z: [[1, 0], [0.5, 0.5]]
  F: "0.3*cos(0,1,0,0) - 0.2*sin(1,0,0,1)"
  lambda: -1
  eps_schedule: [1, 0.1, 0.01, 0.001]
)yaml");
  s.output_dir = (root / "sweep").string();
  Stopwatch sw2;
  const int code = cli::cmd_sweep(s, log);
  const double t2 = sw2.seconds();
  if (fs::exists(root / "sweep" / "sweep_report.json")) {
    const cli::Json rep = cli::Json::parse(slurp(root / "sweep" / "sweep_report.json"));
    for (const auto& it : rep["iterates"]) operator_eigs.push_back(it["min_eig_operator"].get<double>());
  }
  line("C10c", code == 0 && t2 < kSweepSeconds,
       "n=2 N=64 sweep over 4 eps points: " + sci(t2) + " s (limit " + sci(kSweepSeconds) +
           " s, single thread), exit code " + std::to_string(code));
}

}  // namespace

int main() {
  std::cout << "acceptance run" << std::endl;
  identities();
  lemma41();
  constant_recovery();
  manufactured_recovery();
  linearization();
  uniformity_and_cherrier();
  reduction();
  determinism_and_runtime();

  const double min_eig = *std::min_element(operator_eigs.begin(), operator_eigs.end());
  line("C6", min_eig > 0.0,
       "operator min eigenvalue over " + std::to_string(operator_eigs.size()) + " recorded iterates: " + sci(min_eig) +
           " (> 0)");

  int unexpected = 0, known = 0;
  for (const auto& o : outcomes) {
    if (o.pass) continue;
    if (kKnownRed.count(o.id)) ++known;
    else ++unexpected;
  }
  std::cout << outcomes.size() << " lines, " << unexpected << " unexpected failures, " << known
            << " known failures" << std::endl;
  return unexpected == 0 ? 0 : 1;
}

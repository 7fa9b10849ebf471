#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "vsoliton/errors.hpp"
#include "vsoliton/estimates.hpp"

using namespace vsoliton;
using namespace testsupport;

namespace {

SolveReport fake_report(const SolitonProblem& p, RealField u) {
  SolveReport r;
  r.problem = std::make_shared<const SolitonProblem>(p);
  r.u = std::move(u);
  r.converged = true;
  return r;
}

SolveReport solved_invariant(int n, int N, double eps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GridSpec g(n, N);
  HoloField Z = random_rational_z(n, rng);
  RealField phi = random_invariant(g, Z, rng, n == 1 ? 0.1 : 0.05);
  RealField u = random_invariant(g, Z, rng, 0.1);
  SolitonProblem p = manufactured_problem(u, phi, Z, -1.0, eps);
  return newton_solve(p);
}

}  // namespace

TEST_CASE("ledger on constant data") {
  GridSpec g(2, 16);
  RealField zero(g);
  HoloField Z({cplx(1.0, 1.0), 0.5});
  SolitonProblem p(zero, Z, zero, -1.0, 0.2);
  SolveReport rep = newton_solve(p);
  REQUIRE(rep.converged);
  C0Ledger c0 = c0_ledger(rep);
  CHECK(c0.inf_u == 0.0);
  CHECK(c0.sup_u == 0.0);
  CHECK(std::abs(c0.minpoint_gap) <= 1e-12);
  LaplacianLedger lap = laplacian_ledger(rep);
  CHECK(lap.sup_lap_u == 0.0);
  CHECK(lap.sup_znorm_tilde == doctest::Approx(2.25).epsilon(1e-14));
  CHECK(lap.fitted_C == 0.0);
  ZnormLedger zl = znorm_ledger(rep);
  CHECK(zl.sup_znorm_tilde == doctest::Approx(2.25).epsilon(1e-14));
  CHECK(std::abs(zl.maxpoint_witness) <= 1e-12);
  CherrierEntry ch = cherrier_check(rep, 2.0);
  CHECK(ch.lhs == 0.0);
  CHECK(ch.rhs_core == doctest::Approx(4.0 * std::pow(2.0 * std::numbers::pi, 4)).epsilon(1e-12));
  CHECK(moser_endpoint(rep).C == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(hypothesis_ledger(p)) <= 1e-13);
}

TEST_CASE("ledger state checks") {
  GridSpec g(1, 16);
  RealField zero(g);
  SolitonProblem p0(zero, HoloField({1.0}), zero, 0.0, 0.2);
  SolveReport rep = newton_solve(p0);
  CHECK_THROWS_AS(c0_ledger(rep), StateError);
  CHECK_THROWS_AS(znorm_ledger(rep), StateError);
  CHECK_NOTHROW(laplacian_ledger(rep));
  SolveReport unconverged = rep;
  unconverged.converged = false;
  CHECK_THROWS_AS(laplacian_ledger(unconverged), StateError);
  CHECK_THROWS_AS(compute_ledger(unconverged), StateError);
  SolveReport empty;
  CHECK_THROWS_AS(compute_ledger(empty), StateError);

  EstimateLedger l = compute_ledger(rep);
  CHECK_FALSE(l.minpoint_gap.has_value());
  CHECK_FALSE(l.moser_C.has_value());
  CHECK(l.cherrier.empty());
  CHECK(l.zhu_sup.has_value());
}

TEST_CASE("laplacian and cherrier oracles") {
  GridSpec g(1, 32);
  RealField zero(g);
  SolitonProblem p(zero, HoloField({1.0}), zero, -1.0, 0.5);
  const double a = 0.3;
  RealField u = RealField::from_function(g, [&](std::span<const double> x) { return a * std::cos(x[0]); });
  SolveReport rep = fake_report(p, u);

  // Δ(a cos x) = g^{1 1̄} u_{1 1̄} = −(a/4) cos x on the flat torus.
  LaplacianLedger lap = laplacian_ledger(rep);
  CHECK(lap.sup_lap_u == doctest::Approx(a / 4.0).epsilon(1e-12));
  // |Z|²_g̃ = 1 + u_{1 1̄} with u_{1 1̄} = −(a/4) cos x.
  CHECK(lap.sup_znorm_tilde == doctest::Approx(1.0 + a / 4.0).epsilon(1e-12));
  CHECK(lap.fitted_C == doctest::Approx((a / 4.0) / (1.0 + a / 4.0)).epsilon(1e-12));

  const double period = 2.0 * std::numbers::pi;
  for (double q : {2.0, 4.0, 8.0, 16.0}) {
    CherrierEntry e = cherrier_check(rep, q);
    // |∂f|² = |f_x|²/4 with f = exp(−q a cos x / 2); midpoint rule on a
    // fine grid of the analytic integrand.
    const int M = 4096;
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < M; ++i) {
      const double x = period * (i + 0.5) / M;
      const double f = std::exp(-0.5 * q * a * std::cos(x));
      const double fx = 0.5 * q * a * std::sin(x) * f;
      lhs += 0.25 * fx * fx;
      rhs += std::exp(-(q - 1.0) * a * std::cos(x));
    }
    lhs *= period * period / M;
    rhs *= q * q * period * period / M;
    CHECK(e.lhs == doctest::Approx(lhs).epsilon(1e-10));
    CHECK(e.rhs_core == doctest::Approx(rhs).epsilon(1e-10));
  }

  // Scaling Z by 2 quadruples |Z|²_g̃.
  SolitonProblem p2(zero, HoloField({2.0}), zero, -1.0, 0.5);
  CHECK(laplacian_ledger(fake_report(p2, u)).sup_znorm_tilde ==
        doctest::Approx(4.0 * lap.sup_znorm_tilde).epsilon(1e-13));

  RealField y = RealField::from_function(g, [](std::span<const double> x) { return 0.1 * std::cos(x[1]); });
  CHECK_THROWS_AS(cherrier_check(fake_report(p, y), 2.0), PreconditionError);
  CHECK_THROWS_AS(cherrier_check(rep, 0.5), DomainError);
}

TEST_CASE("manufactured family") {
  for (int run = 0; run < 20; ++run) {
    CAPTURE(run);
    SolveReport rep = solved_invariant(run % 2 + 1, run % 2 ? 16 : 32, 0.1, 100 + run);
    REQUIRE(rep.converged);
    EstimateLedger l = compute_ledger(rep);
    CHECK(l.sup_u >= l.inf_u);
    REQUIRE(l.minpoint_gap.has_value());
    CHECK(*l.minpoint_gap >= -1e-6);
    CHECK(*l.maxpoint_witness >= -1e-4);
    CHECK(l.sup_lap_u <= l.fitted_C * l.sup_znorm_tilde + l.fitted_C + 1e-8);
    REQUIRE(l.zhu_imag.has_value());
    CHECK(*l.zhu_imag <= 1e-8);
    REQUIRE(l.cherrier.size() == 4);
    CHECK(*l.cherrier_C <= 1e3);
    CHECK(*l.moser_C <= std::exp(2.0 * (l.sup_u - l.inf_u)) * (1.0 + 1e-12));
    CHECK(*l.moser_C <= 1e6);
  }
}

TEST_CASE("ledger determinism") {
  SolveReport rep = solved_invariant(2, 16, 0.05, 7);
  EstimateLedger a = compute_ledger(rep);
  EstimateLedger b = compute_ledger(rep);
  CHECK(a.sup_lap_u == b.sup_lap_u);
  CHECK(a.fitted_C == b.fitted_C);
  CHECK(*a.cherrier_C == *b.cherrier_C);
  CHECK(*a.maxpoint_witness == *b.maxpoint_witness);
  CHECK(a.hypothesis_min == b.hypothesis_min);
}

TEST_CASE("hypothesis ledger") {
  GridSpec g(2, 32);
  HoloField Z({1.0, 0.0});
  RealField phi = RealField::from_function(g, [](std::span<const double> x) {
    return 0.3 * std::cos(x[2]) + 0.2 * std::sin(x[2] + x[3]);
  });
  SolitonProblem p(phi, Z, RealField(g), -1.0, 0.1);
  CHECK(hypothesis_ledger(p) >= -1e-8);
}

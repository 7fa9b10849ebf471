#pragma once

// A priori estimates evaluated on converged solves. Laplacians are taken
// with respect to the background metric g. Ties in argmin/argmax go to the
// lowest flat index.

#include <optional>
#include <vector>

#include "vsoliton/solver.hpp"

namespace vsoliton {

struct C0Ledger {
  double inf_u = 0.0;
  double sup_u = 0.0;
  /// log((|Z|²_g̃ + ε) e^{F + c_ε + u}) at argmin u.
  double minpoint_gap = 0.0;
};

/// Requires a converged λ = −1 report.
C0Ledger c0_ledger(const SolveReport& report);

struct LaplacianLedger {
  double sup_lap_u = 0.0;
  double sup_znorm_tilde = 0.0;
  /// max(sup Δu, 0) / max(sup |Z|²_g̃, 1).
  double fitted_C = 0.0;
};

LaplacianLedger laplacian_ledger(const SolveReport& report);

struct ZnormLedger {
  double sup_znorm_tilde = 0.0;
  /// −Δ_{g̃_H}(|Z|²_g̃) at argmax |Z|²_g̃; non-negative at a true maximum.
  double maxpoint_witness = 0.0;
};

/// Requires a converged λ = −1 report.
ZnormLedger znorm_ledger(const SolveReport& report);

/// lhs = ∫ |∂e^{−pu/2}|²_g ωⁿ, rhs_core = p² ∫ e^{−(p−1)u} ωⁿ. Requires a
/// converged λ = −1 report and u invariant along V.
CherrierEntry cherrier_check(const SolveReport& report, double p);

/// Smallest C with lhs <= C rhs_core over the entries.
double cherrier_constant(const std::vector<CherrierEntry>& entries);

/// min over nodes of |div Z|² − Ric(Z, Z̄) on the background metric.
double hypothesis_ledger(const SolitonProblem& problem);

struct MoserEndpoint {
  double lhs = 0.0;       // e^{−q inf u}
  double integral = 0.0;  // ∫ e^{−qu} ωⁿ / ∫ ωⁿ
  double C = 0.0;         // lhs / integral
};

/// Requires a converged λ = −1 report.
MoserEndpoint moser_endpoint(const SolveReport& report, double q = 2.0);

/// Everything that applies to the report. λ = −1 entries are skipped for
/// other λ; Zhu and Cherrier entries only appear for V-invariant u.
/// hypothesis_min depends on the background only; pass it to skip the
/// recomputation along an ε sweep.
EstimateLedger compute_ledger(const SolveReport& report,
                              const std::vector<double>& cherrier_p = {2.0, 4.0, 8.0, 16.0},
                              std::optional<double> hypothesis_min = std::nullopt);

}  // namespace vsoliton

#pragma once

// solve, verify and sweep. Each command writes its artifacts into
// config.output_dir and returns the process exit code: 0 on success, 1 on a
// solver or check failure, 2 on a configuration error.

#include <iosfwd>
#include <string>
#include <vector>

#include "vsoliton/cli/config.hpp"
#include "vsoliton/cli/report.hpp"
#include "vsoliton/solver.hpp"

namespace vsoliton::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

/// Problem at the given ε. Manufactured configs build F from u* at this ε.
/// Invalid data (non-positive background metric, aliased fields) is a
/// ConfigError.
SolitonProblem build_problem(const RunConfig& config, double eps);

/// Zero, or a seeded random field of max norm initial_amplitude.
RealField initial_guess(const RunConfig& config);

struct SuiteResult {
  std::vector<CheckResult> checks;
  Json data = Json::object();

  bool passed() const;
};

SuiteResult identities_suite(const RunConfig& config);
SuiteResult estimates_suite(const RunConfig& config);
SuiteResult reduction_suite(const RunConfig& config);

int cmd_solve(const RunConfig& config, std::ostream& log);
int cmd_verify(const RunConfig& config, std::ostream& log);
int cmd_sweep(const RunConfig& config, std::ostream& log);

/// Full command line handling: `vsoliton <solve|verify|sweep> --config PATH
/// [--out DIR] [--seed INT] [--suites LIST]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vsoliton::cli

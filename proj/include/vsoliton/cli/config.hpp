#pragma once

// Run configuration, read from a YAML document:
//
//   grid:     {n: 2, N: 32, period: 6.283185307179586}
//   problem:
//     phi: "0.05*cos(1,0,0,0)"
//     Z: [[1, 0], [0.5, -0.5]]        # one [re, im] pair per dimension
//     F: "0.1*sin(0,0,1,0)"           # or "manufactured" together with u_star
//     u_star: "0.05*cos(1,0,0,0)"
//     lambda: -1
//     eps: 0.1                        # or eps_schedule: [1, 0.1, 0.01]
//     band_limit_guard: true
//     initial_guess: zero             # or random (amplitude initial_amplitude)
//   solver:   {max_newton_iters: 50, residual_tol: 1e-10, ...}
//   verify:   {identity_samples: 20, lemma41_samples: 100, ...}
//   suites:   [identities, estimates, reduction]
//   output:   {dir: out}
//   seed: 42
//
// Every key is optional except where a command needs it; unknown keys are
// rejected.

#include <cstdint>
#include <string>
#include <vector>

#include "vsoliton/cli/expression.hpp"
#include "vsoliton/errors.hpp"
#include "vsoliton/solver.hpp"

namespace vsoliton::cli {

class ConfigError : public Error {
 public:
  /// line is 1-based; 0 when unknown.
  ConfigError(const std::string& key, int line, const std::string& message);
  const std::string& key() const { return key_; }
  int line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  std::string key_;
  int line_;
  std::string message_;
};

struct GridConfig {
  int n = 1;
  int N = 32;
  double period = 2.0 * 3.14159265358979323846;
};

struct ProblemConfig {
  Expression phi;
  std::vector<cplx> Z{cplx(1.0, 0.0)};
  Expression F;
  bool manufactured = false;
  Expression u_star;
  double lambda = -1.0;
  std::vector<double> eps_schedule{0.1};
  bool band_limit_guard = true;
  bool random_initial_guess = false;
  double initial_amplitude = 0.05;
};

struct VerifyConfig {
  int identity_samples = 20;
  int lemma41_samples = 100;
  int estimate_runs = 4;
  std::vector<double> estimate_schedule{1.0, 0.1, 0.01, 0.001};
  double reduction_tau = 0.5;
  int reduction_samples = 100;
  bool corrupt_derivative = false;
};

struct RunConfig {
  GridConfig grid;
  ProblemConfig problem;
  SolveOptions solver;
  double schedule_floor = 1e-3;
  VerifyConfig verify;
  std::vector<std::string> suites{"identities", "estimates", "reduction"};
  std::string output_dir = ".";
  std::uint64_t seed = 0;
};

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s{"identities", "estimates", "reduction"};
  return s;
}

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Validates cross-field invariants; parse_config already calls it.
void validate_config(const RunConfig& config);

/// Comma separated suite list, e.g. "identities,reduction".
std::vector<std::string> parse_suite_list(const std::string& list);

}  // namespace vsoliton::cli

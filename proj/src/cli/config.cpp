#include "vsoliton/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace vsoliton::cli {

ConfigError::ConfigError(const std::string& key, int line, const std::string& message)
    : Error("config error" + (line > 0 ? " at line " + std::to_string(line) : std::string()) +
            (key.empty() ? std::string() : " (key '" + key + "')") + ": " + message),
      key_(key),
      line_(line),
      message_(message) {}

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

void require_map(const YAML::Node& node, const std::string& key) {
  if (!node.IsMap()) throw ConfigError(key, line_of(node), "expected a mapping");
}

void check_keys(const YAML::Node& node, const std::string& prefix, const std::set<std::string>& allowed) {
  for (const auto& kv : node) {
    const std::string k = kv.first.as<std::string>();
    if (!allowed.count(k)) {
      throw ConfigError(prefix.empty() ? k : prefix + "." + k, line_of(kv.first), "unknown key");
    }
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ConfigError(key, line_of(node), "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key, line_of(node), "cannot convert '" + node.Scalar() + "'");
  }
}

double real(const YAML::Node& node, const std::string& key) {
  const double v = scalar<double>(node, key);
  if (!std::isfinite(v)) throw ConfigError(key, line_of(node), "value must be finite");
  return v;
}

Expression expression(const YAML::Node& node, const std::string& key) {
  const std::string text = scalar<std::string>(node, key);
  try {
    return Expression::parse(text);
  } catch (const ExpressionError& e) {
    throw ConfigError(key, line_of(node), e.what());
  }
}

std::vector<double> real_list(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) throw ConfigError(key, line_of(node), "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(real(node[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

template <class F>
void with_line(const YAML::Node& node, const std::string& key, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key, line_of(node), e.what());
  }
}

void read_grid(const YAML::Node& node, RunConfig& c) {
  require_map(node, "grid");
  check_keys(node, "grid", {"n", "N", "period"});
  if (node["n"]) c.grid.n = scalar<int>(node["n"], "grid.n");
  if (node["N"]) c.grid.N = scalar<int>(node["N"], "grid.N");
  if (node["period"]) c.grid.period = real(node["period"], "grid.period");
  with_line(node, "grid", [&] { GridSpec(c.grid.n, c.grid.N, c.grid.period); });
}

void read_problem(const YAML::Node& node, RunConfig& c) {
  require_map(node, "problem");
  check_keys(node, "problem",
             {"phi", "Z", "F", "u_star", "lambda", "eps", "eps_schedule", "band_limit_guard", "initial_guess",
              "initial_amplitude"});
  ProblemConfig& p = c.problem;
  if (node["phi"]) p.phi = expression(node["phi"], "problem.phi");
  if (node["Z"]) {
    const YAML::Node z = node["Z"];
    if (!z.IsSequence() || z.size() == 0) throw ConfigError("problem.Z", line_of(z), "expected a list of [re, im]");
    p.Z.clear();
    for (std::size_t i = 0; i < z.size(); ++i) {
      const std::string key = "problem.Z[" + std::to_string(i) + "]";
      if (z[i].IsSequence()) {
        if (z[i].size() != 2) throw ConfigError(key, line_of(z[i]), "expected [re, im]");
        p.Z.emplace_back(real(z[i][0], key), real(z[i][1], key));
      } else {
        p.Z.emplace_back(real(z[i], key), 0.0);
      }
    }
  }
  if (node["F"]) {
    const std::string text = scalar<std::string>(node["F"], "problem.F");
    if (text == "manufactured") {
      p.manufactured = true;
    } else {
      p.F = expression(node["F"], "problem.F");
    }
  }
  if (node["u_star"]) p.u_star = expression(node["u_star"], "problem.u_star");
  if (node["lambda"]) p.lambda = real(node["lambda"], "problem.lambda");
  if (node["eps"] && node["eps_schedule"]) {
    throw ConfigError("problem.eps_schedule", line_of(node["eps_schedule"]), "give either eps or eps_schedule");
  }
  if (node["eps"]) p.eps_schedule = {real(node["eps"], "problem.eps")};
  if (node["eps_schedule"]) p.eps_schedule = real_list(node["eps_schedule"], "problem.eps_schedule");
  if (node["band_limit_guard"]) p.band_limit_guard = scalar<bool>(node["band_limit_guard"], "problem.band_limit_guard");
  if (node["initial_guess"]) {
    const std::string g = scalar<std::string>(node["initial_guess"], "problem.initial_guess");
    if (g != "zero" && g != "random") {
      throw ConfigError("problem.initial_guess", line_of(node["initial_guess"]), "expected 'zero' or 'random'");
    }
    p.random_initial_guess = g == "random";
  }
  if (node["initial_amplitude"]) p.initial_amplitude = real(node["initial_amplitude"], "problem.initial_amplitude");
}

void read_solver(const YAML::Node& node, RunConfig& c) {
  require_map(node, "solver");
  check_keys(node, "solver",
             {"max_newton_iters", "residual_tol", "damping", "max_halvings", "linear_tol", "max_linear_iters",
              "positivity_floor", "schedule_floor"});
  SolveOptions& s = c.solver;
  if (node["max_newton_iters"]) s.max_newton_iters = scalar<int>(node["max_newton_iters"], "solver.max_newton_iters");
  if (node["residual_tol"]) s.residual_tol = real(node["residual_tol"], "solver.residual_tol");
  if (node["damping"]) s.damping = real(node["damping"], "solver.damping");
  if (node["max_halvings"]) s.max_halvings = scalar<int>(node["max_halvings"], "solver.max_halvings");
  if (node["linear_tol"]) s.linear_tol = real(node["linear_tol"], "solver.linear_tol");
  if (node["max_linear_iters"]) s.max_linear_iters = scalar<int>(node["max_linear_iters"], "solver.max_linear_iters");
  if (node["positivity_floor"]) s.positivity_floor = real(node["positivity_floor"], "solver.positivity_floor");
  if (node["schedule_floor"]) c.schedule_floor = real(node["schedule_floor"], "solver.schedule_floor");
  with_line(node, "solver", [&] { s.validate(); });
}

void read_verify(const YAML::Node& node, RunConfig& c) {
  require_map(node, "verify");
  check_keys(node, "verify",
             {"identity_samples", "lemma41_samples", "estimate_runs", "estimate_schedule", "reduction_tau",
              "reduction_samples", "corrupt_derivative"});
  VerifyConfig& v = c.verify;
  if (node["identity_samples"]) v.identity_samples = scalar<int>(node["identity_samples"], "verify.identity_samples");
  if (node["lemma41_samples"]) v.lemma41_samples = scalar<int>(node["lemma41_samples"], "verify.lemma41_samples");
  if (node["estimate_runs"]) v.estimate_runs = scalar<int>(node["estimate_runs"], "verify.estimate_runs");
  if (node["estimate_schedule"]) v.estimate_schedule = real_list(node["estimate_schedule"], "verify.estimate_schedule");
  if (node["reduction_tau"]) v.reduction_tau = real(node["reduction_tau"], "verify.reduction_tau");
  if (node["reduction_samples"]) {
    v.reduction_samples = scalar<int>(node["reduction_samples"], "verify.reduction_samples");
  }
  if (node["corrupt_derivative"]) {
    v.corrupt_derivative = scalar<bool>(node["corrupt_derivative"], "verify.corrupt_derivative");
  }
  auto positive = [&](int value, const char* key) {
    if (value <= 0) throw ConfigError(key, line_of(node), "must be positive");
  };
  positive(v.identity_samples, "verify.identity_samples");
  positive(v.lemma41_samples, "verify.lemma41_samples");
  positive(v.estimate_runs, "verify.estimate_runs");
  positive(v.reduction_samples, "verify.reduction_samples");
  if (!(v.reduction_tau > 0.0)) throw ConfigError("verify.reduction_tau", line_of(node), "must be positive");
  with_line(node, "verify.estimate_schedule", [&] { validate_schedule(v.estimate_schedule, c.schedule_floor); });
}

int find_line(const YAML::Node& node, const std::string& key) {
  if (key.empty()) return 0;
  const auto dot = key.find('.');
  const std::string head = key.substr(0, dot);
  if (!node.IsMap()) return 0;
  const YAML::Node child = node[head];
  if (!child) return 0;
  if (dot == std::string::npos) return line_of(child);
  const int deeper = find_line(child, key.substr(dot + 1));
  return deeper ? deeper : line_of(child);
}

}  // namespace

std::vector<std::string> parse_suite_list(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    const auto& known = known_suites();
    if (std::find(known.begin(), known.end(), item) == known.end()) {
      throw ConfigError("suites", 0, "unknown suite '" + item + "'");
    }
    if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
  }
  if (out.empty()) throw ConfigError("suites", 0, "no suites selected");
  return out;
}

void validate_config(const RunConfig& c) {
  with_line(YAML::Node(), "grid", [&] { GridSpec(c.grid.n, c.grid.N, c.grid.period); });
  const ProblemConfig& p = c.problem;
  if (static_cast<int>(p.Z.size()) != c.grid.n) {
    throw ConfigError("problem.Z", 0, "needs " + std::to_string(c.grid.n) + " coefficients for n = " +
                                          std::to_string(c.grid.n));
  }
  if (!(p.lambda <= 0.0)) {
    std::ostringstream os;
    os << "lambda must satisfy lambda <= 0 (got " << p.lambda << ")";
    throw ConfigError("problem.lambda", 0, os.str());
  }
  if (!p.manufactured && !p.u_star.is_zero()) throw ConfigError("problem.u_star", 0, "u_star needs F: manufactured");
  if (!(p.initial_amplitude >= 0.0)) throw ConfigError("problem.initial_amplitude", 0, "must be non-negative");
  try {
    validate_schedule(p.eps_schedule, c.schedule_floor);
  } catch (const Error& e) {
    throw ConfigError("problem.eps_schedule", 0, e.what());
  }
  try {
    c.solver.validate();
  } catch (const Error& e) {
    throw ConfigError("solver", 0, e.what());
  }
  const GridSpec g(c.grid.n, c.grid.N, c.grid.period);
  const int dims = g.dims();
  auto check_dims = [&](const Expression& e, const char* key) {
    for (const auto& t : e.terms()) {
      if (t.kind != TrigTerm::Kind::Constant && static_cast<int>(t.frequency.size()) != dims) {
        throw ConfigError(key, 0, "each wave needs " + std::to_string(dims) + " integer frequencies");
      }
    }
  };
  check_dims(p.phi, "problem.phi");
  check_dims(p.F, "problem.F");
  check_dims(p.u_star, "problem.u_star");
  for (const auto& s : c.suites) {
    const auto& known = known_suites();
    if (std::find(known.begin(), known.end(), s) == known.end()) throw ConfigError("suites", 0, "unknown suite '" + s + "'");
  }
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
  RunConfig c;
  if (root.IsNull()) {
    validate_config(c);
    return c;
  }
  require_map(root, "");
  check_keys(root, "", {"grid", "problem", "solver", "verify", "suites", "output", "seed"});
  if (root["grid"]) read_grid(root["grid"], c);
  if (root["solver"]) read_solver(root["solver"], c);
  if (root["problem"]) read_problem(root["problem"], c);
  if (root["verify"]) read_verify(root["verify"], c);
  if (root["suites"]) {
    const YAML::Node s = root["suites"];
    if (!s.IsSequence()) throw ConfigError("suites", line_of(s), "expected a list");
    std::string joined;
    for (std::size_t i = 0; i < s.size(); ++i) joined += (i ? "," : "") + scalar<std::string>(s[i], "suites");
    try {
      c.suites = parse_suite_list(joined);
    } catch (const ConfigError& e) {
      throw ConfigError("suites", line_of(s), e.what());
    }
  }
  if (root["output"]) {
    const YAML::Node o = root["output"];
    require_map(o, "output");
    check_keys(o, "output", {"dir"});
    if (o["dir"]) c.output_dir = scalar<std::string>(o["dir"], "output.dir");
  }
  if (root["seed"]) c.seed = scalar<std::uint64_t>(root["seed"], "seed");

  // Attach line numbers to the cross-field checks where the key exists.
  try {
    validate_config(c);
  } catch (const ConfigError& e) {
    if (e.line() != 0) throw;
    const int line = find_line(root, e.key());
    if (line == 0) throw;
    throw ConfigError(e.key(), line, e.message());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace vsoliton::cli

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "vsoliton/cli/commands.hpp"
#include "vsoliton/cli/config.hpp"
#include "vsoliton/cli/expression.hpp"
#include "vsoliton/cli/report.hpp"

using namespace vsoliton;
using namespace vsoliton::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("vsoliton_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args, std::string* log = nullptr) {
  args.insert(args.begin(), "vsoliton");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (log) *log = out.str() + err.str();
  return code;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  fs::path p = dir / "config.yaml";
  std::ofstream(p) << text;
  return p;
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

const char* kManufactured = R"yaml(grid: {n: 1, N: 32}
problem:
  phi: "0.1*cos(1,0)"
  Z: [[1, 0]]
  F: manufactured
  u_star: "0.05*cos(1,0) + 0.02*sin(2,0)"
  lambda: -1
  eps_schedule: [1, 0.1, 0.01, 0.001]
  initial_guess: random
seed: 42
)yaml";

}  // namespace

TEST_CASE("expression grammar") {
  Expression e = Expression::parse("0.05*cos(1,0) - 0.02 * sin( 0 , 2 ) + 0.3");
  REQUIRE(e.terms().size() == 3);
  CHECK(e.terms()[1].coefficient == -0.02);
  CHECK(e.terms()[2].kind == TrigTerm::Kind::Constant);
  CHECK(e.max_frequency() == 2);

  GridSpec g(1, 16);
  RealField f = e.evaluate(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coord(i, 0), y = g.coord(i, 1);
    CHECK(f[i] == doctest::Approx(0.05 * std::cos(x) - 0.02 * std::sin(2 * y) + 0.3).epsilon(1e-14));
  }

  // Frequencies are in units of 2π/period.
  GridSpec wide(1, 16, 4.0);
  RealField h = Expression::parse("cos(1,0)").evaluate(wide);
  CHECK(h[wide.ravel({8, 0, 0, 0})] == doctest::Approx(-1.0));

  const Expression r = Expression::parse(e.to_string());
  CHECK(r.to_string() == e.to_string());
  CHECK(Expression::parse("0.1").to_string() == "0.10000000000000001");
  CHECK(Expression::parse("0*cos(1,0)").is_zero());
  CHECK(Expression::parse("-cos(1,1)").terms()[0].coefficient == -1.0);

  CHECK_THROWS_AS(Expression::parse(""), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("cos(1,0"), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("0.1*tan(1)"), ExpressionError);
  CHECK_THROWS_AS(Expression::parse("0.1 0.2"), ExpressionError);
  try {
    Expression::parse("0.1 + x");
    FAIL("expected ExpressionError");
  } catch (const ExpressionError& err) {
    CHECK(err.position() == 6);
  }
  CHECK_THROWS_AS(Expression::parse("cos(1,0,0)").evaluate(g), DomainError);
}

TEST_CASE("config parsing") {
  RunConfig d = parse_config("");
  CHECK(d.grid.n == 1);
  CHECK(d.problem.eps_schedule == std::vector<double>{0.1});
  CHECK(d.suites.size() == 3);

  RunConfig c = parse_config(kManufactured);
  CHECK(c.problem.manufactured);
  CHECK(c.problem.eps_schedule.size() == 4);
  CHECK(c.problem.random_initial_guess);
  CHECK(c.seed == 42);

  auto error_of = [](const std::string& text) -> ConfigError {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e;
    }
    FAIL("expected ConfigError");
    return ConfigError("", 0, "");
  };

  ConfigError unknown = error_of("grid: {n: 1}\nproblem:\n  lambda: -1\n  colour: red\n");
  CHECK(unknown.key() == "problem.colour");
  CHECK(unknown.line() == 4);

  ConfigError lam = error_of("problem:\n  lambda: 1\n");
  CHECK(lam.key() == "problem.lambda");
  CHECK(lam.line() == 2);
  CHECK(std::string(lam.what()).find("lambda <= 0") != std::string::npos);

  CHECK(error_of("problem:\n  eps_schedule: [0.1, 0.2]\n").key() == "problem.eps_schedule");
  CHECK(error_of("problem:\n  eps_schedule: [0.1, 0.0001]\n").key() == "problem.eps_schedule");
  CHECK(error_of("problem:\n  eps: 0.1\n  eps_schedule: [0.1]\n").key() == "problem.eps_schedule");
  CHECK(error_of("grid: {n: 2}\n").key() == "problem.Z");
  CHECK(error_of("grid: {N: 24}\n").key() == "grid");
  CHECK(error_of("problem:\n  phi: \"cos(1,0,0)\"\n").key() == "problem.phi");
  CHECK(error_of("problem:\n  phi: \"cos(1\"\n").key() == "problem.phi");
  CHECK(error_of("problem:\n  u_star: \"cos(1,0)\"\n").key() == "problem.u_star");
  CHECK(error_of("suites: [identities, magic]\n").key() == "suites");
  CHECK(error_of("solver: {damping: 2}\n").key() == "solver");
  CHECK(error_of("grid: [1, 2\n").line() > 0);

  CHECK(parse_suite_list("reduction, identities,reduction") == std::vector<std::string>{"reduction", "identities"});
  CHECK_THROWS_AS(parse_suite_list("nope"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("report serialization") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(std::nullopt).empty());
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);

  Json j = {{"b", 1.0 / 3.0}, {"a", {1, 2}}, {"c", std::nan("")}, {"d", Json::object()}};
  const std::string text = dump_json(j);
  CHECK(text == "{\n  \"a\": [1, 2],\n  \"b\": 0.33333333333333331,\n  \"c\": null,\n  \"d\": {}\n}\n");
  CHECK(Json::parse(text)["b"].get<double>() == 1.0 / 3.0);

  CHECK(iterate_csv_columns().front() == "eps");
  CHECK(ledger_csv_columns().size() == 16);
  CHECK(count_lines(ledger_csv({})) == 1);

  CHECK(check_le("a", 1.0, 1.0).passed);
  CHECK_FALSE(check_gt("a", 0.0, 0.0).passed);
  CHECK_FALSE(check_ge("a", std::nan(""), 0.0).passed);
}

TEST_CASE("solve command") {
  fs::path dir = scratch("solve");
  fs::path cfg = write_config(dir, R"yaml(grid: {n: 1, N: 32}
problem:
  F: "0"
  lambda: -1
  eps: 0.1
  initial_guess: random
solver: {residual_tol: 1e-12}
seed: 3
)yaml");
  CHECK(run({"solve", "--config", cfg.string(), "--out", (dir / "a").string()}) == kExitOk);
  Json report = Json::parse(slurp(dir / "a" / "solve_report.json"));
  std::vector<std::string> keys;
  for (auto it = report.begin(); it != report.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"config_echo", "iterates", "ledger", "suites", "version"});
  CHECK(report["version"] == kReportVersion);
  CHECK(report["ledger"]["runs"][0]["sup_abs_u"].get<double>() <= 1e-10);
  CHECK(report["ledger"]["failure"].is_null());
  const std::string csv = slurp(dir / "a" / "solve_iterates.csv");
  CHECK(count_lines(csv) == 1 + static_cast<int>(report["iterates"].size()));

  fs::path bad = write_config(dir, "problem:\n  lambda: 1\n");
  std::string log;
  CHECK(run({"solve", "--config", bad.string(), "--out", (dir / "b").string()}, &log) == kExitConfig);
  CHECK(log.find("problem.lambda") != std::string::npos);
  CHECK(log.find("line 2") != std::string::npos);

  fs::path stalled = write_config(dir, "problem:\n  F: \"0.3*cos(1,0)\"\nsolver: {max_newton_iters: 1}\n");
  CHECK(run({"solve", "--config", stalled.string(), "--out", (dir / "c").string()}, &log) == kExitFailure);
  CHECK(log.find("stage 'iterations'") != std::string::npos);
  Json partial = Json::parse(slurp(dir / "c" / "solve_report.json"));
  CHECK(partial["ledger"]["failure"]["stage"] == "iterations");
  CHECK(partial["iterates"].size() == 2);

  fs::path steep = write_config(dir, "problem:\n  phi: \"5*cos(1,0)\"\n");
  CHECK(run({"solve", "--config", steep.string(), "--out", (dir / "d").string()}, &log) == kExitConfig);
  CHECK(log.find("problem.phi") != std::string::npos);

  CHECK(run({"solve"}) == kExitConfig);
  CHECK(run({"bogus"}) == kExitConfig);
  CHECK(run({"--help"}) == kExitOk);
}

TEST_CASE("manufactured solve is deterministic") {
  fs::path dir = scratch("determinism");
  fs::path cfg = write_config(dir, kManufactured);
  for (const char* sub : {"a", "b"}) {
    CHECK(run({"solve", "--config", cfg.string(), "--out", (dir / sub).string()}) == kExitOk);
  }
  CHECK(slurp(dir / "a" / "solve_report.json") == slurp(dir / "b" / "solve_report.json"));
  CHECK(slurp(dir / "a" / "solve_iterates.csv") == slurp(dir / "b" / "solve_iterates.csv"));

  CHECK(run({"solve", "--config", cfg.string(), "--out", (dir / "c").string(), "--seed", "43"}) == kExitOk);
  CHECK(slurp(dir / "a" / "solve_report.json") != slurp(dir / "c" / "solve_report.json"));
}

TEST_CASE("sweep command") {
  fs::path dir = scratch("sweep");
  fs::path cfg = write_config(dir, kManufactured);
  CHECK(run({"sweep", "--config", cfg.string(), "--out", dir.string()}) == kExitOk);
  const std::string ledger = slurp(dir / "sweep_ledger.csv");
  CHECK(count_lines(ledger) == 5);
  // Every ledger column is populated on the invariant λ = −1 family.
  std::istringstream rows(ledger);
  std::string row;
  std::getline(rows, row);
  while (std::getline(rows, row)) CHECK(row.find(",,") == std::string::npos);
  for (int k = 0; k < 4; ++k) CHECK(fs::exists(dir / ("sweep_eps_" + std::to_string(k) + ".json")));
  Json report = Json::parse(slurp(dir / "sweep_report.json"));
  CHECK(report["ledger"]["runs"].size() == 4);

  // A one-point schedule has solve semantics.
  fs::path one = write_config(dir, "grid: {n: 1, N: 32}\nproblem:\n  F: \"0.2*cos(1,0)\"\n  eps: 0.1\n");
  CHECK(run({"sweep", "--config", one.string(), "--out", (dir / "s").string()}) == kExitOk);
  CHECK(run({"solve", "--config", one.string(), "--out", (dir / "s").string()}) == kExitOk);
  Json a = Json::parse(slurp(dir / "s" / "sweep_report.json"));
  Json b = Json::parse(slurp(dir / "s" / "solve_report.json"));
  CHECK(a["ledger"] == b["ledger"]);
  CHECK(a["iterates"] == b["iterates"]);

  fs::path bad = write_config(dir, "problem:\n  eps_schedule: [0.1, 0.1]\n");
  CHECK(run({"sweep", "--config", bad.string(), "--out", (dir / "x").string()}) == kExitConfig);
}

TEST_CASE("verify command") {
  fs::path dir = scratch("verify");
  fs::path cfg = write_config(dir, R"yaml(suites: [identities]
verify: {identity_samples: 20, lemma41_samples: 4}
seed: 7
)yaml");
  std::string log;
  CHECK(run({"verify", "--config", cfg.string(), "--out", dir.string()}, &log) == kExitOk);
  Json report = Json::parse(slurp(dir / "verify_report.json"));
  for (const auto& chk : report["suites"]["identities"]["checks"]) {
    CHECK(chk["passed"].get<bool>());
    if (chk["name"] == "check_vjv_identity" || chk["name"] == "check_div_ricci") {
      CHECK(chk["value"].get<double>() <= 1e-8);
    }
  }
  CHECK(report["suites"]["identities"]["data"]["identity_samples"].size() == 20);

  CHECK(run({"verify", "--config", cfg.string(), "--out", dir.string(), "--suites", "reduction"}) == kExitOk);
  report = Json::parse(slurp(dir / "verify_report.json"));
  CHECK(report["suites"]["reduction"]["data"]["reduced_metric"]["samples"] == 100);
  CHECK(report["suites"]["reduction"]["data"]["reduced_metric"]["max_residual"].get<double>() <= 1e-8);

  fs::path broken = write_config(dir, R"yaml(suites: [identities]
verify: {identity_samples: 2, lemma41_samples: 1, corrupt_derivative: true}
)yaml");
  CHECK(run({"verify", "--config", broken.string(), "--out", dir.string()}, &log) == kExitFailure);
  CHECK(log.find("failed checks: check_div_ricci") != std::string::npos);

  CHECK(run({"verify", "--config", cfg.string(), "--out", dir.string(), "--suites", "magic"}) == kExitConfig);
}

TEST_CASE("estimates suite") {
  RunConfig c;
  c.verify.estimate_runs = 2;
  c.seed = 5;
  SuiteResult s = estimates_suite(c);
  CHECK(s.passed());
  CHECK(s.checks.size() == 13);
  CHECK(s.data["families"].size() == 2);
}

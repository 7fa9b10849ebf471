#include "vsoliton/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "vsoliton/estimates.hpp"
#include "vsoliton/fields.hpp"
#include "vsoliton/geometry.hpp"
#include "vsoliton/reduction.hpp"

namespace vsoliton::cli {

namespace {

constexpr double kIdentityTol = 1e-8;
constexpr double kLemma41Tol = 1e-8;
constexpr double kLemma41FlatTol = 1e-10;
constexpr double kGapTol = -1e-6;
constexpr double kWitnessTol = -1e-4;
constexpr double kBoundSlack = 1e-8;
constexpr double kUniformityRatio = 2.0;
constexpr double kZhuImagTol = 1e-8;
constexpr double kCherrierMax = 1e3;
constexpr double kMoserMax = 1e6;
constexpr double kHamiltonianRatioTol = 0.5;
constexpr double kTransportTol = 1e-6;
constexpr double kReducedMetricTol = 1e-8;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

GridSpec config_grid(const RunConfig& c) { return GridSpec(c.grid.n, c.grid.N, c.grid.period); }

HoloField rational_field(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coef(-2, 2);
  std::uniform_real_distribution<double> scale(0.5, 1.5);
  const double s = scale(rng);
  std::vector<cplx> z(static_cast<std::size_t>(n));
  double norm = 0.0;
  do {
    for (auto& c : z) c = cplx(coef(rng), coef(rng));
    norm = 0.0;
    for (auto c : z) norm += std::norm(c);
  } while (norm == 0.0);
  for (auto& c : z) c *= s / std::sqrt(norm);
  return HoloField(z);
}

HoloField normal_field(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<cplx> z(static_cast<std::size_t>(n));
  for (auto& c : z) c = cplx(nd(rng), nd(rng));
  return HoloField(z);
}

RealField smooth_field(const GridSpec& g, std::mt19937_64& rng, double amplitude, std::vector<double> orthogonal = {}) {
  RandomFieldOptions opts;
  opts.max_mode = 2;
  opts.terms = 5;
  opts.amplitude = amplitude;
  opts.orthogonal_to = std::move(orthogonal);
  return random_band_limited(g, rng, opts);
}

double potential_amplitude(int n) { return n == 1 ? 0.1 : 0.05; }

Json empty_report(const RunConfig& c) {
  return {{"version", kReportVersion},
          {"config_echo", config_to_json(c)},
          {"iterates", Json::array()},
          {"ledger", {{"runs", Json::array()}, {"failure", nullptr}}},
          {"suites", Json::object()}};
}

Json failure_to_json(const ContinuationFailure& f) {
  return {{"eps", f.eps}, {"stage", f.stage}, {"message", f.message}};
}

void attach_ledgers(std::vector<SolveReport>& reports, std::ostream& log) {
  if (reports.empty()) return;
  const double hyp = hypothesis_ledger(*reports.front().problem);
  for (auto& r : reports) {
    try {
      r.ledger = compute_ledger(r, {2.0, 4.0, 8.0, 16.0}, hyp);
    } catch (const Error& e) {
      log << "note: no estimate ledger at eps=" << fmt(r.problem->eps()) << ": " << e.what() << "\n";
    }
  }
}

Json path_report(const RunConfig& c, const std::vector<SolveReport>& reports,
                 const std::optional<ContinuationFailure>& failure) {
  Json report = empty_report(c);
  for (const auto& r : reports) {
    for (auto& it : iterates_to_json(r)) report["iterates"].push_back(it);
    report["ledger"]["runs"].push_back(run_to_json(r));
  }
  if (failure) report["ledger"]["failure"] = failure_to_json(*failure);
  return report;
}

Json path_report(const RunConfig& c, const ContinuationResult& res) {
  std::vector<SolveReport> all = res.reports;
  if (res.last_attempt) all.push_back(*res.last_attempt);
  return path_report(c, all, res.failure);
}

std::vector<SolveReport> attempted(const ContinuationResult& res) {
  std::vector<SolveReport> all = res.reports;
  if (res.last_attempt) all.push_back(*res.last_attempt);
  return all;
}

ContinuationResult solve_path(const RunConfig& c, std::ostream& log) {
  const auto& schedule = c.problem.eps_schedule;
  SolitonProblem base = build_problem(c, schedule.front());
  const auto t0 = std::chrono::steady_clock::now();
  ContinuationResult res = continuation_solve(base, schedule, initial_guess(c), c.solver, c.schedule_floor);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& r : res.reports) {
    log << "eps=" << fmt(r.problem->eps()) << " converged in " << r.newton_steps() << " steps, residual "
        << fmt(r.final_residual) << "\n";
  }
  log << "solve time " << fmt(secs) << " s\n";
  attach_ledgers(res.reports, log);
  return res;
}

int report_failure(const ContinuationFailure& f, std::ostream& log) {
  log << "solver failure at eps=" << fmt(f.eps) << " in stage '" << f.stage << "': " << f.message << "\n";
  return kExitFailure;
}

std::filesystem::path prepare_output(const RunConfig& c) {
  std::filesystem::path dir(c.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("output.dir", 0, "cannot create '" + c.output_dir + "': " + ec.message());
  return dir;
}

int guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

double ratio(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo <= 0.0) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

double max_of(const std::vector<double>& v) { return v.empty() ? kNaN : *std::max_element(v.begin(), v.end()); }
double min_of(const std::vector<double>& v) { return v.empty() ? kNaN : *std::min_element(v.begin(), v.end()); }

}  // namespace

bool SuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

SolitonProblem build_problem(const RunConfig& c, double eps) {
  const GridSpec grid = config_grid(c);
  BandLimitGuard guard;
  guard.enabled = c.problem.band_limit_guard;
  const RealField phi = c.problem.phi.evaluate(grid);
  const HoloField Z(c.problem.Z);
  try {
    assemble_metric(phi, c.solver.positivity_floor, guard);
  } catch (const Error& e) {
    throw ConfigError("problem.phi", 0, e.what());
  }
  try {
    if (c.problem.manufactured) {
      return manufactured_problem(c.problem.u_star.evaluate(grid), phi, Z, c.problem.lambda, eps, guard);
    }
    return SolitonProblem(phi, Z, c.problem.F.evaluate(grid), c.problem.lambda, eps, guard);
  } catch (const Error& e) {
    throw ConfigError(c.problem.manufactured ? "problem.u_star" : "problem.F", 0, e.what());
  }
}

RealField initial_guess(const RunConfig& c) {
  const GridSpec grid = config_grid(c);
  if (!c.problem.random_initial_guess || c.problem.initial_amplitude == 0.0) return RealField(grid);
  std::mt19937_64 rng(c.seed);
  RandomFieldOptions opts;
  opts.amplitude = c.problem.initial_amplitude;
  return random_band_limited(grid, rng, opts);
}

SuiteResult identities_suite(const RunConfig& c) {
  SuiteResult out;
  std::mt19937_64 rng(c.seed);
  DivRicciOptions dr_opts;
  dr_opts.corrupt_derivative = c.verify.corrupt_derivative;

  Json samples = Json::array();
  double vjv_max = 0.0;
  double dr_max = 0.0;
  for (int i = 0; i < c.verify.identity_samples; ++i) {
    const int n = i % 2 == 0 ? 1 : 2;
    const GridSpec g(n, n == 1 ? 64 : 32);
    const HoloField Z = rational_field(n, rng);
    const RealField phi = smooth_field(g, rng, potential_amplitude(n));
    const RealField u = smooth_field(g, rng, 0.1, Z.V());
    const double vjv = check_vjv_identity(u, Z);
    const double dr = check_div_ricci(assemble_metric(phi), Z, dr_opts);
    vjv_max = std::max(vjv_max, vjv);
    dr_max = std::max(dr_max, dr);
    samples.push_back({{"n", n}, {"N", g.N()}, {"check_vjv_identity", vjv}, {"check_div_ricci", dr}});
  }
  out.data["identity_samples"] = samples;
  out.checks.push_back(check_le("check_vjv_identity", vjv_max, kIdentityTol));
  out.checks.push_back(check_le("check_div_ricci", dr_max, kIdentityTol));

  Json scan = Json::array();
  std::uniform_real_distribution<double> expo(-3.0, 0.0);
  double lemma_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.verify.lemma41_samples; ++i) {
    const int n = i % 2 == 0 ? 1 : 2;
    const GridSpec g(n, n == 1 ? 64 : 32);
    const RealField phi = smooth_field(g, rng, potential_amplitude(n));
    const HoloField Z = normal_field(n, rng);
    const double eps = std::pow(10.0, expo(rng));
    const double v = lemma41_min_eig(assemble_metric(phi), Z, eps);
    lemma_min = std::min(lemma_min, v);
    scan.push_back({{"n", n}, {"eps", eps}, {"lemma41_min_eig", v}});
  }
  out.data["lemma41_samples"] = scan;
  if (c.verify.lemma41_samples > 0) out.checks.push_back(check_ge("lemma41_min_eig", lemma_min, -kLemma41Tol));

  const GridSpec flat(2, 16);
  const double flat_value = lemma41_min_eig(assemble_metric(RealField(flat)), HoloField({1.0, cplx(0.5, 0.5)}), 0.1);
  out.data["lemma41_flat"] = flat_value;
  out.checks.push_back(check_le("lemma41_flat", std::abs(flat_value), kLemma41FlatTol));
  return out;
}

SuiteResult estimates_suite(const RunConfig& c) {
  SuiteResult out;
  std::mt19937_64 rng(c.seed);
  const GridSpec g = config_grid(c);
  const auto& schedule = c.verify.estimate_schedule;

  int failures = 0;
  std::vector<double> gaps, witnesses, slack, zhu_imag, cherrier, moser, op_eigs;
  double worst_sup_u = 0.0, worst_fitted = 0.0, worst_znorm = 0.0, worst_zhu = 0.0;
  Json families = Json::array();
  for (int r = 0; r < c.verify.estimate_runs; ++r) {
    const HoloField Z = rational_field(g.n(), rng);
    const RealField phi = smooth_field(g, rng, potential_amplitude(g.n()), Z.V());
    const RealField u_star = smooth_field(g, rng, 0.1, Z.V());
    const SolitonProblem base = manufactured_problem(u_star, phi, Z, -1.0, schedule.front());
    ContinuationResult res = continuation_solve(base, schedule, c.solver, c.schedule_floor);
    Json family = {{"runs", Json::array()}, {"failure", nullptr}};
    if (res.failure) {
      ++failures;
      family["failure"] = failure_to_json(*res.failure);
    }
    std::vector<double> sup_u, fitted, znorm, zhu;
    const double hyp = hypothesis_ledger(base);
    for (auto& rep : res.reports) {
      rep.ledger = compute_ledger(rep, {2.0, 4.0, 8.0, 16.0}, hyp);
      const EstimateLedger& l = *rep.ledger;
      sup_u.push_back(std::max(std::abs(l.sup_u), std::abs(l.inf_u)));
      fitted.push_back(l.fitted_C);
      znorm.push_back(l.sup_znorm_tilde);
      slack.push_back(l.sup_lap_u - l.fitted_C * l.sup_znorm_tilde - l.fitted_C);
      op_eigs.push_back(rep.min_operator_eigenvalue());
      if (l.minpoint_gap) gaps.push_back(*l.minpoint_gap);
      if (l.maxpoint_witness) witnesses.push_back(*l.maxpoint_witness);
      if (l.zhu_imag) zhu_imag.push_back(*l.zhu_imag);
      if (l.zhu_sup) zhu.push_back(*l.zhu_sup);
      if (l.cherrier_C) cherrier.push_back(*l.cherrier_C);
      if (l.moser_C) moser.push_back(*l.moser_C);
      family["runs"].push_back(run_to_json(rep));
    }
    if (!res.failure) {
      worst_sup_u = std::max(worst_sup_u, ratio(sup_u));
      worst_fitted = std::max(worst_fitted, ratio(fitted));
      worst_znorm = std::max(worst_znorm, ratio(znorm));
      if (!zhu.empty()) worst_zhu = std::max(worst_zhu, ratio(zhu));
    }
    family["uniformity"] = {{"sup_abs_u", ratio(sup_u)}, {"fitted_C", ratio(fitted)}, {"sup_znorm_tilde", ratio(znorm)},
                            {"zhu_sup", ratio(zhu)}};
    families.push_back(family);
  }
  out.data["families"] = families;

  GridSpec g2(2, 32);
  const RealField phi = RealField::from_function(
      g2, [](std::span<const double> x) { return 0.3 * std::cos(x[2]) + 0.2 * std::sin(x[2] + x[3]); });
  const double hyp = hypothesis_ledger(SolitonProblem(phi, HoloField({1.0, 0.0}), RealField(g2), -1.0, 0.1));
  out.data["hypothesis_ric_nonpositive"] = hyp;

  out.checks.push_back(check_le("estimates_converged", failures, 0.0, "failed families"));
  out.checks.push_back(check_gt("ellipticity_min_eig", min_of(op_eigs), 0.0));
  out.checks.push_back(check_ge("minpoint_gap", min_of(gaps), kGapTol));
  out.checks.push_back(check_ge("maxpoint_witness", min_of(witnesses), kWitnessTol));
  out.checks.push_back(check_le("laplacian_bound", max_of(slack), kBoundSlack,
                                "sup lap u - fitted_C (sup |Z|^2 + 1)"));
  out.checks.push_back(check_le("uniformity_sup_u", worst_sup_u, kUniformityRatio, "max/min over the schedule"));
  out.checks.push_back(check_le("uniformity_fitted_C", worst_fitted, kUniformityRatio, "max/min over the schedule"));
  out.checks.push_back(
      check_le("uniformity_sup_znorm_tilde", worst_znorm, kUniformityRatio, "max/min over the schedule"));
  out.checks.push_back(check_le("uniformity_zhu_sup", worst_zhu, kUniformityRatio, "max/min over the schedule"));
  out.checks.push_back(check_le("zhu_imag", max_of(zhu_imag), kZhuImagTol));
  out.checks.push_back(check_le("cherrier_C", max_of(cherrier), kCherrierMax));
  out.checks.push_back(check_le("moser_C", max_of(moser), kMoserMax));
  out.checks.push_back(check_ge("hypothesis_ric_nonpositive", hyp, -kLemma41Tol));
  return out;
}

SuiteResult reduction_suite(const RunConfig& c) {
  SuiteResult out;
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> nd;
  const double tau = c.verify.reduction_tau;
  auto on_level = [&] {
    cplx a(nd(rng), nd(rng)), b(nd(rng), nd(rng));
    const double s = std::sqrt(2.0 * tau / (std::norm(a) + std::norm(b)));
    return LocalModelPoint(s * a, s * b);
  };

  double worst_dev = 0.0;
  Json ratios = Json::array();
  for (int i = 0; i < 10; ++i) {
    const LocalModelPoint p = on_level();
    const double q = check_hamiltonian(p, 1e-2) / check_hamiltonian(p, 5e-3);
    ratios.push_back(q);
    worst_dev = std::max(worst_dev, std::abs(q - 4.0));
  }
  out.data["hamiltonian_ratios"] = ratios;
  out.checks.push_back(check_le("check_hamiltonian_order", worst_dev, kHamiltonianRatioTol, "max |ratio - 4|"));

  double transport = 0.0;
  try {
    for (int i = 0; i < 10; ++i) {
      const LocalModelPoint p = on_level();
      for (double t : {0.1, 0.3}) {
        const FlowResult f = flow_U(p, t);
        transport =
            std::max(transport, std::abs(moment_map(f.point) - moment_map(p) - kTransportConstant * t));
      }
    }
  } catch (const TrajectoryError& e) {
    out.data["transport_error"] = e.what();
    transport = kNaN;
  }
  out.checks.push_back(check_le("transport", transport, kTransportTol));

  const ReducedMetricReport rm = reduced_metric_check(tau, c.verify.reduction_samples, c.seed);
  out.data["reduced_metric"] = {{"max_residual", rm.max_residual},
                                {"max_projection_residual", rm.max_projection_residual},
                                {"min_gram_det", rm.min_gram_det},
                                {"samples", rm.samples},
                                {"resampled", rm.resampled}};
  out.checks.push_back(check_le("reduced_metric", rm.max_residual, kReducedMetricTol));
  out.checks.push_back(check_le("horizontal_projection", rm.max_projection_residual, kReducedMetricTol));
  return out;
}

int cmd_solve(const RunConfig& c, std::ostream& log) {
  return guarded(log, [&] {
    const auto dir = prepare_output(c);
    ContinuationResult res = solve_path(c, log);
    write_text_file((dir / "solve_report.json").string(), dump_json(path_report(c, res)));
    write_text_file((dir / "solve_iterates.csv").string(), iterates_csv(attempted(res)));
    if (res.failure) return report_failure(*res.failure, log);
    return kExitOk;
  });
}

int cmd_sweep(const RunConfig& c, std::ostream& log) {
  return guarded(log, [&] {
    const auto dir = prepare_output(c);
    ContinuationResult res = solve_path(c, log);
    for (std::size_t k = 0; k < res.reports.size(); ++k) {
      const std::vector<SolveReport> one{res.reports[k]};
      write_text_file((dir / ("sweep_eps_" + std::to_string(k) + ".json")).string(),
                      dump_json(path_report(c, one, std::nullopt)));
    }
    write_text_file((dir / "sweep_report.json").string(), dump_json(path_report(c, res)));
    write_text_file((dir / "sweep_iterates.csv").string(), iterates_csv(attempted(res)));
    write_text_file((dir / "sweep_ledger.csv").string(), ledger_csv(attempted(res)));
    if (res.failure) return report_failure(*res.failure, log);
    return kExitOk;
  });
}

int cmd_verify(const RunConfig& c, std::ostream& log) {
  return guarded(log, [&] {
    const auto dir = prepare_output(c);
    Json report = empty_report(c);
    std::vector<std::string> failed;
    for (const auto& name : c.suites) {
      const auto t0 = std::chrono::steady_clock::now();
      SuiteResult s = name == "identities" ? identities_suite(c)
                      : name == "estimates" ? estimates_suite(c)
                                            : reduction_suite(c);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (const auto& chk : s.checks) {
        log << (chk.passed ? "PASS " : "FAIL ") << name << "/" << chk.name << " " << fmt(chk.value) << " "
            << chk.comparison << " " << fmt(chk.threshold) << "\n";
        if (!chk.passed) failed.push_back(chk.name);
      }
      log << "suite " << name << " took " << fmt(secs) << " s\n";
      report["suites"][name] = {{"checks", checks_to_json(s.checks)}, {"data", s.data}, {"passed", s.passed()}};
    }
    write_text_file((dir / "verify_report.json").string(), dump_json(report));
    if (!failed.empty()) {
      log << "failed checks:";
      for (const auto& f : failed) log << " " << f;
      log << "\n";
      return kExitFailure;
    }
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical lab for the perturbed scalar V-soliton equation on flat tori", "vsoliton"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string suites;
  std::vector<CLI::App*> subs;
  for (const char* name : {"solve", "verify", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name, std::string(name) == "solve"    ? "Solve along the configured eps schedule"
                                             : std::string(name) == "verify" ? "Run the randomized check suites"
                                                                             : "Continuation sweep with estimate ledger");
    sub->add_option("--config", config_path, "YAML run configuration")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "Seed (overrides the config)");
    sub->add_option("--suites", suites, "Comma separated suites: identities,estimates,reduction");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunConfig config;
  try {
    config = load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    for (CLI::App* sub : subs) {
      if (sub->parsed() && sub->count("--seed") > 0) config.seed = seed;
    }
    if (!suites.empty()) config.suites = parse_suite_list(suites);
    validate_config(config);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }

  if (subs[0]->parsed()) return cmd_solve(config, err);
  if (subs[1]->parsed()) return cmd_verify(config, err);
  return cmd_sweep(config, err);
}

}  // namespace vsoliton::cli

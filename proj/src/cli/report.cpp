#include "vsoliton/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace vsoliton::cli {

namespace {

void emit(const Json& v, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        emit(it.value(), out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      if (std::none_of(v.begin(), v.end(), [](const Json& e) { return e.is_structured(); })) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          emit(v[i], out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        emit(v[i], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      if (std::isfinite(v.get<double>())) out += format_number(v.get<double>());
      else out += "null";
      return;
    default:
      out += v.dump();
  }
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string format_number(std::optional<double> value) {
  if (!value || !std::isfinite(*value)) return {};
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *value);
  return buf;
}

std::string dump_json(const Json& value) {
  std::string out;
  emit(value, out, 0);
  out += "\n";
  return out;
}

Json config_to_json(const RunConfig& c) {
  Json z = Json::array();
  for (cplx v : c.problem.Z) z.push_back({v.real(), v.imag()});
  Json problem = {
      {"phi", c.problem.phi.to_string()},
      {"Z", z},
      {"F", c.problem.manufactured ? std::string("manufactured") : c.problem.F.to_string()},
      {"u_star", c.problem.u_star.to_string()},
      {"lambda", c.problem.lambda},
      {"eps_schedule", c.problem.eps_schedule},
      {"band_limit_guard", c.problem.band_limit_guard},
      {"initial_guess", c.problem.random_initial_guess ? "random" : "zero"},
      {"initial_amplitude", c.problem.initial_amplitude},
  };
  Json solver = {
      {"max_newton_iters", c.solver.max_newton_iters},
      {"residual_tol", c.solver.residual_tol},
      {"damping", c.solver.damping},
      {"max_halvings", c.solver.max_halvings},
      {"linear_tol", c.solver.linear_tol},
      {"max_linear_iters", c.solver.max_linear_iters},
      {"positivity_floor", c.solver.positivity_floor},
      {"schedule_floor", c.schedule_floor},
  };
  Json verify = {
      {"identity_samples", c.verify.identity_samples},
      {"lemma41_samples", c.verify.lemma41_samples},
      {"estimate_runs", c.verify.estimate_runs},
      {"estimate_schedule", c.verify.estimate_schedule},
      {"reduction_tau", c.verify.reduction_tau},
      {"reduction_samples", c.verify.reduction_samples},
      {"corrupt_derivative", c.verify.corrupt_derivative},
  };
  return {
      {"grid", {{"n", c.grid.n}, {"N", c.grid.N}, {"period", c.grid.period}}},
      {"problem", problem},
      {"solver", solver},
      {"verify", verify},
      {"suites", c.suites},
      {"seed", c.seed},
  };
}

Json iterates_to_json(const SolveReport& report) {
  Json out = Json::array();
  const double eps = report.problem ? report.problem->eps() : 0.0;
  for (const auto& it : report.iterates) {
    out.push_back({
        {"eps", eps},
        {"iteration", it.iteration},
        {"residual", it.residual},
        {"damping", it.damping},
        {"min_eig_metric", it.min_eig_metric},
        {"min_eig_operator", it.min_eig_operator},
        {"linear_iterations", it.linear_iterations},
        {"linear_residual", it.linear_residual},
    });
  }
  return out;
}

Json ledger_to_json(const EstimateLedger& l) {
  Json cherrier = Json::array();
  for (const auto& e : l.cherrier) cherrier.push_back({{"p", e.p}, {"lhs", e.lhs}, {"rhs_core", e.rhs_core}});
  return {
      {"sup_u", l.sup_u},
      {"inf_u", l.inf_u},
      {"sup_lap_u", l.sup_lap_u},
      {"sup_znorm_tilde", l.sup_znorm_tilde},
      {"fitted_C", l.fitted_C},
      {"hypothesis_min", l.hypothesis_min},
      {"minpoint_gap", opt(l.minpoint_gap)},
      {"maxpoint_witness", opt(l.maxpoint_witness)},
      {"zhu_sup", opt(l.zhu_sup)},
      {"zhu_imag", opt(l.zhu_imag)},
      {"cherrier", cherrier},
      {"cherrier_C", opt(l.cherrier_C)},
      {"moser_lhs", opt(l.moser_lhs)},
      {"moser_rhs_integral", opt(l.moser_rhs_integral)},
      {"moser_C", opt(l.moser_C)},
  };
}

Json run_to_json(const SolveReport& report) {
  Json out = {
      {"eps", report.problem ? report.problem->eps() : 0.0},
      {"c_eps", report.problem ? report.problem->c_eps() : 0.0},
      {"converged", report.converged},
      {"final_residual", report.final_residual},
      {"compatibility_shift", report.compatibility_shift},
      {"newton_steps", report.newton_steps()},
      {"sup_abs_u", report.u.max_abs()},
      {"min_operator_eigenvalue", report.iterates.empty() ? 0.0 : report.min_operator_eigenvalue()},
      {"estimates", report.ledger ? ledger_to_json(*report.ledger) : Json(nullptr)},
      {"max_error_vs_exact", nullptr},
  };
  if (report.problem && report.problem->exact_solution()) {
    const RealField& exact = *report.problem->exact_solution();
    double err = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) err = std::max(err, std::abs(report.u[i] - exact[i]));
    out["max_error_vs_exact"] = err;
  }
  return out;
}

CheckResult check_le(std::string name, double value, double threshold, std::string detail) {
  return {std::move(name), value, threshold, "<=", value <= threshold, std::move(detail)};
}

CheckResult check_ge(std::string name, double value, double threshold, std::string detail) {
  return {std::move(name), value, threshold, ">=", value >= threshold, std::move(detail)};
}

CheckResult check_gt(std::string name, double value, double threshold, std::string detail) {
  return {std::move(name), value, threshold, ">", value > threshold, std::move(detail)};
}

Json checks_to_json(const std::vector<CheckResult>& checks) {
  Json out = Json::array();
  for (const auto& c : checks) {
    out.push_back({{"name", c.name},
                   {"value", c.value},
                   {"threshold", c.threshold},
                   {"comparison", c.comparison},
                   {"passed", c.passed},
                   {"detail", c.detail}});
  }
  return out;
}

const std::vector<std::string>& iterate_csv_columns() {
  static const std::vector<std::string> cols{"eps",           "iteration",         "residual",
                                             "damping",       "min_eig_metric",    "min_eig_operator",
                                             "linear_iterations", "linear_residual"};
  return cols;
}

const std::vector<std::string>& ledger_csv_columns() {
  static const std::vector<std::string> cols{
      "eps",          "converged",       "newton_steps",     "final_residual", "sup_u",
      "inf_u",        "sup_lap_u",       "sup_znorm_tilde",  "fitted_C",       "minpoint_gap",
      "maxpoint_witness", "zhu_sup",     "zhu_imag",         "cherrier_C",     "moser_C",
      "hypothesis_min"};
  return cols;
}

namespace {

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
  return out + "\n";
}

}  // namespace

std::string iterates_csv(const std::vector<SolveReport>& reports) {
  std::string out = join(iterate_csv_columns());
  for (const auto& r : reports) {
    const double eps = r.problem ? r.problem->eps() : 0.0;
    for (const auto& it : r.iterates) {
      out += join({format_number(eps), std::to_string(it.iteration), format_number(it.residual),
                   format_number(it.damping), format_number(it.min_eig_metric), format_number(it.min_eig_operator),
                   std::to_string(it.linear_iterations), format_number(it.linear_residual)});
    }
  }
  return out;
}

std::string ledger_csv(const std::vector<SolveReport>& reports) {
  std::string out = join(ledger_csv_columns());
  for (const auto& r : reports) {
    std::vector<std::string> row{format_number(r.problem ? r.problem->eps() : 0.0), r.converged ? "1" : "0",
                                 std::to_string(r.newton_steps()), format_number(r.final_residual)};
    if (r.ledger) {
      const EstimateLedger& l = *r.ledger;
      for (auto v : {std::optional<double>(l.sup_u), std::optional<double>(l.inf_u),
                     std::optional<double>(l.sup_lap_u), std::optional<double>(l.sup_znorm_tilde),
                     std::optional<double>(l.fitted_C), l.minpoint_gap, l.maxpoint_witness, l.zhu_sup, l.zhu_imag,
                     l.cherrier_C, l.moser_C, std::optional<double>(l.hypothesis_min)}) {
        row.push_back(format_number(v));
      }
    } else {
      row.resize(ledger_csv_columns().size());
    }
    out += join(row);
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace vsoliton::cli

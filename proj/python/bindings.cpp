#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "vsoliton/cli/commands.hpp"
#include "vsoliton/errors.hpp"
#include "vsoliton/estimates.hpp"
#include "vsoliton/fields.hpp"
#include "vsoliton/reduction.hpp"
#include "vsoliton/solver.hpp"

namespace py = pybind11;
using namespace vsoliton;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<py::ssize_t> shape_of(const GridSpec& g) {
  return std::vector<py::ssize_t>(static_cast<std::size_t>(g.dims()), g.N());
}

py::array_t<double> to_numpy(const RealField& f) {
  py::array_t<double> out(shape_of(f.grid()));
  std::copy(f.data(), f.data() + f.size(), out.mutable_data());
  return out;
}

RealField from_numpy(const GridSpec& g, const Array& a) {
  if (static_cast<std::size_t>(a.size()) != g.size())
    throw DomainError("array has " + std::to_string(a.size()) + " values, grid has " + std::to_string(g.size()));
  return RealField(g, std::span<const double>(a.data(), g.size()));
}

HoloField holo(const std::vector<cplx>& z) { return HoloField(z); }

py::dict iterate_dict(const IterateRecord& r) {
  py::dict d;
  d["iteration"] = r.iteration;
  d["residual"] = r.residual;
  d["damping"] = r.damping;
  d["min_eig_metric"] = r.min_eig_metric;
  d["min_eig_operator"] = r.min_eig_operator;
  d["linear_iterations"] = r.linear_iterations;
  d["linear_residual"] = r.linear_residual;
  return d;
}

py::dict ledger_dict(const EstimateLedger& l) {
  py::dict d;
  d["sup_u"] = l.sup_u;
  d["inf_u"] = l.inf_u;
  d["sup_lap_u"] = l.sup_lap_u;
  d["sup_znorm_tilde"] = l.sup_znorm_tilde;
  d["fitted_C"] = l.fitted_C;
  d["hypothesis_min"] = l.hypothesis_min;
  d["minpoint_gap"] = l.minpoint_gap;
  d["maxpoint_witness"] = l.maxpoint_witness;
  d["zhu_sup"] = l.zhu_sup;
  d["zhu_imag"] = l.zhu_imag;
  d["cherrier_C"] = l.cherrier_C;
  d["moser_C"] = l.moser_C;
  py::list cherrier;
  for (const auto& e : l.cherrier) {
    py::dict c;
    c["p"] = e.p;
    c["lhs"] = e.lhs;
    c["rhs_core"] = e.rhs_core;
    cherrier.append(c);
  }
  d["cherrier"] = cherrier;
  return d;
}

SolveOptions options(int max_iters, double residual_tol) {
  SolveOptions o;
  o.max_newton_iters = max_iters;
  o.residual_tol = residual_tol;
  o.validate();
  return o;
}

}  // namespace

PYBIND11_MODULE(_vsoliton, m) {
  m.doc() = "Spectral solver for the epsilon-perturbed scalar V-soliton equation on flat tori";

  py::register_exception<Error>(m, "VsolitonError", PyExc_RuntimeError);

  py::class_<GridSpec>(m, "Grid")
      .def(py::init<int, int, double>(), py::arg("n"), py::arg("N"), py::arg("period") = 2.0 * std::numbers::pi)
      .def_property_readonly("n", &GridSpec::n)
      .def_property_readonly("N", &GridSpec::N)
      .def_property_readonly("period", &GridSpec::period)
      .def_property_readonly("shape", [](const GridSpec& g) { return py::tuple(py::cast(shape_of(g))); })
      .def("coordinates",
           [](const GridSpec& g) {
             std::vector<py::ssize_t> shape{g.dims()};
             for (auto s : shape_of(g)) shape.push_back(s);
             py::array_t<double> out(shape);
             double* p = out.mutable_data();
             for (int a = 0; a < g.dims(); ++a)
               for (std::size_t i = 0; i < g.size(); ++i) *p++ = g.coord(i, a);
             return out;
           },
           "Node coordinates, shape (2n, N, ..., N), axes ordered x1, y1, x2, y2.");

  py::class_<SolitonProblem, std::shared_ptr<SolitonProblem>>(m, "Problem")
      .def(py::init([](const GridSpec& g, const Array& phi, const std::vector<cplx>& Z, const Array& F, double lambda,
                       double eps) {
             return std::make_shared<SolitonProblem>(from_numpy(g, phi), holo(Z), from_numpy(g, F), lambda, eps);
           }),
           py::arg("grid"), py::arg("phi"), py::arg("Z"), py::arg("F"), py::arg("lam"), py::arg("eps"))
      .def_static(
          "manufactured",
          [](const GridSpec& g, const Array& u_star, const Array& phi, const std::vector<cplx>& Z, double lambda,
             double eps) {
            return std::make_shared<SolitonProblem>(
                manufactured_problem(from_numpy(g, u_star), from_numpy(g, phi), holo(Z), lambda, eps));
          },
          py::arg("grid"), py::arg("u_star"), py::arg("phi"), py::arg("Z"), py::arg("lam"), py::arg("eps"))
      .def_property_readonly("grid", &SolitonProblem::grid)
      .def_property_readonly("lam", &SolitonProblem::lambda)
      .def_property_readonly("eps", &SolitonProblem::eps)
      .def_property_readonly("c_eps", &SolitonProblem::c_eps)
      .def_property_readonly("exact_solution",
                             [](const SolitonProblem& p) -> py::object {
                               if (!p.exact_solution()) return py::none();
                               return to_numpy(*p.exact_solution());
                             })
      .def("with_epsilon",
           [](const SolitonProblem& p, double eps) { return std::make_shared<SolitonProblem>(p.with_epsilon(eps)); })
      .def("residual", [](const SolitonProblem& p, const Array& u) {
        return to_numpy(residual(p, from_numpy(p.grid(), u)));
      });

  py::class_<SolveReport>(m, "SolveReport")
      .def_property_readonly("u", [](const SolveReport& r) { return to_numpy(r.u); })
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("final_residual", &SolveReport::final_residual)
      .def_readonly("compatibility_shift", &SolveReport::compatibility_shift)
      .def_property_readonly("newton_steps", &SolveReport::newton_steps)
      .def_property_readonly("eps", [](const SolveReport& r) { return r.problem->eps(); })
      .def_property_readonly("min_operator_eigenvalue", &SolveReport::min_operator_eigenvalue)
      .def_property_readonly("iterates",
                             [](const SolveReport& r) {
                               py::list out;
                               for (const auto& it : r.iterates) out.append(iterate_dict(it));
                               return out;
                             })
      .def("ledger", [](const SolveReport& r) { return ledger_dict(compute_ledger(r)); },
           "Estimate ledger of a converged report.");

  m.def(
      "solve",
      [](const SolitonProblem& p, std::optional<Array> u0, int max_iters, double residual_tol) {
        const SolveOptions o = options(max_iters, residual_tol);
        py::gil_scoped_release release;
        return u0 ? newton_solve(p, from_numpy(p.grid(), *u0), o) : newton_solve(p, o);
      },
      py::arg("problem"), py::arg("u0") = py::none(), py::arg("max_iters") = 50, py::arg("residual_tol") = 1e-10);

  m.def(
      "continuation",
      [](const SolitonProblem& p, const std::vector<double>& schedule, int max_iters, double residual_tol,
         double floor) {
        const SolveOptions o = options(max_iters, residual_tol);
        ContinuationResult res;
        {
          py::gil_scoped_release release;
          res = continuation_solve(p, schedule, o, floor);
        }
        py::dict d;
        d["reports"] = res.reports;
        if (res.failure) {
          py::dict f;
          f["eps"] = res.failure->eps;
          f["stage"] = res.failure->stage;
          f["message"] = res.failure->message;
          d["failure"] = f;
        } else {
          d["failure"] = py::none();
        }
        return d;
      },
      py::arg("problem"), py::arg("schedule"), py::arg("max_iters") = 50, py::arg("residual_tol") = 1e-10,
      py::arg("floor") = 1e-3);

  m.def(
      "check_div_ricci",
      [](const GridSpec& g, const Array& phi, const std::vector<cplx>& Z) {
        return check_div_ricci(MetricField(from_numpy(g, phi)), holo(Z));
      },
      py::arg("grid"), py::arg("phi"), py::arg("Z"));
  m.def(
      "check_vjv_identity",
      [](const GridSpec& g, const Array& u, const std::vector<cplx>& Z) {
        return check_vjv_identity(from_numpy(g, u), holo(Z));
      },
      py::arg("grid"), py::arg("u"), py::arg("Z"));
  m.def(
      "lemma41_min_eig",
      [](const GridSpec& g, const Array& phi, const std::vector<cplx>& Z, double eps) {
        return lemma41_min_eig(MetricField(from_numpy(g, phi)), holo(Z), eps);
      },
      py::arg("grid"), py::arg("phi"), py::arg("Z"), py::arg("eps"));

  m.def(
      "check_hamiltonian",
      [](cplx z1, cplx z2, double h) { return check_hamiltonian(LocalModelPoint(z1, z2), h); }, py::arg("z1"),
      py::arg("z2"), py::arg("h"));
  m.def(
      "reduced_metric_check",
      [](double tau, int samples, std::uint64_t seed) {
        const ReducedMetricReport r = reduced_metric_check(tau, samples, seed);
        py::dict d;
        d["max_residual"] = r.max_residual;
        d["max_projection_residual"] = r.max_projection_residual;
        d["min_gram_det"] = r.min_gram_det;
        d["samples"] = r.samples;
        d["resampled"] = r.resampled;
        return d;
      },
      py::arg("tau"), py::arg("samples"), py::arg("seed") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"vsoliton"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool; returns (exit_code, stdout, stderr).");
}

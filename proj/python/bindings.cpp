// Copyright 2026 The saddle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "saddle/cli.hpp"
#include "saddle/config.hpp"
#include "saddle/core_model.hpp"
#include "saddle/errors.hpp"
#include "saddle/oracle_1d.hpp"
#include "saddle/phase_builder.hpp"
#include "saddle/special_functions.hpp"
#include "saddle/transition_operator.hpp"

namespace py = pybind11;
using namespace saddle;

namespace {

std::vector<Monomial> monomials(const std::vector<std::pair<std::vector<int>, double>>& terms) {
  std::vector<Monomial> out;
  for (const auto& [e, c] : terms) out.push_back({e, c});
  return out;
}

py::dict evaluation_dict(const TransitionEvaluation& ev) {
  py::dict d;
  d["z"] = ev.z;
  d["h"] = ev.h;
  d["S"] = ev.S;
  d["d0"] = ev.d0;
  d["F_gamma"] = ev.F_gamma;
  d["F_bracket"] = ev.F_bracket;
  d["F_geom"] = ev.F_geom;
  d["F_action"] = ev.F_action;
  d["F_jac"] = ev.F_jac;
  d["badset_margin"] = ev.badset_margin;
  d["lattice_distance"] = ev.lattice_distance;
  d["near_lattice"] = ev.near_lattice;
  d["branch_log"] = ev.branch_log;
  return d;
}

}  // namespace

PYBIND11_MODULE(_saddle, m) {
  m.doc() = "Transition operator at a hyperbolic fixed point: numerical kernels";
  m.attr("__version__") = kVersion;

  // translators run newest first, so the subclass goes last
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<PoleError>(m, "PoleError", numerical.ptr());

  m.def("complex_gamma", &complex_gamma, py::arg("z"));

  m.def(
      "gamma0_lattice",
      [](const Vec& lambdas, double h, double bound) {
        const auto lat = gamma0_lattice(lambdas, h, bound);
        return py::make_tuple(lat.points, lat.multi_indices);
      },
      py::arg("lambdas"), py::arg("h"), py::arg("bound"),
      "Points -ih sum lambda_j (alpha_j + 1/2) with modulus <= bound, and their multi-indices.");
  m.def(
      "mu_ladder", [](const Vec& lambdas, double cutoff) { return mu_ladder(lambdas, cutoff).exponents; },
      py::arg("lambdas"), py::arg("cutoff"));

  py::class_<HamiltonianModel>(m, "Model")
      .def_property_readonly("dim", &HamiltonianModel::dim)
      .def_property_readonly("lambdas", &HamiltonianModel::lambdas)
      .def_property_readonly("validity_radius", &HamiltonianModel::validity_radius)
      .def("p0", py::overload_cast<const Vec&, const Vec&>(&HamiltonianModel::p0, py::const_), py::arg("x"),
           py::arg("xi"));
  m.def("quadratic_model", &make_quadratic_model, py::arg("lambdas"));
  m.def(
      "barrier_model",
      [](const std::vector<double>& lambdas, const std::vector<std::pair<std::vector<int>, double>>& perturbation) {
        return make_barrier_model(lambdas, monomials(perturbation));
      },
      py::arg("lambdas"), py::arg("perturbation") = std::vector<std::pair<std::vector<int>, double>>{},
      "p0 = |xi|^2 - sum lambda_j^2 x_j^2 / 4 + W(x); perturbation is a list of (exponents, coeff).");

  py::class_<TransitionScenario>(m, "Scenario")
      .def_property_readonly("epsilon", [](const TransitionScenario& s) { return s.epsilon; })
      .def_property_readonly("rho_minus", [](const TransitionScenario& s) { return py::make_tuple(s.rho_minus.x, s.rho_minus.xi); })
      .def_property_readonly("g1_minus", [](const TransitionScenario& s) { return s.g1_minus; })
      .def("phi_plus", [](const TransitionScenario& s, const Vec& x) { return s.phi_plus->value(x); }, py::arg("x"))
      .def("phi_minus", [](const TransitionScenario& s, const Vec& x) { return s.phi_minus->value(x); }, py::arg("x"));
  m.def(
      "scenario",
      [](const HamiltonianModel& model, double h, double epsilon, double C0, double C1, double nu, const Vec& x_minus_prime) {
        ScenarioOptions o;
        o.epsilon = epsilon;
        o.nu = nu;
        o.x_minus_prime = x_minus_prime;
        return make_scenario(model, spectral_params(0.0, h, C0, C1, nu, model.lambdas()), o);
      },
      py::arg("model"), py::arg("h") = 0.1, py::arg("epsilon") = 0.1, py::arg("C0") = 1.0, py::arg("C1") = 1.0,
      py::arg("nu") = 0.1, py::arg("x_minus_prime") = Vec());

  m.def(
      "d0_closed_form",
      [](const TransitionScenario& sc, const Vec& x, const Vec& y_prime, Complex z, double h) {
        return evaluation_dict(d0_closed_form(sc, x, y_prime, z, h));
      },
      py::arg("scenario"), py::arg("x"), py::arg("y_prime"), py::arg("z"), py::arg("h"));
  m.def("d0_via_transport", &d0_via_transport, py::arg("scenario"), py::arg("x"), py::arg("y_prime"), py::arg("z"),
        py::arg("h"));
  m.def(
      "apply_J_point",
      [](const TransitionScenario& sc, Complex u0, const std::vector<Vec>& targets, Complex z, double h) {
        return apply_J(sc, CauchyData::point(u0), targets, z, h);
      },
      py::arg("scenario"), py::arg("u0"), py::arg("targets"), py::arg("z"), py::arg("h"),
      "J(z) applied to one-dimensional Cauchy data (a single value at x = epsilon).");

  m.def(
      "weber_connection",
      [](double lambda, Complex z, double h, double epsilon) {
        const auto r = weber_connection(lambda, z, h, epsilon);
        py::dict d;
        d["transmission"] = r.transmission();
        d["reflection"] = r.reflection();
        d["transmission_probability"] = r.transmission_probability();
        d["reflection_probability"] = r.reflection_probability();
        d["estimated_error"] = r.estimated_error;
        d["X0"] = r.X0;
        return d;
      },
      py::arg("lam"), py::arg("z"), py::arg("h"), py::arg("epsilon") = 0.1);
  m.def("scaled_resonances", &scaled_resonances, py::arg("lam"), py::arg("h"), py::arg("count"),
        py::arg("grid_size") = 2000);

  m.def("subcommands", &subcommands);
  m.def(
      "run",
      [](const std::string& sub, const std::string& config, const std::string& out, int jobs) {
        std::ostringstream log, err;
        CliOptions o;
        o.out = out;
        o.jobs = jobs;
        o.log = &log;
        o.err = &err;
        const int code = run(sub, config, o);
        return py::make_tuple(code, log.str(), err.str());
      },
      py::arg("subcommand"), py::arg("config"), py::arg("out") = "", py::arg("jobs") = 1,
      "Run a CLI subcommand in-process; returns (exit_code, log, errors).");
}

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

#include "saddle/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "saddle/errors.hpp"

namespace saddle {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object() && j.contains("re")) {
    const double im = j.contains("im") ? j.at("im").get<double>() : 0.0;
    return {j.at("re").get<double>(), im};
  }
  throw ValidationError(where + ": expected a number, [re, im] or {re, im}");
}

HamiltonianModel model_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  if (!j.contains("lambdas") || !j.at("lambdas").is_array() || j.at("lambdas").empty())
    throw ValidationError(where + ".lambdas: a nonempty list is required");
  std::vector<double> lambdas;
  for (std::size_t i = 0; i < j.at("lambdas").size(); ++i) {
    const json& v = j.at("lambdas")[i];
    const std::string f = where + ".lambdas[" + std::to_string(i) + "]";
    if (!v.is_number()) throw ValidationError(f + ": must be a number");
    const double l = v.get<double>();
    if (!(l > 0.0)) throw ValidationError(f + ": must be positive");
    if (!lambdas.empty() && l < lambdas.back()) throw ValidationError(f + ": lambdas must be ascending");
    lambdas.push_back(l);
  }
  const int d = static_cast<int>(lambdas.size());
  if (j.contains("dim") && (!j.at("dim").is_number_integer() || j.at("dim").get<int>() != d))
    throw ValidationError(where + ".dim: must equal the number of lambdas");
  const std::string kind = j.value("kind", std::string("schrodinger_barrier"));
  std::vector<Monomial> pert;
  if (j.contains("perturbation")) {
    const json& p = j.at("perturbation");
    if (!p.is_array()) throw ValidationError(where + ".perturbation: expected a list");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string f = where + ".perturbation[" + std::to_string(i) + "]";
      if (!p[i].is_object() || !p[i].contains("exponents") || !p[i].contains("coeff"))
        throw ValidationError(f + ": expected {exponents, coeff}");
      Monomial m;
      m.exponents = p[i].at("exponents").get<std::vector<int>>();
      m.coeff = p[i].at("coeff").get<double>();
      if (static_cast<int>(m.exponents.size()) != d) throw ValidationError(f + ".exponents: must have dim entries");
      pert.push_back(m);
    }
  }
  try {
    if (kind == "exact_quadratic") {
      if (!pert.empty()) throw ValidationError(where + ".perturbation: not allowed for exact_quadratic");
      return make_quadratic_model(lambdas);
    }
    if (kind == "schrodinger_barrier") return make_barrier_model(lambdas, pert);
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  throw ValidationError(where + ".kind: must be exact_quadratic or schrodinger_barrier");
}

json model_to_json(const HamiltonianModel& model) {
  json j;
  j["dim"] = model.dim();
  j["lambdas"] = std::vector<double>(model.lambdas().data(), model.lambdas().data() + model.dim());
  j["kind"] = to_string(model.kind());
  json p = json::array();
  if (model.separable())
    for (const Monomial& m : model.perturbation().terms()) p.push_back({{"exponents", m.exponents}, {"coeff", m.coeff}});
  j["perturbation"] = p;
  return j;
}

void write_lattice_csv(std::ostream& os, const ResonanceLattice& lattice) {
  const int d = static_cast<int>(lattice.lambdas.size());
  os << "re,im";
  for (int i = 0; i < d; ++i) os << ",alpha_" << i;
  os << "\n";
  for (std::size_t k = 0; k < lattice.points.size(); ++k) {
    os << fmt(lattice.points[k].real()) << "," << fmt(lattice.points[k].imag());
    for (int a : lattice.multi_indices[k]) os << "," << a;
    os << "\n";
  }
}

json series_to_json(const ExpandiblePolySeries& series) {
  json j;
  j["value_dim"] = series.value_dim;
  j["residual_rms"] = series.residual_rms;
  j["tail_bound"] = series.tail_bound;
  j["condition"] = series.condition;
  json terms = json::array();
  for (const SeriesTerm& t : series.terms) {
    json c = json::array();
    for (Eigen::Index r = 0; r < t.coeffs.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index l = 0; l < t.coeffs.cols(); ++l) row.push_back(complex_to_json(t.coeffs(r, l)));
      c.push_back(row);
    }
    terms.push_back({{"mu", t.mu}, {"ladder_index", t.ladder_index}, {"coeffs", c}});
  }
  j["terms"] = terms;
  return j;
}

ExpandiblePolySeries series_from_json(const json& j) {
  ExpandiblePolySeries s;
  s.value_dim = j.at("value_dim").get<int>();
  s.residual_rms = j.value("residual_rms", 0.0);
  s.tail_bound = j.value("tail_bound", 0.0);
  s.condition = j.value("condition", 0.0);
  for (const json& t : j.at("terms")) {
    SeriesTerm term;
    term.mu = t.at("mu").get<double>();
    term.ladder_index = t.value("ladder_index", -1);
    const json& c = t.at("coeffs");
    const auto rows = static_cast<Eigen::Index>(c.size());
    const auto cols = rows ? static_cast<Eigen::Index>(c[0].size()) : 0;
    term.coeffs = CMat(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index l = 0; l < cols; ++l) term.coeffs(r, l) = complex_from_json(c[r][l], "series.coeffs");
    s.terms.push_back(term);
  }
  return s;
}

void write_trajectory_csv(std::ostream& os, const TrajectorySample& traj) {
  if (traj.points.empty()) return;
  const auto d = traj.points.front().dim();
  const bool jac = !traj.jacobians.empty();
  os << "t";
  for (Eigen::Index i = 0; i < d; ++i) os << ",x_" << i;
  for (Eigen::Index i = 0; i < d; ++i) os << ",xi_" << i;
  os << ",energy";
  if (jac) os << ",symplectic_defect,symplectic_defect_rel";
  os << "\n";
  for (std::size_t k = 0; k < traj.points.size(); ++k) {
    os << fmt(traj.times[k]);
    for (Eigen::Index i = 0; i < d; ++i) os << "," << fmt(traj.points[k].x[i]);
    for (Eigen::Index i = 0; i < d; ++i) os << "," << fmt(traj.points[k].xi[i]);
    os << "," << fmt(traj.energies[k]);
    if (jac) {
      const double def = symplectic_defect(traj.jacobians[k]);
      os << "," << fmt(def) << "," << fmt(def / traj.jacobians[k].squaredNorm());
    }
    os << "\n";
  }
}

json chart_to_json(const LagrangianChart& chart, int points_per_dim) {
  if (points_per_dim < 2) throw ValidationError("chart_to_json: need at least two points per dimension");
  const Box& b = chart.domain();
  const int d = chart.dim();
  json j;
  j["kind"] = to_string(chart.kind());
  j["domain"] = {{"lo", std::vector<double>(b.lo.data(), b.lo.data() + d)},
                 {"hi", std::vector<double>(b.hi.data(), b.hi.data() + d)}};
  j["fit_residual"] = chart.fit_residual();
  json samples = json::array();
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= points_per_dim;
  for (std::size_t k = 0; k < total; ++k) {
    Vec x(d);
    std::size_t r = k;
    for (int i = 0; i < d; ++i) {
      const int idx = static_cast<int>(r % points_per_dim);
      r /= points_per_dim;
      x[i] = b.lo[i] + (b.hi[i] - b.lo[i]) * idx / (points_per_dim - 1);
    }
    double v = 0.0;
    Vec g;
    chart.evaluate(x, &v, &g, nullptr);
    samples.push_back({{"x", std::vector<double>(x.data(), x.data() + d)},
                       {"value", v},
                       {"gradient", std::vector<double>(g.data(), g.data() + d)}});
  }
  j["samples"] = samples;
  return j;
}

json transition_to_json(const TransitionEvaluation& ev) {
  json j;
  j["z"] = complex_to_json(ev.z);
  j["h"] = ev.h;
  j["S"] = complex_to_json(ev.S);
  j["d0_re"] = ev.d0.real();
  j["d0_im"] = ev.d0.imag();
  j["factors"] = {{"gamma", complex_to_json(ev.F_gamma)},
                  {"bracket", complex_to_json(ev.F_bracket)},
                  {"geometry", complex_to_json(ev.F_geom)},
                  {"action", complex_to_json(ev.F_action)},
                  {"jacobian", complex_to_json(ev.F_jac)}};
  j["badset_margin"] = ev.badset_margin;
  j["lattice_distance"] = ev.lattice_distance;
  j["near_lattice"] = ev.near_lattice;
  j["branch_log"] = ev.branch_log;
  return j;
}

void write_transition_csv_header(std::ostream& os, int dim) {
  for (int i = 0; i < dim; ++i) os << "x_" << i << ",";
  for (int i = 1; i < dim; ++i) os << "y_" << i << ",";
  os << "z_re,z_im,h,d0_re,d0_im,gamma_re,gamma_im,bracket_re,bracket_im,geometry_re,geometry_im,"
        "action_re,action_im,jacobian_re,jacobian_im,badset_margin,lattice_distance,near_lattice\n";
}

void write_transition_csv_row(std::ostream& os, const Vec& x, const Vec& y_prime,
                              const TransitionEvaluation& ev) {
  for (Eigen::Index i = 0; i < x.size(); ++i) os << fmt(x[i]) << ",";
  for (Eigen::Index i = 0; i < y_prime.size(); ++i) os << fmt(y_prime[i]) << ",";
  auto c = [&](Complex v) { os << fmt(v.real()) << "," << fmt(v.imag()) << ","; };
  os << fmt(ev.z.real()) << "," << fmt(ev.z.imag()) << "," << fmt(ev.h) << ",";
  c(ev.d0);
  c(ev.F_gamma);
  c(ev.F_bracket);
  c(ev.F_geom);
  c(ev.F_action);
  c(ev.F_jac);
  os << fmt(ev.badset_margin) << "," << fmt(ev.lattice_distance) << "," << (ev.near_lattice ? 1 : 0) << "\n";
}

void write_grid_csv(std::ostream& os, const GridFunction& g) {
  os << "# axes";
  for (std::size_t i = 0; i < g.axes.size(); ++i)
    os << (i ? ";" : " ") << fmt(g.axes[i].start) << ":" << fmt(g.axes[i].step) << ":" << g.axes[i].n;
  os << " h " << fmt(g.h) << "\n";
  for (int i = 0; i < g.dim(); ++i) os << "x_" << i << ",";
  os << "re,im\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec p = g.point(k);
    for (Eigen::Index i = 0; i < p.size(); ++i) os << fmt(p[i]) << ",";
    const Complex v = g.values[static_cast<Eigen::Index>(k)];
    os << fmt(v.real()) << "," << fmt(v.imag()) << "\n";
  }
}

GridFunction read_grid_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# axes ", 0) != 0)
    throw ValidationError("grid CSV: missing '# axes' header");
  std::istringstream hs(line.substr(7));
  std::string axes_part, tag;
  double h = 0.0;
  hs >> axes_part >> tag >> h;
  if (tag != "h") throw ValidationError("grid CSV: missing h in the header");
  std::vector<Axis> axes;
  std::istringstream as(axes_part);
  std::string item;
  while (std::getline(as, item, ';')) {
    Axis a;
    char c1 = 0, c2 = 0;
    std::istringstream is2(item);
    if (!(is2 >> a.start >> c1 >> a.step >> c2 >> a.n) || c1 != ':' || c2 != ':')
      throw ValidationError("grid CSV: malformed axis '" + item + "'");
    axes.push_back(a);
  }
  GridFunction g(axes, h);
  std::getline(is, line);  // column names
  std::size_t k = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (k >= g.size()) throw ValidationError("grid CSV: more rows than the axes allow");
    std::vector<double> cols;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cols.push_back(std::stod(cell));
    if (static_cast<int>(cols.size()) != g.dim() + 2) throw ValidationError("grid CSV: wrong column count");
    g.values[static_cast<Eigen::Index>(k++)] = Complex(cols[g.dim()], cols[g.dim() + 1]);
  }
  if (k != g.size()) throw ValidationError("grid CSV: fewer rows than the axes require");
  return g;
}

void write_comparison_csv(std::ostream& os, const TransitionComparison& cmp) {
  os << "z_re,z_im,h,|T|_oracle,|T|_J,rel_err_modulus,phase_err,x_eval,|T|_asymptotic,coeff_rel_err,"
        "T2_oracle,oracle_error,excluded,near_lattice\n";
  for (const auto& r : cmp.rows) {
    os << fmt(r.z.real()) << "," << fmt(r.z.imag()) << "," << fmt(r.h) << "," << fmt(r.abs_oracle) << ","
       << fmt(r.abs_J) << "," << fmt(r.rel_err_modulus) << "," << fmt(r.phase_err) << "," << fmt(r.x_eval)
       << "," << fmt(r.abs_T_asymptotic) << "," << fmt(r.coeff_rel_err) << ","
       << fmt(r.transmission_probability) << "," << fmt(r.oracle_error) << "," << (r.excluded ? 1 : 0)
       << "," << (r.near_lattice ? 1 : 0) << "\n";
  }
}

}  // namespace saddle

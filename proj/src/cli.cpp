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

#include "saddle/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "saddle/errors.hpp"
#include "saddle/microlocal.hpp"
#include "saddle/oracle_1d.hpp"
#include "saddle/special_functions.hpp"

namespace fs = std::filesystem;

namespace saddle {

namespace {

json matrix_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// One failed sweep point or op.
struct Failure {
  std::string op;
  std::string type;
  std::string message;
  double residual = 0.0;
  bool validation = false;
};

Failure describe(const std::string& op, std::exception_ptr e) {
  Failure f;
  f.op = op;
  try {
    std::rethrow_exception(e);
  } catch (const PoleError& x) {
    f.type = "PoleError";
    f.message = x.what();
  } catch (const DomainEscapeError& x) {
    f.type = "DomainEscapeError";
    f.message = x.what();
  } catch (const NumericalError& x) {
    f.type = "NumericalError";
    f.message = x.what();
    f.residual = x.residual();
  } catch (const ValidationError& x) {
    f.type = "ValidationError";
    f.message = x.what();
    f.validation = true;
  } catch (const std::exception& x) {
    f.type = "Error";
    f.message = x.what();
  }
  return f;
}

/// Runs fn(i) for i < n on up to jobs threads; results are written by index.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

class Context {
 public:
  Context(const RunConfig& c, const CliOptions& o, std::string sub)
      : cfg(c), opt(o), log(o.log ? *o.log : std::cout), err(o.err ? *o.err : std::cerr), sub_(std::move(sub)) {
    dir = o.out.empty() ? fs::path(c.output_dir) : fs::path(o.out);
    if (dir.is_relative() && o.out.empty()) dir = fs::path(c.base_dir) / dir;
    fs::create_directories(dir);
    stamp_ = o.timestamp ? now_utc() : "1970-01-01T00:00:00Z";
  }

  json meta() const {
    return {{"tool", "saddle"}, {"version", kVersion}, {"subcommand", sub_}, {"config_hash", cfg.hash},
            {"seed", cfg.seed}, {"generated", stamp_}};
  }

  std::ofstream csv(const std::string& name) {
    std::ofstream os(dir / name);
    if (!os) throw ValidationError("output: cannot write " + (dir / name).string());
    os << "# generated " << stamp_ << "\n";
    os << "# saddle " << kVersion << " config=" << cfg.hash << " seed=" << cfg.seed << "\n";
    files.push_back(name);
    return os;
  }

  void write_json(const std::string& name, json body) {
    json j;
    j["meta"] = meta();
    for (auto& [k, v] : body.items()) j[k] = v;
    std::ofstream os(dir / name);
    if (!os) throw ValidationError("output: cannot write " + (dir / name).string());
    os << j.dump(2) << "\n";
    files.push_back(name);
  }

  void note(const std::string& line) {
    if (opt.verbose) err << "[" << sub_ << "] " << line << "\n";
  }

  void record_failures(const std::vector<Failure>& failures) {
    json arr = json::array();
    for (const Failure& f : failures)
      arr.push_back({{"op", f.op}, {"type", f.type}, {"message", f.message}, {"residual", f.residual}});
    write_json("error.json", {{"errors", arr}});
    for (const Failure& f : failures) err << "error: " << f.op << ": " << f.type << ": " << f.message << "\n";
  }

  const RunConfig& cfg;
  const CliOptions& opt;
  fs::path dir;
  std::vector<std::string> files;
  std::ostream& log;
  std::ostream& err;

 private:
  std::string sub_;
  std::string stamp_;
};

double default_lattice_bound(const RunConfig& c, double h) {
  return h * std::hypot(c.C0, c.C1);
}

Vec default_x0(const RunConfig& c) {
  Vec x = Vec::Zero(c.model.dim());
  x[0] = c.epsilon;
  return x;
}

// ---------------------------------------------------------------------------

int cmd_model(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const Linearization lin = linearize(c.model);
  json charts = json::object();
  for (int sign : {+1, -1}) {
    ChartOptions co;
    co.tol = c.chart_tol;
    const ChartPtr chart = manifold_generating_function(c.model, sign, c.model.validity_box(), co);
    charts[sign > 0 ? "phi_plus" : "phi_minus"] = {
        {"hessian_at_0", matrix_json(chart->hessian(Vec::Zero(c.model.dim())))},
        {"eikonal_residual", invariance_residual(c.model, *chart)},
        {"fit_residual", chart->fit_residual()}};
  }
  json body;
  body["model"] = model_to_json(c.model);
  body["validity_radius"] = c.model.validity_radius();
  body["perturbation_scale"] = c.model.perturbation_scale();
  body["eigenvalues"] = vec_json(lin.eigenvalues);
  body["eigen_residuals"] = vec_json(lin.residuals);
  body["B_plus"] = matrix_json(lin.B_plus);
  body["B_minus"] = matrix_json(lin.B_minus);
  body["A_plus"] = matrix_json(lin.A_plus);
  body["A_minus"] = matrix_json(lin.A_minus);
  body["charts"] = charts;
  ctx.write_json("model_report.json", body);
  {
    std::ofstream os(ctx.dir / "model.json");
    os << model_to_json(c.model).dump(2) << "\n";
    ctx.files.push_back("model.json");
  }
  ctx.log << "model: d=" << c.model.dim() << " kind=" << to_string(c.model.kind())
          << " max eigen residual=" << fmt(lin.residuals.maxCoeff()) << "\n";
  return kExitOk;
}

int cmd_lattice(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  json index = json::array();
  for (std::size_t k = 0; k < c.h_list.size(); ++k) {
    const double h = c.h_list[k];
    const double bound = c.lattice_bound > 0.0 ? c.lattice_bound : default_lattice_bound(c, h);
    const ResonanceLattice lat = gamma0_lattice(c.model.lambdas(), h, bound);
    const std::string name = c.h_list.size() == 1 ? "lattice.csv" : "lattice_" + std::to_string(k) + ".csv";
    auto os = ctx.csv(name);
    write_lattice_csv(os, lat);
    index.push_back({{"h", h}, {"bound", bound}, {"points", lat.points.size()}, {"file", name}});
    ctx.log << "lattice: h=" << fmt(h) << " bound=" << fmt(bound) << " points=" << lat.points.size() << "\n";
  }
  ctx.write_json("lattice.json", {{"lattices", index}});
  return kExitOk;
}

int cmd_flow(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const int d = c.model.dim();
  ChartOptions co;
  co.tol = c.chart_tol;
  const ChartPtr chart = manifold_generating_function(c.model, c.flow_sign, c.model.validity_box(), co);
  const Vec x0 = c.flow_x0.size() ? c.flow_x0 : default_x0(c);
  if (!chart->domain().contains(x0)) throw ValidationError("flow.x0: outside the chart domain");
  const PhasePoint start{x0, chart->gradient(x0)};
  const double t_max = c.flow_t_max > 0.0 ? c.flow_t_max : 8.0 / c.model.lambda1();
  std::vector<double> s = expandible_sample_times(t_max, c.flow_samples);
  std::vector<double> times = s;
  if (c.flow_sign > 0)
    for (double& t : times) t = -t;
  ctx.note("integrating " + std::to_string(times.size()) + " samples to |t| = " + fmt(t_max));
  const TrajectorySample traj = trajectory(c.model, start, times, c.flow_tol, true);
  {
    auto os = ctx.csv("trajectory.csv");
    write_trajectory_csv(os, traj);
  }
  std::vector<FitSample> samples;
  for (std::size_t k = 0; k < s.size(); ++k) samples.push_back({s[k], traj.points[k].x});
  const ExponentLadder ladder = mu_ladder(c.model.lambdas(), 8.0 * c.model.lambda1());
  const ExpandiblePolySeries series = fit_expandible(samples, ladder, c.flow_fit_degree);
  ctx.write_json("series.json", series_to_json(series));
  ctx.write_json("chart.json", chart_to_json(*chart));

  json body;
  body["x0"] = vec_json(x0);
  body["xi0"] = vec_json(start.xi);
  body["sign"] = c.flow_sign;
  body["t_max"] = t_max;
  body["energy_drift"] = traj.energy_drift();
  body["max_symplectic_defect"] = traj.max_symplectic_defect();
  double rel_defect = 0.0;
  for (const Mat& m : traj.jacobians) rel_defect = std::max(rel_defect, symplectic_defect(m) / m.squaredNorm());
  body["max_relative_symplectic_defect"] = rel_defect;
  body["fit_residual_rms"] = series.residual_rms;
  body["fit_condition"] = series.condition;
  try {
    const LeadingTerm lt = leading_term(series, d, c.model.lambda1());
    body["leading"] = {{"mu1", lt.mu1}, {"g1", vec_json(lt.g1)}, {"on_bad_set", lt.on_bad_set}};
  } catch (const NumericalError& e) {
    body["leading"] = {{"error", e.what()}};
  }
  const Vec g1 = leading_coefficient(c.model, *chart, c.flow_sign, x0);
  body["g1_ray"] = vec_json(g1);
  ctx.write_json("flow_report.json", body);
  ctx.log << "flow: samples=" << traj.points.size() << " energy drift=" << fmt(traj.energy_drift())
          << " symplectic defect=" << fmt(traj.max_symplectic_defect()) << "\n";
  return kExitOk;
}

int cmd_phase(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const TransitionScenario sc = c.build_scenario(c.sweep().front());
  const Vec eta = c.phase_eta_prime.size() || sc.dim() == 1 ? c.phase_eta_prime : sc.eta_minus();
  const double t_max = c.phase_t_max > 0.0 ? c.phase_t_max : 10.0 / c.model.lambda1();
  const PhaseFamily fam = evolve_phase(sc, eta, t_max);

  json family;
  family["t_grid"] = fam.t_grid;
  json xs = json::array();
  for (const Vec& x : fam.x_grid) xs.push_back(vec_json(x));
  family["x_grid"] = xs;
  family["values"] = matrix_json(fam.values);
  family["dt_values"] = matrix_json(fam.dt_values);
  ctx.write_json("phase_family.json", {{"family", family}});
  ctx.write_json("phase_series.json", series_to_json(fam.expansion));

  json limits = json::array();
  for (std::size_t p = 0; p < fam.x_grid.size(); ++p) {
    const double phi_plus = sc.phi_plus->value(fam.x_grid[p]);
    limits.push_back({{"x", vec_json(fam.x_grid[p])}, {"limit", fam.limit[static_cast<Eigen::Index>(p)]},
                      {"phi_plus", phi_plus}});
  }
  std::vector<Vec> points = c.phase_points;
  if (points.empty()) {
    Vec x = Vec::Zero(sc.dim());
    x[0] = 0.5 * c.epsilon;
    points.push_back(x);
  }
  json crit = json::array();
  for (const Vec& x : points) {
    try {
      const CriticalTime ct = critical_time(fam, x);
      crit.push_back({{"x", vec_json(x)}, {"t_star", ct.t_star}, {"second_derivative", ct.second_derivative},
                      {"leading_order", ct.leading_order}, {"phase", ct.phase.value}});
    } catch (const NumericalError& e) {
      crit.push_back({{"x", vec_json(x)}, {"error", e.what()}});
    }
  }
  const Lambda0& l0 = fam.lambda0();
  json body;
  body["eta_prime"] = vec_json(eta);
  body["psi_tilde"] = fam.psi_tilde();
  body["g1_norm"] = fam.g1_norm();
  body["eikonal_residual"] = fam.eikonal_residual;
  body["t_max"] = fam.t_max;
  body["expansion_residual_rms"] = fam.expansion.residual_rms;
  body["lambda0"] = {{"flatness", l0.flatness}, {"hp_angle_deg", l0.hp_angle * 180.0 / M_PI},
                     {"gamma0_defect", l0.gamma0_defect}, {"intersection_residual", l0.intersection.residual}};
  body["limits"] = limits;
  body["critical_times"] = crit;
  ctx.write_json("phase_report.json", body);
  ctx.log << "phase: eikonal residual=" << fmt(fam.eikonal_residual) << " psi~=" << fmt(fam.psi_tilde()) << "\n";
  return kExitOk;
}

int cmd_transition(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const int d = c.model.dim();
  const std::vector<SweepPoint> sweep = c.sweep();
  const TransitionScenario sc = c.build_scenario(sweep.front());
  std::vector<Vec> targets = c.targets;
  if (targets.empty()) {
    Vec x = Vec::Zero(d);
    x[0] = -2.0 * c.epsilon;
    targets.push_back(x);
  }
  std::vector<Vec> ys = c.y_primes;
  if (ys.empty()) ys.push_back(c.x_minus_prime.size() ? c.x_minus_prime : Vec(Vec::Zero(d - 1)));

  struct Pair {
    std::size_t x, y;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < targets.size(); ++i)
    for (std::size_t k = 0; k < ys.size(); ++k) pairs.push_back({i, k});

  // geometry per (x, y'), then the z-dependent factors per sweep point
  std::vector<std::optional<TransitionGeometry>> geo(pairs.size());
  std::vector<std::exception_ptr> geo_err(pairs.size());
  parallel_for(pairs.size(), ctx.opt.jobs, [&](std::size_t i) {
    try {
      geo[i] = transition_geometry(sc, targets[pairs[i].x], ys[pairs[i].y]);
    } catch (...) {
      geo_err[i] = std::current_exception();
    }
  });

  const std::size_t n = pairs.size() * sweep.size();
  std::vector<std::optional<TransitionEvaluation>> ev(n);
  std::vector<std::exception_ptr> ev_err(n);
  parallel_for(n, ctx.opt.jobs, [&](std::size_t i) {
    const std::size_t p = i / sweep.size();
    if (!geo[p]) return;
    try {
      ev[i] = assemble(sc, *geo[p], sweep[i % sweep.size()].z, sweep[i % sweep.size()].h);
    } catch (...) {
      ev_err[i] = std::current_exception();
    }
  });

  std::vector<Failure> failures;
  json records = json::array();
  {
    auto os = ctx.csv("transition.csv");
    write_transition_csv_header(os, d);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t p = i / sweep.size();
      const Vec& x = targets[pairs[p].x];
      const Vec& y = ys[pairs[p].y];
      if (geo_err[p]) {
        if (i % sweep.size() == 0) failures.push_back(describe("transition_geometry", geo_err[p]));
        continue;
      }
      if (ev_err[i]) {
        failures.push_back(describe("d0_closed_form", ev_err[i]));
        continue;
      }
      write_transition_csv_row(os, x, y, *ev[i]);
      json r = transition_to_json(*ev[i]);
      r["x"] = vec_json(x);
      r["y_prime"] = vec_json(y);
      records.push_back(r);
    }
  }

  json applied = json::array();
  if (c.apply_j) {
    auto os = ctx.csv("apply_J.csv");
    for (int i = 0; i < d; ++i) os << "x_" << i << ",";
    os << "z_re,z_im,h,Ju_re,Ju_im\n";
    std::vector<std::optional<CVec>> out(sweep.size());
    std::vector<std::exception_ptr> errs(sweep.size());
    parallel_for(sweep.size(), ctx.opt.jobs, [&](std::size_t k) {
      try {
        const double h = sweep[k].h;
        CauchyData u0;
        if (d == 1) {
          u0 = CauchyData::point(1.0);
        } else {
          // Gaussian packet e^{-|y'-y0'|^2/2h} centred on the first y'
          const double step = std::sqrt(h) / 8.0;
          const int half = static_cast<int>(std::ceil(3.0 * std::sqrt(h) / step));
          u0.axes.assign(d - 1, {});
          std::size_t total = 1;
          for (int a = 0; a < d - 1; ++a) {
            for (int j = -half; j <= half; ++j) u0.axes[a].push_back(ys.front()[a] + j * step);
            total *= u0.axes[a].size();
          }
          u0.values.resize(static_cast<Eigen::Index>(total));
          for (std::size_t q = 0; q < total; ++q) {
            const Vec y = u0.node(q);
            u0.values[static_cast<Eigen::Index>(q)] = std::exp(-(y - ys.front()).squaredNorm() / (2.0 * h));
          }
        }
        out[k] = apply_J(sc, u0, targets, sweep[k].z, h);
      } catch (...) {
        errs[k] = std::current_exception();
      }
    });
    for (std::size_t k = 0; k < sweep.size(); ++k) {
      if (errs[k]) {
        failures.push_back(describe("apply_J", errs[k]));
        continue;
      }
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const Complex v = (*out[k])[static_cast<Eigen::Index>(i)];
        for (Eigen::Index a = 0; a < targets[i].size(); ++a) os << fmt(targets[i][a]) << ",";
        os << fmt(sweep[k].z.real()) << "," << fmt(sweep[k].z.imag()) << "," << fmt(sweep[k].h) << ","
           << fmt(v.real()) << "," << fmt(v.imag()) << "\n";
        applied.push_back({{"x", vec_json(targets[i])}, {"z", complex_to_json(sweep[k].z)}, {"h", sweep[k].h},
                           {"Ju", complex_to_json(v)}});
      }
    }
  }
  ctx.write_json("transition.json", {{"evaluations", records}, {"apply_J", applied}});
  ctx.log << "transition: evaluations=" << records.size() << " failures=" << failures.size() << "\n";
  if (!failures.empty()) {
    ctx.record_failures(failures);
    bool all_validation = true;
    for (const Failure& f : failures) all_validation = all_validation && f.validation;
    return all_validation ? kExitValidation : kExitNumerical;
  }
  return kExitOk;
}

int cmd_verify(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const int d = c.model.dim();
  const std::vector<SweepPoint> sweep = c.sweep();
  const TransitionScenario sc = c.build_scenario(sweep.front());
  json body;
  const bool exact_1d = d == 1 && c.model.kind() == ModelKind::schrodinger_barrier &&
                        !(c.model.perturbation_scale() > 0.0);
  const double lambda = c.model.lambda1();

  if (exact_1d) {
    // connection coefficients of the exact problem
    json oracle = json::array();
    for (double h : c.h_list) {
      const ConnectionResult r = weber_connection(lambda, 0.0, h, c.epsilon, 0.0, c.oracle_tol);
      oracle.push_back({{"h", h}, {"T2", r.transmission_probability()}, {"R2", r.reflection_probability()},
                        {"estimated_error", r.estimated_error}});
      ctx.log << "|T|^2(z=0) = " << std::fixed << std::setprecision(10) << r.transmission_probability()
              << std::defaultfloat << " (h=" << fmt(h) << ", oracle error " << fmt(r.estimated_error) << ")\n";
    }
    body["oracle_z0"] = oracle;

    TransitionComparison cmp;
    std::vector<TransitionComparison> parts(c.z_list.size());
    parallel_for(c.z_list.size(), ctx.opt.jobs, [&](std::size_t k) {
      if (c.z_in_units_of_h) {
        // scaled z: one comparison per h with z = z_k h
        TransitionComparison t;
        for (double h : c.h_list) {
          auto one = compare_transition(sc, {c.z_list[k] * h}, {h}, c.x_eval);
          t.rows.push_back(one.rows.front());
        }
        parts[k] = t;
      } else {
        parts[k] = compare_transition(sc, {c.z_list[k]}, c.h_list, c.x_eval);
      }
    });
    json slopes = json::array();
    for (std::size_t k = 0; k < parts.size(); ++k) {
      for (const auto& r : parts[k].rows) cmp.rows.push_back(r);
      // slope of log rel_err against log h over the h sweep
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int m = 0;
      for (const auto& r : parts[k].rows) {
        if (r.excluded || !(r.rel_err_modulus > 0.0)) continue;
        const double lx = std::log(r.h), ly = std::log(r.rel_err_modulus);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
        ++m;
      }
      const double slope = m >= 2 ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
      slopes.push_back({{"z", complex_to_json(c.z_list[k])}, {"z_scale", c.z_in_units_of_h ? "h" : "absolute"},
                        {"slope", slope}});
    }
    {
      auto os = ctx.csv("comparison.csv");
      write_comparison_csv(os, cmp);
    }
    body["comparison_slopes"] = slopes;

    json res = json::array();
    {
      auto os = ctx.csv("resonances.csv");
      os << "h,n,re,im,lattice_re,lattice_im,rel_err\n";
      for (double h : c.h_list) {
        const std::vector<Complex> vals = scaled_resonances(lambda, h, c.resonance_count);
        double worst = 0.0;
        for (std::size_t n = 0; n < vals.size(); ++n) {
          const Complex lat = gamma_pole_point(c.model.lambdas(), h, static_cast<int>(n));
          const double rel = std::abs(vals[n] - lat) / std::abs(lat);
          worst = std::max(worst, rel);
          os << fmt(h) << "," << n << "," << fmt(vals[n].real()) << "," << fmt(vals[n].imag()) << ","
             << fmt(lat.real()) << "," << fmt(lat.imag()) << "," << fmt(rel) << "\n";
        }
        res.push_back({{"h", h}, {"count", vals.size()}, {"max_rel_err", worst}});
        ctx.log << "resonances: h=" << fmt(h) << " max rel err vs lattice=" << fmt(worst) << "\n";
      }
    }
    body["resonances"] = res;
  } else {
    body["oracle_z0"] = {{"skipped", "the Weber oracle needs an unperturbed one-dimensional barrier model"}};
  }

  if (d == 1 && c.microlocal && c.model.kind() == ModelKind::schrodinger_barrier) {
    const auto levels = microlocalization_study(sc, sweep.front().z, c.microlocal_h, c.tube);
    json ml = json::array();
    auto os = ctx.csv("microlocal.csv");
    os << "h,grid_points,outside_fraction,ratio_to_previous,plancherel_error,residual\n";
    for (const auto& lv : levels) {
      os << fmt(lv.h) << "," << lv.grid_points << "," << fmt(lv.outside_fraction) << ","
         << fmt(lv.ratio_to_previous) << "," << fmt(lv.plancherel_error) << "," << fmt(lv.residual) << "\n";
      ml.push_back({{"h", lv.h}, {"outside_fraction", lv.outside_fraction}, {"ratio", lv.ratio_to_previous}});
      ctx.log << "microlocal: h=" << fmt(lv.h) << " outside fraction=" << fmt(lv.outside_fraction) << "\n";
    }
    body["microlocalization"] = ml;
  }

  if (d >= 2) {
    // no exact solution: compare the two routes to d0 instead
    std::vector<Vec> targets = c.targets;
    if (targets.empty()) {
      Vec x = Vec::Zero(d);
      x[0] = -2.0 * c.epsilon;
      targets.push_back(x);
    }
    const Vec y = c.y_primes.empty() ? (c.x_minus_prime.size() ? c.x_minus_prime : Vec(Vec::Zero(d - 1)))
                                     : c.y_primes.front();
    std::vector<double> rel(targets.size() * sweep.size(), 0.0);
    std::vector<std::exception_ptr> errs(rel.size());
    parallel_for(rel.size(), ctx.opt.jobs, [&](std::size_t i) {
      try {
        const SweepPoint& p = sweep[i % sweep.size()];
        const Vec& x = targets[i / sweep.size()];
        const Complex a = d0_closed_form(sc, x, y, p.z, p.h).d0;
        const Complex b = d0_via_transport(sc, x, y, p.z, p.h);
        rel[i] = std::abs(a - b) / std::abs(a);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    });
    std::vector<Failure> failures;
    json rows = json::array();
    for (std::size_t i = 0; i < rel.size(); ++i) {
      if (errs[i]) {
        failures.push_back(describe("d0_via_transport", errs[i]));
        continue;
      }
      rows.push_back({{"x", vec_json(targets[i / sweep.size()])}, {"z", complex_to_json(sweep[i % sweep.size()].z)},
                      {"h", sweep[i % sweep.size()].h}, {"rel_diff", rel[i]}});
    }
    body["pipeline_equivalence"] = rows;
    ctx.write_json("verify.json", body);
    if (!failures.empty()) {
      ctx.record_failures(failures);
      return kExitNumerical;
    }
    double worst = 0.0;
    for (double r : rel) worst = std::max(worst, r);
    ctx.log << "pipeline equivalence: max rel diff=" << fmt(worst) << "\n";
    return kExitOk;
  }
  ctx.write_json("verify.json", body);
  return kExitOk;
}

int cmd_fbi(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const int d = c.model.dim();
  const double h = c.fbi_h;
  const double step = std::sqrt(h) / 6.0;
  std::vector<Axis> axes(d, Axis::with_max_step(-c.fbi_x_half, c.fbi_x_half, step));
  const Vec x0 = c.fbi_x0.size() ? c.fbi_x0 : Vec(Vec::Zero(d));
  const Vec xi0 = c.fbi_xi0.size() ? c.fbi_xi0 : Vec(Vec::Zero(d));
  GridFunction u;
  std::optional<TransitionScenario> sc;
  if (c.fbi_state == "assembled") {
    sc = c.build_scenario(c.sweep().front());
    u = assemble_solution_1d(*sc, c.sweep().front().z, h, axes.front()).u;
  } else {
    // wide enough for the Gaussian to fall below the boundary-decay threshold
    const double r = std::max(c.fbi_x_half, 7.0 * std::sqrt(h));
    for (int i = 0; i < d; ++i) axes[i] = Axis::with_max_step(x0[i] - r, x0[i] + r, step);
    u = coherent_state(axes, x0, xi0, h);
  }
  PhaseSpaceGrid grid;
  for (int i = 0; i < d; ++i) {
    grid.x_axes.push_back(Axis::with_max_step(-c.fbi_window_half, c.fbi_window_half, step));
    grid.xi_axes.push_back(Axis::with_max_step(-c.fbi_xi_half, c.fbi_xi_half, step));
  }
  const FbiResult r = fbi(u, grid, h);
  {
    auto os = ctx.csv("fbi.csv");
    write_grid_csv(os, r.transform);
  }
  {
    auto os = ctx.csv("state.csv");
    write_grid_csv(os, u);
  }
  const Box xb = Box::symmetric(d, c.fbi_window_half);
  const Box kb = Box::symmetric(d, c.fbi_xi_half);
  const auto all = PhaseSpaceRegion::everything(xb, kb);
  std::optional<PhaseSpaceRegion> region;
  if (c.region_kind == "ball") {
    region = PhaseSpaceRegion::ball(c.region_center.size() ? c.region_center : Vec(Vec::Zero(2 * d)), c.region_radius);
  } else if (c.region_kind == "everything") {
    region = all;
  } else {
    if (!sc) sc = c.build_scenario(c.sweep().front());
    const auto tube = PhaseSpaceRegion::tube({sc->phi_minus, sc->phi_plus}, c.tube, xb);
    region = c.region_kind == "tube" ? tube : PhaseSpaceRegion::complement(tube, xb, kb);
  }
  const double total = frequency_mass(r.transform, all);
  const double inside = frequency_mass(r.transform, *region);
  ctx.write_json("masses.json", {{"h", h},
                                 {"state", c.fbi_state},
                                 {"region", region->describe()},
                                 {"total_mass", total},
                                 {"region_mass", inside},
                                 {"region_fraction", inside / total},
                                 {"input_norm", r.input_norm},
                                 {"plancherel_error", r.plancherel_error()}});
  ctx.log << "fbi: plancherel error=" << fmt(r.plancherel_error()) << " region fraction=" << fmt(inside / total)
          << "\n";
  return kExitOk;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"model", "lattice", "flow", "phase", "transition", "verify", "fbi"};
  return names;
}

int run(const std::string& subcommand, const RunConfig& config, const CliOptions& options) {
  std::ostream& err = options.err ? *options.err : std::cerr;
  std::optional<Context> ctx;
  try {
    ctx.emplace(config, options, subcommand);
    const auto t0 = std::chrono::steady_clock::now();
    int code = kExitValidation;
    if (subcommand == "model") code = cmd_model(*ctx);
    else if (subcommand == "lattice") code = cmd_lattice(*ctx);
    else if (subcommand == "flow") code = cmd_flow(*ctx);
    else if (subcommand == "phase") code = cmd_phase(*ctx);
    else if (subcommand == "transition") code = cmd_transition(*ctx);
    else if (subcommand == "verify") code = cmd_verify(*ctx);
    else if (subcommand == "fbi") code = cmd_fbi(*ctx);
    else {
      err << "error: unknown subcommand '" << subcommand << "'\n";
      return kExitValidation;
    }
    ctx->note("done in " + fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) +
              " s");
    return code;
  } catch (...) {
    const Failure f = describe(subcommand, std::current_exception());
    if (ctx) {
      try {
        ctx->record_failures({f});
      } catch (...) {
        err << "error: " << f.type << ": " << f.message << "\n";
      }
    } else {
      err << "error: " << f.type << ": " << f.message << "\n";
    }
    return f.validation ? kExitValidation : kExitNumerical;
  }
}

int run(const std::string& subcommand, const std::string& config_path, const CliOptions& options) {
  std::ostream& err = options.err ? *options.err : std::cerr;
  try {
    const RunConfig cfg = load_config(config_path);
    return run(subcommand, cfg, options);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace saddle

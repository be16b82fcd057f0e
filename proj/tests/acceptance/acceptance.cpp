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

// Acceptance runner: one PASS/FAIL line per criterion. Tolerances and runtime
// limits are fixed here. Criteria listed in kKnownFailures are reported
// faithfully but do not change the exit status.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "saddle/asymptotics.hpp"
#include "saddle/core_model.hpp"
#include "saddle/errors.hpp"
#include "saddle/flow_geometry.hpp"
#include "saddle/microlocal.hpp"
#include "saddle/oracle_1d.hpp"
#include "saddle/phase_builder.hpp"
#include "saddle/special_functions.hpp"
#include "saddle/transition_operator.hpp"

using namespace saddle;

namespace {

const std::set<int> kKnownFailures = {5, 8};

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds
  std::function<Outcome()> run;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TransitionScenario scenario(const HamiltonianModel& m, double eps, double h, Vec x_minus_prime = Vec(),
                            double C1 = 1.0) {
  ScenarioOptions o;
  o.epsilon = eps;
  o.x_minus_prime = std::move(x_minus_prime);
  return make_scenario(m, spectral_params(0.0, h, 1.0, C1, 0.1, m.lambdas()), o);
}

// ---------------------------------------------------------------------------
// independent enumerations

std::vector<double> brute_lattice(const Vec& l, double h, double bound) {
  const int d = static_cast<int>(l.size());
  std::vector<double> out;
  const int nmax = static_cast<int>(bound / (h * l.minCoeff())) + 2;
  std::vector<int> a(d, 0);
  while (true) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += l[j] * (a[j] + 0.5);
    if (h * s <= bound * (1.0 + 1e-14)) out.push_back(-h * s);
    int j = 0;
    while (j < d && ++a[j] > nmax) a[j++] = 0;
    if (j == d) break;
  }
  std::sort(out.begin(), out.end(), [](double a, double b) { return a > b; });
  return out;
}

std::vector<double> brute_ladder(const Vec& l, double cutoff) {
  std::vector<double> sums;
  std::vector<int> n(l.size(), 0);
  while (true) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < l.size(); ++j) s += n[j] * l[j];
    if (s <= cutoff + 1e-12) sums.push_back(s);
    Eigen::Index j = 0;
    while (j < l.size() && (++n[j]) * l[j] > cutoff + 1e-12) n[j++] = 0;
    if (j == l.size()) break;
  }
  std::sort(sums.begin(), sums.end());
  std::vector<double> out;
  for (double s : sums)
    if (out.empty() || s - out.back() > 1e-12 * l.maxCoeff()) out.push_back(s);
  return out;
}

// ---------------------------------------------------------------------------

Outcome lattice_and_ladders() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> ud(1, 3);
  std::uniform_real_distribution<double> ul(0.3, 3.0), uh(0.01, 0.2), ub(0.5, 6.0), uc(0.2, 1.0);
  double worst = 0.0;
  bool sizes = true;
  for (int draw = 0; draw < 50; ++draw) {
    const int d = ud(rng);
    Vec l(d);
    for (int j = 0; j < d; ++j) l[j] = ul(rng);
    std::sort(l.data(), l.data() + d);
    const double h = uh(rng);
    const double bound = ub(rng) * h * l.sum();
    const auto lat = gamma0_lattice(l, h, bound);
    const auto ref = brute_lattice(l, h, bound);
    if (lat.points.size() != ref.size()) {
      sizes = false;
      continue;
    }
    for (std::size_t k = 0; k < ref.size(); ++k)
      worst = std::max({worst, std::abs(lat.points[k].imag() - ref[k]), std::abs(lat.points[k].real())});

    const double cutoff = uc(rng) * 10.0 * l[d - 1];
    const auto mu = mu_ladder(l, cutoff);
    const auto lref = brute_ladder(l, cutoff);
    if (mu.size() != lref.size()) {
      sizes = false;
      continue;
    }
    for (std::size_t k = 0; k < lref.size(); ++k) worst = std::max(worst, std::abs(mu[k] - lref[k]));
  }
  return {sizes && worst <= 1e-12, "50 draws, max elementwise diff " + num(worst) + (sizes ? "" : ", size mismatch")};
}

Outcome geometry() {
  const std::vector<HamiltonianModel> models = {
      make_barrier_model({1.0}), make_barrier_model({1.0, 2.0}),
      make_barrier_model({1.0}, {{{3}, 0.1}}),
      make_barrier_model({1.0, 2.0}, {{{3, 0}, 0.05}, {{1, 2}, 0.05}})};
  double hess = 0.0, eik = 0.0, defect = 0.0;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& m : models) {
    const Mat L = m.lambdas().asDiagonal();
    for (int sign : {+1, -1}) {
      const auto chart = manifold_generating_function(m, sign, m.validity_box());
      hess = std::max(hess, (chart->hessian(Vec::Zero(m.dim())) - sign * 0.5 * L).norm());
      eik = std::max(eik, invariance_residual(m, *chart));
    }
    const double r = 0.05;
    for (int k = 0; k < 25; ++k) {
      PhasePoint p{Vec(m.dim()), Vec(m.dim())};
      for (int i = 0; i < m.dim(); ++i) {
        p.x[i] = r * u(rng);
        p.xi[i] = r * u(rng);
      }
      const auto fj = flow_with_jacobian(m, p, 0.8 * u(rng), 1e-10);
      defect = std::max(defect, symplectic_defect(fj.second));
    }
  }
  const bool ok = hess <= 1e-6 && eik <= 1e-8 && defect <= 1e-8;
  return {ok, "Hessian err " + num(hess) + ", eikonal residual " + num(eik) + ", symplectic defect " + num(defect)};
}

Complex gk_integral(const std::function<Complex(double)>& f) {
  using boost::math::quadrature::gauss_kronrod;
  auto re = [&](double t) { return f(t).real(); };
  auto im = [&](double t) { return f(t).imag(); };
  const double inf = std::numeric_limits<double>::infinity();
  return {gauss_kronrod<double, 31>::integrate(re, 0.0, inf, 15, 1e-14),
          gauss_kronrod<double, 31>::integrate(im, 0.0, inf, 15, 1e-14)};
}

Outcome expandible() {
  // constructed series
  auto samples = [](const std::function<Vec(double)>& f, double t_max, int n) {
    std::vector<FitSample> out;
    for (double t : expandible_sample_times(t_max, n)) out.push_back({t, f(t)});
    return out;
  };
  const auto ladder = mu_ladder(vec({1.0, 2.0}), 4.0);
  auto f = [](double t) {
    return vec({0.3 * std::exp(-t) - (0.2 + 0.1 * t) * std::exp(-2 * t), 0.7 * std::exp(-3 * t) + 0.05 * std::exp(-4 * t)});
  };
  const auto s = fit_expandible(samples(f, 8.0, 48), ladder, 1);
  auto coeff = [&](double mu, int row, int deg) {
    for (const auto& t : s.terms)
      if (std::abs(t.mu - mu) < 1e-12 && deg < t.coeffs.cols()) return t.coeffs(row, deg);
    return Complex(0.0);
  };
  double series_err = std::max({std::abs(coeff(1, 0, 0) - 0.3), std::abs(coeff(2, 0, 0) + 0.2), std::abs(coeff(2, 0, 1) + 0.1),
                                std::abs(coeff(3, 1, 0) - 0.7), std::abs(coeff(4, 1, 0) - 0.05), std::abs(coeff(0, 0, 0)),
                                std::abs(coeff(1, 1, 0))});

  // Lambda_- trajectories of the unperturbed barrier from integrated flow
  const auto m = make_barrier_model({1.0, 2.0});
  const double eps = 0.1;
  double traj_err = 0.0;
  for (double x2 : {0.0, 0.03, -0.05}) {
    const Vec x0 = vec({eps, x2});
    const PhasePoint p{x0, Vec(-0.5 * m.lambdas().cwiseProduct(x0))};
    const auto times = expandible_sample_times(8.0, 48);
    const auto tr = trajectory(m, p, times, 1e-12);
    std::vector<FitSample> fs;
    for (std::size_t k = 0; k < times.size(); ++k) fs.push_back({times[k], tr.points[k].x});
    const auto fit = fit_expandible(fs, mu_ladder(m.lambdas(), 6.0), 1);
    const auto lt = leading_term(fit, 2, 1.0);
    traj_err = std::max({traj_err, std::abs(lt.mu1 - 1.0), (lt.g1 - vec({eps, 0.0})).norm()});
  }

  // resolvent integral against adaptive quadrature
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double resolvent_err = 0.0;
  for (int draw = 0; draw < 10; ++draw) {
    ShiftedSeries sh;
    const Complex S(0.2 + 0.5 * (u(rng) + 1.0), 2.0 * u(rng));
    for (int j = 0; j < 3; ++j) {
      SeriesTerm t;
      t.mu = 0.5 * j;
      t.coeffs = CMat(1, 3);
      for (int l = 0; l < 3; ++l) t.coeffs(0, l) = Complex(u(rng), u(rng));
      sh.terms.push_back(t);
    }
    const Complex val = resolvent_integral(sh, S)[0];
    const Complex ref = gk_integral([&](double t) {
      Complex acc = 0.0;
      for (const auto& term : sh.terms)
        for (int l = 0; l < 3; ++l) acc += term.coeffs(0, l) * std::pow(t, l) * std::exp(-(S + term.mu) * t);
      return acc;
    });
    resolvent_err = std::max(resolvent_err, std::abs(val - ref) / std::max(1.0, std::abs(ref)));
  }
  const bool ok = series_err <= 1e-8 && traj_err <= 1e-6 && resolvent_err <= 1e-9;
  return {ok, "series " + num(series_err) + ", mu1/g1 " + num(traj_err) + ", resolvent " + num(resolvent_err)};
}

Outcome pipeline_equivalence() {
  const double h = 0.05;
  const auto m = make_quadratic_model({1.0, 2.0});
  const auto sc = scenario(m, 0.1, h, vec({0.02}), 2.5);
  const auto lattice = gamma0_lattice(m.lambdas(), h, 10.0 * h);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ux(-0.2, 0.2), uy(-0.03, 0.03), ure(-1.0, 1.0), uim(-2.5, 2.5);
  int accepted = 0, tried = 0;
  double worst = 0.0;
  while (accepted < 20 && tried < 400) {
    ++tried;
    const Vec x = vec({ux(rng), ux(rng)});
    const Vec yp = vec({0.02 + uy(rng)});
    const Complex z(ure(rng) * h, uim(rng) * h);
    if (distance_to_lattice(z, lattice) <= sc.nu * h) continue;
    TransitionEvaluation ev;
    try {
      ev = d0_closed_form(sc, x, yp, z, h);
    } catch (const ValidationError&) {
      continue;  // inside the bad-set tolerance
    }
    if (ev.badset_margin <= 0.1) continue;
    const Complex tr = d0_via_transport(sc, x, yp, z, h);
    worst = std::max(worst, std::abs(tr - ev.d0) / std::abs(ev.d0));
    ++accepted;
  }
  return {accepted == 20 && worst <= 1e-6,
          std::to_string(accepted) + " triples, max relative difference " + num(worst)};
}

Outcome oracle_agreement() {
  const double lam = 1.0;
  const auto sc = scenario(make_barrier_model({lam}), 0.1, 0.1);
  const std::vector<double> hs = {0.2, 0.1, 0.05};
  const std::vector<Complex> zs = {0.0, 0.3 * lam, -0.3 * lam};  // in units of h
  std::vector<TransitionComparisonRow> rows;
  for (double h : hs) {
    std::vector<Complex> zl;
    for (Complex w : zs) zl.push_back(w * h);
    const auto cmp = compare_transition(sc, zl, {h}, -0.8);
    rows.insert(rows.end(), cmp.rows.begin(), cmp.rows.end());
  }
  bool bound_ok = true;
  double worst_ratio = 0.0;
  for (const auto& r : rows) {
    if (r.excluded) {
      bound_ok = false;
      continue;
    }
    worst_ratio = std::max(worst_ratio, r.rel_err_modulus / r.h);
    if (r.rel_err_modulus > 0.5 * r.h) bound_ok = false;
  }
  double min_slope = std::numeric_limits<double>::infinity();
  for (Complex w : zs) {
    std::vector<double> lx, ly;
    for (const auto& r : rows)
      if (!r.excluded && std::abs(r.z / r.h - w) < 1e-12 && r.rel_err_modulus > 0.0) {
        lx.push_back(std::log(r.h));
        ly.push_back(std::log(r.rel_err_modulus));
      }
    if (lx.size() < 2) {
      min_slope = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sxy += (lx[k] - mx) * (ly[k] - my);
      sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    min_slope = std::min(min_slope, sxy / sxx);
  }
  const auto top = weber_connection(lam, 0.0, 0.1, 0.1);
  const double t2_err = std::abs(top.transmission_probability() - 0.5);
  const bool ok = bound_ok && min_slope >= 0.9 && t2_err <= 1e-6;
  return {ok, "max err/h " + num(worst_ratio) + " (bound 0.5), min slope " + num(min_slope) + " (need 0.9), |T|^2(0) err " +
                  num(t2_err)};
}

Outcome resonance_match() {
  double worst = 0.0;
  for (double h : {0.1, 0.05}) {
    const auto r = scaled_resonances(1.0, h, 5);
    const auto lat = gamma0_lattice(vec({1.0}), h, 6.0 * h);
    if (r.size() != 5 || lat.points.size() < 5) return {false, "wrong number of resonances"};
    for (std::size_t k = 0; k < 5; ++k) worst = std::max(worst, std::abs(r[k] - lat.points[k]) / std::abs(lat.points[k]));
  }
  return {worst <= 1e-4, "max relative error " + num(worst)};
}

Outcome pole_structure() {
  const double h = 0.05, C0 = 1.0, C1 = 2.5;
  const auto m = make_barrier_model({1.0, 2.0});
  const auto sc = scenario(m, 0.1, h, Vec(), C1);
  const Vec x = vec({0.02, 0.01}), yp = vec({0.01});
  const auto geo = transition_geometry(sc, x, yp);
  std::vector<Complex> poles;
  for (int n = 0; n < 10; ++n) {
    const Complex p = gamma_pole_point(m.lambdas(), h, n);
    if (std::abs(p.imag()) <= C1 * h * (1.0 + 1e-12)) poles.push_back(p);
  }
  auto expected_pole = [&](Complex z) {
    for (const Complex& p : poles)
      if (std::abs(z - p) <= 1e-8 * h) return true;
    return false;
  };
  auto raises = [&](Complex z) {
    try {
      assemble(sc, geo, z, h);
    } catch (const PoleError&) {
      return true;
    }
    return false;
  };
  int mismatches = 0, pole_hits = 0, points = 0;
  for (int a = 0; a < 41; ++a)
    for (int b = 0; b < 41; ++b) {
      const Complex z(-C0 * h + a * (2.0 * C0 * h / 40.0), -C1 * h + b * (2.0 * C1 * h / 40.0));
      ++points;
      const bool r = raises(z);
      if (r) ++pole_hits;
      if (r != expected_pole(z)) ++mismatches;
    }
  // probes just inside and just outside each disk
  int probe_mismatches = 0;
  for (const Complex& p : poles)
    for (double ang : {0.0, 1.3, 2.9}) {
      const Complex dir = std::polar(1.0, ang);
      if (!raises(p + 0.5e-8 * h * dir)) ++probe_mismatches;
      if (raises(p + 2e-8 * h * dir)) ++probe_mismatches;
    }
  // the closed form itself raises at the poles
  bool closed_form_raises = true;
  for (const Complex& p : poles) {
    try {
      d0_closed_form(sc, x, yp, p, h);
      closed_form_raises = false;
    } catch (const PoleError&) {
    }
  }
  const bool ok = mismatches == 0 && probe_mismatches == 0 && closed_form_raises && pole_hits == static_cast<int>(poles.size());
  return {ok, std::to_string(points) + " grid points, " + std::to_string(pole_hits) + " pole errors at " +
                  std::to_string(poles.size()) + " lattice points, " + std::to_string(mismatches + probe_mismatches) +
                  " mismatches"};
}

Outcome microlocalization() {
  const auto sc = scenario(make_barrier_model({1.0}), 0.1, 0.1);
  const auto levels = microlocalization_study(sc, 0.0, {0.1, 0.05, 0.025});
  bool ok = levels.size() == 3;
  std::ostringstream os;
  os << "outside fractions";
  for (const auto& l : levels) os << " " << num(l.outside_fraction);
  os << ", ratios";
  for (std::size_t k = 1; k < levels.size(); ++k) {
    os << " " << num(levels[k].ratio_to_previous);
    if (!(levels[k].ratio_to_previous >= 3.0)) ok = false;
  }
  os << " (need 3)";
  return {ok, os.str()};
}

Outcome order_of_j() {
  const auto sc = scenario(make_barrier_model({1.0}), 0.1, 0.1);
  const std::vector<Vec> xs = {vec({0.05}), vec({0.1}), vec({0.2}), vec({-0.1})};
  auto sup = [&](double h) {
    const CVec v = apply_J(sc, CauchyData::point(1.0), xs, 0.0, h);
    return v.cwiseAbs().maxCoeff();
  };
  const double ref = sup(0.1);
  double worst = 1.0;
  for (double h : {0.05, 0.025}) {
    const double r = sup(h) / ref;
    worst = std::max({worst, r, 1.0 / r});
  }
  return {worst <= 1.5, "max sup-modulus ratio to h=0.1 " + num(worst)};
}

Outcome special_functions() {
  double worst = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double y = -5.0 + 0.1 * k;
    const double v = std::norm(complex_gamma(Complex(0.5, y))) * std::cosh(M_PI * y) / M_PI;
    worst = std::max(worst, std::abs(v - 1.0));
  }
  return {worst <= 1e-10, "101 points, max deviation " + num(worst)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<Criterion> criteria = {
      {1, "lattice and ladders", 1.0, lattice_and_ladders},
      {2, "geometry", 30.0, geometry},
      {3, "expandible machinery", 10.0, expandible},
      {4, "transition operator cross-validation", 120.0, pipeline_equivalence},
      {5, "1-D oracle agreement", 60.0, oracle_agreement},
      {6, "resonance match", 30.0, resonance_match},
      {7, "pole structure", 30.0, pole_structure},
      {8, "microlocalization", 120.0, microlocalization},
      {9, "order of J", 30.0, order_of_j},
      {10, "special functions", 1.0, special_functions},
  };

  int unexpected = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.time_limit;
    const bool pass = out.pass && in_time;
    std::printf("%s %2d %s: %s; %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                out.detail.c_str(), secs, c.time_limit,
                !pass && kKnownFailures.count(c.id) ? " [known failure]" : "");
    std::fflush(stdout);
    if (!pass && !kKnownFailures.count(c.id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}

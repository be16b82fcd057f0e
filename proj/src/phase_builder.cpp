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

#include "saddle/phase_builder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "saddle/errors.hpp"

namespace saddle {

namespace {

Vec with_first(double x1, const Vec& rest) {
  Vec x(rest.size() + 1);
  x[0] = x1;
  x.tail(rest.size()) = rest;
  return x;
}

OdeOptions tight(double tol) {
  OdeOptions o;
  o.abs_tol = tol;
  o.rel_tol = tol;
  return o;
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

TransitionScenario make_scenario(const HamiltonianModel& model, const SpectralParams& spectral,
                                 const ScenarioOptions& options) {
  const int d = model.dim();
  if (!(options.epsilon > 0.0)) throw ValidationError("scenario: epsilon must be positive");
  Vec xmp = options.x_minus_prime.size() == 0 ? Vec(Vec::Zero(d - 1)) : options.x_minus_prime;
  if (xmp.size() != d - 1) throw ValidationError("scenario: x_minus_prime must have d-1 entries");
  if (!(options.nu > 0.0) || !(options.badset_tol > 0.0))
    throw ValidationError("scenario: nu and badset_tol must be positive");

  TransitionScenario sc;
  sc.model = model;
  sc.lin = linearize(model);
  sc.epsilon = options.epsilon;
  sc.spectral = spectral;
  sc.nu = options.nu;
  sc.badset_tol = options.badset_tol;

  const Box dom = options.chart_domain.dim() == d ? options.chart_domain : model.validity_box();
  const Vec xm = with_first(options.epsilon, xmp);
  if (!dom.contains(xm, 0.0)) throw ValidationError("scenario: rho_- lies outside the chart domain");
  sc.phi_plus = manifold_generating_function(model, +1, dom, options.chart);
  sc.phi_minus = manifold_generating_function(model, -1, dom, options.chart);
  sc.rho_minus = {xm, sc.phi_minus->gradient(xm)};

  sc.g1_minus = leading_coefficient(model, *sc.phi_minus, -1, xm);
  const double g = sc.g1_minus.norm();
  if (!(g > 1e-8 * options.epsilon))
    throw ValidationError("scenario: rho_- lies on the bad set (g_1^- = 0)");
  if (d > 1 && sc.g1_minus.tail(d - 1).norm() > 1e-8 * g)
    throw ValidationError("scenario: g_1^- is not collinear to the x_1 axis; rotate coordinates");
  if (sc.g1_minus[0] <= 0.0) throw ValidationError("scenario: g_1^- must point along +x_1");

  const double hw = options.eta_box_halfwidth > 0.0 ? options.eta_box_halfwidth : 0.5 * options.epsilon;
  const Vec em = sc.rho_minus.xi.tail(d - 1);
  sc.eta_prime_box = {em.array() - hw, em.array() + hw};
  return sc;
}

// ---------------------------------------------------------------------------

EikonalPsi::EikonalPsi(const TransitionScenario& scenario, Vec eta_prime, Vec foot_guess,
                       double tol)
    : sc_(&scenario), eta_(std::move(eta_prime)), foot_(std::move(foot_guess)), tol_(tol) {
  const int d = scenario.dim();
  if (eta_.size() != d - 1 || foot_.size() != d - 1)
    throw ValidationError("EikonalPsi: eta' and the foot point need d-1 entries");
}

PhasePoint EikonalPsi::start(const Vec& x_prime) const {
  const Vec x = with_first(sc_->epsilon, x_prime);
  const BranchRoots r = branch_roots(sc_->model, x, eta_);
  if (!r.real) throw NumericalError("psi: no real incoming root f_- at this point of H_-");
  return {x, with_first(r.f_minus.real(), eta_)};
}

Mat EikonalPsi::start_tangents(const Vec& x_prime) const {
  const int d = sc_->dim();
  const PhasePoint s = start(x_prime);
  const Vec g = sc_->model.grad_p0(s.x, s.xi);
  Mat T = Mat::Zero(2 * d, d - 1);
  for (int j = 0; j < d - 1; ++j) {
    T(j + 1, j) = 1.0;
    T(d, j) = -g[j + 1] / g[d];  // d_{x'_j} f_- = -d_{x_j} p / d_{xi_1} p
  }
  return T;
}

EikonalPsi::Point EikonalPsi::evaluate(const Vec& x, const Point* guess) const {
  const int d = sc_->dim();
  const HamiltonianModel& m = sc_->model;
  const OdeOptions opt = tight(tol_);
  const Vec x_start = with_first(sc_->epsilon, foot_);

  Vec xp = foot_;
  double t = 0.0;
  CarriedFlow f;
  auto newton = [&](const Vec& target, double& tt, Vec& xx) -> bool {
    for (int it = 0; it < 30; ++it) {
      f = flow_carrying(m, start(xx), tt, start_tangents(xx), opt, false);
      const Vec F = f.end.x - target;
      const double scale = sc_->epsilon + target.norm();
      if (F.norm() <= 1e-12 * scale) return true;
      Mat J(d, d);
      J.col(0) = m.dxi_p0(f.end.x, f.end.xi);
      if (d > 1) J.rightCols(d - 1) = f.tangents.topRows(d);
      const Vec delta = J.fullPivLu().solve(F);
      if (!delta.allFinite() || std::abs(delta[0]) > 5.0 / m.lambda1()) return false;
      tt -= delta[0];
      if (d > 1) xx -= delta.tail(d - 1);
      const double size = std::abs(tt) + (d > 1 ? xx.norm() : 0.0) + sc_->epsilon;
      if (delta.norm() <= 1e-15 * size && F.norm() <= 1e-7 * scale) return true;
    }
    return false;
  };

  double reached = 0.0;
  double step = 0.25;
  if (guess) {
    double tt = guess->t;
    Vec xx = guess->x_prime;
    bool ok = false;
    try {
      ok = newton(x, tt, xx);
    } catch (const NumericalError&) {
      ok = false;
    }
    if (ok) {
      t = tt;
      xp = xx;
      reached = 1.0;
    }
  }
  // continuation along the segment from the foot point to x
  while (reached < 1.0) {
    const double next = std::min(1.0, reached + step);
    const Vec target = x_start + next * (x - x_start);
    double tt = t;
    Vec xx = xp;
    bool ok = false;
    try {
      ok = newton(target, tt, xx);
    } catch (const NumericalError&) {
      ok = false;
    }
    if (ok) {
      t = tt;
      xp = xx;
      reached = next;
      step = std::min(0.5, step * 1.5);
    } else {
      step *= 0.5;
      if (step < 1e-4) {
        std::ostringstream os;
        os << "psi: characteristics do not reach x = " << x.transpose()
           << " (caustic or escape)";
        throw NumericalError(os.str());
      }
    }
  }
  // final pass at the target to refresh the carried data
  f = flow_carrying(m, start(xp), t, start_tangents(xp), opt, false);

  Point out;
  out.t = t;
  out.x_prime = xp;
  out.value = xp.dot(eta_) + f.action;
  out.gradient = f.end.xi;
  const Vec g = m.grad_p0(f.end.x, f.end.xi);
  Mat X(d, d), Xi(d, d);
  X.col(0) = g.tail(d);
  Xi.col(0) = -g.head(d);
  if (d > 1) {
    X.rightCols(d - 1) = f.tangents.topRows(d);
    Xi.rightCols(d - 1) = f.tangents.bottomRows(d);
  }
  Eigen::FullPivLU<Mat> lu(X);
  if (lu.rank() < d) {
    std::ostringstream os;
    os << "psi: caustic at x = " << x.transpose();
    throw NumericalError(os.str());
  }
  out.hessian = symmetrize(Xi * lu.inverse());
  return out;
}

Box default_psi_domain(const TransitionScenario& scenario, const Vec& foot_prime) {
  const double e = scenario.epsilon;
  Box b{with_first(0.5 * e, foot_prime.array() - 0.5 * e),
        with_first(1.5 * e, foot_prime.array() + 0.5 * e)};
  return b;
}

PsiChart::PsiChart(Box domain, std::shared_ptr<const EikonalPsi> psi)
    : LagrangianChart(ChartKind::psi_eta, std::move(domain)), psi_(std::move(psi)) {}

EikonalPsi::Point PsiChart::point(const Vec& x) const {
  std::optional<EikonalPsi::Point> guess;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (last_ && (x - last_x_).norm() <= 0.25 * (x.norm() + last_x_.norm())) guess = last_;
  }
  EikonalPsi::Point p = psi_->evaluate(x, guess ? &*guess : nullptr);
  std::lock_guard<std::mutex> lock(mutex_);
  last_ = p;
  last_x_ = x;
  return p;
}

void PsiChart::evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const {
  const EikonalPsi::Point p = point(x);
  if (value) *value = p.value;
  if (grad) *grad = p.gradient;
  if (hess) *hess = p.hessian;
}

ChartPtr eikonal_psi(const TransitionScenario& scenario, const Vec& eta_prime, const Box& domain) {
  const IntersectionPoint ip = intersection_point(scenario, eta_prime);
  const int d = scenario.dim();
  const Vec foot = ip.x_of_eta.tail(d - 1);
  const Box box = domain.dim() == d ? domain : default_psi_domain(scenario, foot);
  if (!scenario.model.in_validity(box.lo, 1e-12) || !scenario.model.in_validity(box.hi, 1e-12))
    throw ValidationError("psi domain exceeds the validity neighbourhood");
  auto chart = std::make_shared<PsiChart>(
      box, std::make_shared<const EikonalPsi>(scenario, eta_prime, foot));
  chart->set_base_point(ip.rho_eta);
  const double inv = invariance_residual(scenario.model, *chart, 5);
  chart->set_fit_residual(inv);
  if (inv > 1e-8) {
    std::ostringstream os;
    os << "psi chart eikonal residual " << inv << " exceeds 1e-8";
    throw NumericalError(os.str(), inv);
  }
  return chart;
}

IntersectionPoint intersection_point(const TransitionScenario& scenario, const Vec& eta_prime) {
  const int d = scenario.dim();
  if (eta_prime.size() != d - 1) throw ValidationError("intersection_point: eta' needs d-1 entries");
  const LagrangianChart& pm = *scenario.phi_minus;
  IntersectionPoint out;
  Vec xp = scenario.rho_minus.x.tail(d - 1);
  double res = 0.0;
  if (d > 1) {
    int it = 0;
    for (; it < 50; ++it) {
      const Vec x = with_first(scenario.epsilon, xp);
      Vec g;
      Mat H;
      pm.evaluate(x, nullptr, &g, &H);
      const Vec F = g.tail(d - 1) - eta_prime;
      res = F.norm();
      if (res <= 1e-13 * (1.0 + eta_prime.norm())) break;
      xp -= H.bottomRightCorner(d - 1, d - 1).fullPivLu().solve(F);
      if (!xp.allFinite()) break;
    }
    out.iterations = it;
    if (res > 1e-10 || !xp.allFinite())
      throw NumericalError("intersection_point: Newton did not converge in 50 steps", res);
  }
  out.residual = res;
  out.x_of_eta = with_first(scenario.epsilon, xp);
  const BranchRoots r = branch_roots(scenario.model, out.x_of_eta, eta_prime);
  if (!r.real) throw NumericalError("intersection_point: no real root f_-");
  out.rho_eta = {out.x_of_eta, with_first(r.f_minus.real(), eta_prime)};
  out.consistency = std::abs(pm.gradient(out.x_of_eta)[0] - r.f_minus.real());
  if (out.consistency > 1e-6)
    throw NumericalError("intersection_point: d_1 phi_- and f_- disagree", out.consistency);
  return out;
}

double psi_tilde(const TransitionScenario& scenario, const Vec& eta_prime) {
  const IntersectionPoint ip = intersection_point(scenario, eta_prime);
  const int d = scenario.dim();
  return ip.x_of_eta.tail(d - 1).dot(eta_prime) - scenario.phi_minus->value(ip.x_of_eta);
}

// ---------------------------------------------------------------------------

Lambda0Chart::Lambda0Chart(ChartPtr psi, double psi0, double kappa)
    : LagrangianChart(ChartKind::lambda0, psi->domain()), psi_(std::move(psi)), psi0_(psi0),
      kappa_(kappa) {}

void Lambda0Chart::evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const {
  double v = 0.0;
  Vec g;
  Mat h;
  psi_->evaluate(x, &v, &g, hess ? &h : nullptr);
  const double dv = v - psi0_;
  if (value) *value = v + kappa_ * dv * dv;
  if (grad) *grad = (1.0 + 2.0 * kappa_ * dv) * g;
  if (hess) *hess = (1.0 + 2.0 * kappa_ * dv) * h + 2.0 * kappa_ * g * g.transpose();
}

Lambda0 build_lambda0(const TransitionScenario& scenario, const Vec& eta_prime) {
  const int d = scenario.dim();
  Lambda0 out;
  out.intersection = intersection_point(scenario, eta_prime);
  const ChartPtr psi = eikonal_psi(scenario, eta_prime);
  const Vec xe = out.intersection.x_of_eta;
  double v0 = 0.0;
  Vec g;
  Mat m;
  psi->evaluate(xe, &v0, &g, &m);
  if (std::abs(g[0]) < 1e-14) throw NumericalError("build_lambda0: d_1 psi vanishes at x(eta')");
  const double kappa = -m(0, 0) / (2.0 * g[0] * g[0]);
  out.chart = std::make_shared<Lambda0Chart>(psi, v0, kappa);

  const Mat H0 = out.chart->hessian(xe);
  out.tangent_frame.resize(2 * d, d);
  out.tangent_frame << Mat::Identity(d, d), H0;
  out.flatness = H0.norm();

  const Vec gp = scenario.model.grad_p0(out.intersection.rho_eta);
  Vec hp(2 * d);
  hp << gp.tail(d), -gp.head(d);
  hp.normalize();
  Eigen::HouseholderQR<Mat> qr(out.tangent_frame);
  const Mat Q = qr.householderQ() * Mat::Identity(2 * d, d);
  const double sin_angle = (hp - Q * (Q.transpose() * hp)).norm();
  out.hp_angle = std::asin(std::min(1.0, sin_angle));
  if (sin_angle < 1e-6)
    throw NumericalError("build_lambda0: H_p is tangent to Lambda_0 (transversality defect)",
                         sin_angle);

  // points of the level set {psi = psi_0}: Newton in x_1 along a few transverse offsets
  double defect = 0.0;
  const double e = scenario.epsilon;
  for (int k = -2; k <= 2; ++k) {
    Vec x = xe;
    if (d > 1) x.tail(d - 1).array() += 0.1 * e * k;
    else x[0] += 0.0;
    for (int it = 0; it < 40; ++it) {
      double v = 0.0;
      Vec gg;
      psi->evaluate(x, &v, &gg, nullptr);
      if (std::abs(v - v0) < 1e-15) break;
      x[0] -= (v - v0) / gg[0];
    }
    if (!psi->domain().contains(x)) continue;
    const Vec gpsi = psi->gradient(x);
    const Vec gphi = out.chart->gradient(x);
    defect = std::max({defect, std::abs(out.chart->value(x) - v0), (gphi - gpsi).norm()});
  }
  out.gamma0_defect = defect;
  return out;
}

// ---------------------------------------------------------------------------

PhaseFamily::PhaseFamily(const TransitionScenario& scenario, Vec eta_prime, Lambda0 lambda0,
                         double tol)
    : sc_(&scenario), eta_(std::move(eta_prime)), l0_(std::move(lambda0)),
      psi_tilde_(saddle::psi_tilde(scenario, eta_)),
      g1_norm_(leading_coefficient(scenario.model, *scenario.phi_minus, -1,
                                   l0_.intersection.x_of_eta)
                   .norm()),
      tol_(tol) {}

PhaseValue PhaseFamily::evaluate(double t, const Vec& x, const Vec* foot_guess) const {
  const int d = sc_->dim();
  const HamiltonianModel& m = sc_->model;
  const LagrangianChart& l0 = *l0_.chart;
  const OdeOptions opt = tight(tol_);

  CarriedFlow f;
  auto flow_from = [&](const Vec& x0) {
    Vec g;
    Mat H;
    l0.evaluate(x0, nullptr, &g, &H);
    Mat U(2 * d, d);
    U << Mat::Identity(d, d), H;
    f = flow_carrying(m, {x0, g}, t, U, opt, false);
  };
  auto newton = [&](const Vec& target, Vec& x0) -> bool {
    for (int it = 0; it < 40; ++it) {
      if (!l0.domain().contains(x0, 0.02)) return false;
      flow_from(x0);
      const Vec F = f.end.x - target;
      const double scale = sc_->epsilon + target.norm();
      if (F.norm() <= 1e-12 * scale) return true;
      const Vec delta = f.tangents.topRows(d).fullPivLu().solve(F);
      if (!delta.allFinite() || delta.norm() > sc_->epsilon) return false;
      x0 -= delta;
      // at the rounding floor of the flow map the step stagnates
      if (delta.norm() <= 1e-15 * x0.norm() && F.norm() <= 1e-7 * scale) return true;
    }
    return false;
  };

  Vec x0;
  bool ok = false;
  if (foot_guess) {
    x0 = *foot_guess;
    try {
      ok = newton(x, x0);
    } catch (const NumericalError&) {
      ok = false;
    }
  }
  if (!ok) {
    // continuation from the base ray of rho_eta
    x0 = l0_.intersection.x_of_eta;
    flow_from(x0);
    const Vec xb = f.end.x;
    double reached = 0.0, step = 0.25;
    while (reached < 1.0) {
      const double next = std::min(1.0, reached + step);
      Vec trial = x0;
      bool good = false;
      try {
        good = newton(xb + next * (x - xb), trial);
      } catch (const NumericalError&) {
        good = false;
      }
      if (good) {
        x0 = trial;
        reached = next;
        step = std::min(0.5, 1.5 * step);
      } else {
        step *= 0.5;
        if (step < 1e-4) {
          std::ostringstream os;
          os << "phase family: x = " << x.transpose() << " is not reached at t = " << t
             << " (outside the evolved domain or projection fold)";
          throw NumericalError(os.str());
        }
      }
    }
    flow_from(x0);
  }

  PhaseValue out;
  out.foot = x0;
  double v0 = 0.0;
  Vec g0;
  l0.evaluate(x0, &v0, &g0, nullptr);
  const double p_start = m.p0(x0, g0);
  out.value = v0 + f.action - t * p_start;
  out.gradient = f.end.xi;
  Eigen::FullPivLU<Mat> lu(f.tangents.topRows(d));
  if (lu.rank() < d) throw NumericalError("phase family: projection fold of Lambda_t");
  out.hessian = symmetrize(f.tangents.bottomRows(d) * lu.inverse());
  out.dt = -p_start;
  const Vec gp = m.grad_p0(x, out.gradient);
  const Vec px = gp.head(d), pxi = gp.tail(d);
  out.dtt = pxi.dot(px) + pxi.dot(out.hessian * pxi);
  return out;
}

PhaseFamily evolve_phase(const TransitionScenario& scenario, const Vec& eta_prime, double t_max,
                         const PhaseFamilyOptions& options) {
  const int d = scenario.dim();
  const double l1 = scenario.model.lambda1();
  if (!(t_max > 0.0) || t_max > 12.0 / l1 + 1e-12)
    throw ValidationError("evolve_phase: t_max must lie in (0, 12/lambda_1]");
  PhaseFamily fam(scenario, eta_prime, build_lambda0(scenario, eta_prime), options.tol);
  fam.t_max = t_max;

  const double r = options.box_radius > 0.0 ? options.box_radius : 0.25 * scenario.epsilon;
  const double t_min = options.t_min > 0.0 ? options.t_min
                                           : std::log(scenario.epsilon / r) / l1 + 2.0 / l1;
  if (t_min >= t_max) throw ValidationError("evolve_phase: t_max too small for the limit box");
  const int nt = std::max(8, options.t_samples);
  for (int k = 0; k < nt; ++k) fam.t_grid.push_back(t_min + (t_max - t_min) * k / (nt - 1));

  const int n = std::max(1, options.points_per_dim);
  long npts = 1;
  for (int i = 0; i < d; ++i) npts *= n;
  for (long p = 0; p < npts; ++p) {
    long q = p;
    Vec x(d);
    for (int i = 0; i < d; ++i) {
      const int k = static_cast<int>(q % n);
      q /= n;
      x[i] = n == 1 ? 0.0 : -r + 2.0 * r * k / (n - 1);
    }
    fam.x_grid.push_back(x);
  }

  fam.values.resize(nt, npts);
  fam.dt_values.resize(nt, npts);
  double eik = 0.0;
  for (long p = 0; p < npts; ++p) {
    Vec foot;
    bool have = false;
    for (int k = 0; k < nt; ++k) {
      const PhaseValue v = fam.evaluate(fam.t_grid[k], fam.x_grid[p], have ? &foot : nullptr);
      foot = v.foot;
      have = true;
      fam.values(k, p) = v.value;
      fam.dt_values(k, p) = v.dt;
      eik = std::max(eik, std::abs(v.dt + scenario.model.p0(fam.x_grid[p], v.gradient)));
    }
  }
  fam.eikonal_residual = eik;

  std::vector<FitSample> samples;
  for (int k = 0; k < nt; ++k) {
    Vec v = fam.values.row(k).transpose();
    v.array() -= fam.psi_tilde();
    samples.push_back({fam.t_grid[k], v});
  }
  const ExponentLadder ladder = mu_ladder(scenario.model.lambdas(), 6.0 * l1);
  FitOptions fo;
  fo.max_terms = 7;
  fam.expansion = fit_expandible(samples, ladder, options.poly_degree, fo);
  fam.limit = Vec::Zero(npts);
  for (const SeriesTerm& term : fam.expansion.terms)
    if (term.mu == 0.0) fam.limit = term.coeffs.col(0).real();
  return fam;
}

CriticalTime critical_time(const PhaseFamily& family, const Vec& x) {
  const Lambda0& l0 = family.lambda0();
  const double eps = l0.intersection.x_of_eta[0];
  if (x.size() != l0.intersection.x_of_eta.size())
    throw ValidationError("critical_time: dimension mismatch");
  if (!(x[0] > 0.0)) throw NumericalError("critical_time: x outside reachable cone (x_1 <= 0)");

  auto eval = [&](double t, const Vec* guess) { return family.evaluate(t, x, guess); };
  const double rate = family.scenario().model.lambda1();
  double t = std::max(0.0, std::log(eps / x[0]) / rate);
  PhaseValue v = eval(t, nullptr);
  Vec foot = v.foot;
  // bracket the sign change of d_t phi
  double lo = t, hi = t;
  PhaseValue vlo = v, vhi = v;
  const double step = 0.5 / rate;
  int guard = 0;
  if (v.dt < 0.0) {
    while (vhi.dt < 0.0) {
      hi += step;
      vhi = eval(hi, &foot);
      foot = vhi.foot;
      if (++guard > 80) throw NumericalError("critical_time: x outside reachable cone");
    }
    lo = hi - step;
    vlo = eval(lo, &foot);
  } else if (v.dt > 0.0) {
    while (vlo.dt > 0.0) {
      lo -= step;
      if (lo < -2.0 / rate) throw NumericalError("critical_time: x outside reachable cone");
      vlo = eval(lo, &foot);
      foot = vlo.foot;
      if (++guard > 80) throw NumericalError("critical_time: x outside reachable cone");
    }
    hi = lo + step;
    vhi = eval(hi, &foot);
  }
  // safeguarded Newton on d_t phi = 0
  t = 0.5 * (lo + hi);
  v = eval(t, &foot);
  for (int it = 0; it < 60 && v.dt != 0.0; ++it) {
    if (v.dt < 0.0) lo = t;
    else hi = t;
    double tn = v.dtt > 0.0 ? t - v.dt / v.dtt : 0.5 * (lo + hi);
    if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
    const double change = std::abs(tn - t);
    t = tn;
    v = eval(t, &v.foot);
    if (change < 1e-14 * (1.0 + std::abs(t))) break;
  }
  CriticalTime out;
  out.t_star = t;
  out.second_derivative = v.dtt;
  out.phase = v;
  const double g = family.g1_norm();
  out.leading_order = g * g * std::pow(rate, 3) * std::exp(-2.0 * rate * t);
  return out;
}

}  // namespace saddle

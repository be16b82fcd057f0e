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

#include "saddle/transition_operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "saddle/asymptotics.hpp"
#include "saddle/errors.hpp"
#include "saddle/special_functions.hpp"

namespace saddle {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

Vec with_first(double x1, const Vec& rest) {
  Vec x(rest.size() + 1);
  x[0] = x1;
  x.tail(rest.size()) = rest;
  return x;
}

Complex principal_sqrt(double v) { return std::sqrt(Complex(v, 0.0)); }

/// Tracked 1/sqrt(D e^{-(sum lambda - lambda_1) s}) along a Lambda_- ray carrying tangents.
struct JacobianTrack {
  RayResult ray;
  std::vector<Complex> q;  // one per ray sample
  std::vector<double> det; // D(s), unnormalised determinant with the scaled velocity
  Extrapolation limit;
  std::vector<std::string> log;
};

JacobianTrack track_jacobian(const TransitionScenario& sc, const Vec& y, const Mat& tangents,
                             double s_end) {
  const HamiltonianModel& m = sc.model;
  const int d = m.dim();
  const double l1 = m.lambda1();
  RayOptions opt;
  opt.tangents = tangents;
  opt.s_end = s_end;
  const double end = s_end > 0.0 ? s_end : std::min(32.0 / ladder_gap(m.lambdas()), 80.0 / l1);
  for (double s = 0.0; s < end; s += 0.25 / l1) opt.samples.push_back(s);
  JacobianTrack out;
  out.ray = manifold_ray(m, *sc.phi_minus, -1, y, opt);
  BranchTracker tracker;
  const double growth = m.lambda_sum() - l1;
  int sign0 = 0;
  for (const RaySample& r : out.ray.samples) {
    Mat J(d, d);
    J.col(0) = r.v_scaled;
    if (d > 1) J.rightCols(d - 1) = r.tangents.topRows(d);
    const double D = J.determinant();
    const int sg = D > 0.0 ? 1 : (D < 0.0 ? -1 : 0);
    if (sign0 == 0) sign0 = sg;
    if (sg != sign0) {
      std::ostringstream os;
      os << "Jacobian determinant passes through 0 at s = " << r.s << " (caustic)";
      throw NumericalError(os.str());
    }
    out.det.push_back(D);
    const Complex root = tracker.next(Complex(D * std::exp(-growth * r.s), 0.0));
    out.q.push_back(1.0 / root);
  }
  out.log = tracker.log();
  if (sign0 < 0) out.log.push_back("det < 0 along the ray: principal root i sqrt|det| carried");
  std::vector<double> ts;
  std::vector<CVec> vs;
  const std::size_t n = out.ray.samples.size();
  for (int k = 0; k < RayResult::kTail; ++k) {
    const std::size_t j = n - RayResult::kTail + k;
    ts.push_back(out.ray.samples[j].s);
    vs.push_back(CVec::Constant(1, out.q[j]));
  }
  out.limit = extrapolate_exponential(ts, vs, out.ray.rate);
  return out;
}

// Tangents to {x_1 = epsilon, xi' fixed, p0 = 0} at rho: (e_{x'_j}, d_{x'_j} f_- e_{xi_1}).
Mat fixed_momentum_tangents(const HamiltonianModel& m, const Vec& y, const Vec& xi) {
  const int d = m.dim();
  const Vec g = m.grad_p0(y, xi);
  Mat T = Mat::Zero(2 * d, d - 1);
  for (int j = 0; j < d - 1; ++j) {
    T(j + 1, j) = 1.0;
    T(d, j) = -g[j + 1] / g[d];
  }
  return T;
}

struct IncomingSide {
  Vec y, eta;
  double f_minus = 0.0, det_hess = 1.0, dxi1_p = 0.0;
  Vec g1;
  Complex jac{};
  double jac_error = 0.0;
  std::vector<std::string> log;
};

struct OutgoingSide {
  Vec g1;
  double action = 0.0, action_error = 0.0;
};

IncomingSide incoming_side(const TransitionScenario& sc, const Vec& y_prime) {
  const int d = sc.dim();
  if (y_prime.size() != d - 1) throw ValidationError("y' must have d-1 entries");
  IncomingSide in;
  in.y = with_first(sc.epsilon, y_prime);
  if (!sc.phi_minus->domain().contains(in.y)) throw ValidationError("(epsilon, y') outside the phi_- chart");
  Vec g;
  Mat H;
  sc.phi_minus->evaluate(in.y, nullptr, &g, &H);
  in.eta = g.tail(d - 1);
  in.f_minus = g[0];
  if (d > 1) in.det_hess = H.bottomRightCorner(d - 1, d - 1).determinant();
  in.dxi1_p = sc.model.dxi_p0(in.y, g)[0];
  const JacobianTrack jt = track_jacobian(sc, in.y, fixed_momentum_tangents(sc.model, in.y, g), 0.0);
  in.g1 = jt.ray.g1;
  in.jac = jt.limit.limit[0];
  in.jac_error = jt.limit.error;
  in.log = jt.log;
  if (in.jac_error > 1e-6 * std::abs(in.jac)) {
    std::ostringstream os;
    os << "Jacobian limit not converged: last change " << in.jac_error;
    throw NumericalError(os.str(), in.jac_error);
  }
  return in;
}

OutgoingSide outgoing_side(const TransitionScenario& sc, const Vec& x) {
  if (x.size() != sc.dim()) throw ValidationError("x has the wrong dimension");
  if (!sc.phi_plus->domain().contains(x)) throw ValidationError("x outside the phi_+ chart");
  if (x.norm() == 0.0) throw ValidationError("x = 0 lies on the bad set");
  RayOptions opt;
  opt.with_action = true;
  const RayResult ray = manifold_ray(sc.model, *sc.phi_plus, +1, x, opt);
  return {ray.g1, ray.action_limit, ray.action_error};
}

double margin_of(const Vec& g1m, const Vec& g1p, const Vec& x) {
  return std::abs(g1m.dot(g1p)) / (g1m.norm() * x.norm());
}

}  // namespace

// ---------------------------------------------------------------------------

Phi1Field::Phi1Field(const TransitionScenario& scenario) : sc_(&scenario) {}

double Phi1Field::value(const Vec& x) const {
  if (x.norm() == 0.0) return 0.0;
  const Vec gp = leading_coefficient(sc_->model, *sc_->phi_plus, +1, x);
  return -sc_->model.lambda1() * sc_->g1_minus.dot(gp);
}

Vec Phi1Field::gradient(const Vec& x, double step) const {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += step;
    b[i] -= step;
    g[i] = (value(a) - value(b)) / (2.0 * step);
  }
  return g;
}

double Phi1Field::transport_residual(const Vec& x, double step) const {
  const PhasePoint r{x, sc_->phi_plus->gradient(x)};
  const PhasePoint fwd = flow(sc_->model, r, step, 1e-13);
  const PhasePoint bwd = flow(sc_->model, r, -step, 1e-13);
  const double deriv = (value(fwd.x) - value(bwd.x)) / (2.0 * step);
  return deriv - sc_->model.lambda1() * value(x);
}

Phi1Field phi1_solve(const TransitionScenario& scenario) { return Phi1Field(scenario); }

// ---------------------------------------------------------------------------

B0Samples transport_b0(const TransitionScenario& scenario, const Vec& eta_prime, double t_max,
                       Complex z, double h, int samples_per_unit) {
  if (!(t_max > 0.0)) throw ValidationError("transport_b0: t_max must be positive");
  if (!(h > 0.0)) throw ValidationError("transport_b0: h must be positive");
  const HamiltonianModel& m = scenario.model;
  const int d = m.dim();
  const IntersectionPoint ip = intersection_point(scenario, eta_prime);
  const EikonalPsi psi(scenario, eta_prime, ip.x_of_eta.tail(d - 1));
  const Mat T = psi.start_tangents(ip.x_of_eta.tail(d - 1));

  RayOptions opt;
  opt.tangents = T;
  opt.s_end = t_max;
  const int n = std::max(2, static_cast<int>(std::ceil(samples_per_unit * t_max)));
  for (int k = 0; k <= n; ++k) opt.samples.push_back(t_max * k / n);
  const RayResult ray = manifold_ray(m, *scenario.phi_minus, -1, ip.x_of_eta, opt);

  B0Samples out;
  const double dxi1 = m.dxi_p0(ip.rho_eta.x, ip.rho_eta.xi)[0];
  out.sqrt_dxi1_p = principal_sqrt(dxi1);
  BranchTracker tracker;
  const double l1 = m.lambda1();
  for (const RaySample& r : ray.samples) {
    Mat J(d, d);
    J.col(0) = r.v_scaled;
    if (d > 1) J.rightCols(d - 1) = r.tangents.topRows(d);
    const double det = std::exp(-l1 * r.s) * J.determinant();
    if (!out.det.empty() && (det > 0.0) != (out.det.back().real() > 0.0))
      throw NumericalError("transport_b0: determinant passes through 0 (caustic)");
    const Complex root = tracker.next(Complex(det, 0.0));
    out.t.push_back(r.s);
    out.x.push_back(r.x);
    out.det.push_back(det);
    out.b0.push_back(out.sqrt_dxi1_p / root * std::exp(kI * r.s * z / h));
  }
  out.branch_log = tracker.log();
  return out;
}

A00Result a00_limit(const TransitionScenario& scenario, const Vec& eta_prime, double t_max) {
  const HamiltonianModel& m = scenario.model;
  const double l1 = m.lambda1();
  const double gap = ladder_gap(m.lambdas());
  A00Result out;
  out.t_max = t_max > 0.0 ? t_max : 10.0 / gap;
  const B0Samples b = transport_b0(scenario, eta_prime, out.t_max, 0.0, 1.0);
  // the extrapolation window: the last samples spaced by about 1/gap
  const double delta = std::min(1.0 / gap, out.t_max / 8.0);
  std::vector<double> ts;
  std::vector<CVec> vs;
  const double rate = m.lambda_sum() / 2.0 - l1;
  for (int k = 0; k < 6; ++k) {
    const double target = out.t_max - k * delta;
    std::size_t j = 0;
    for (std::size_t i = 0; i < b.t.size(); ++i)
      if (std::abs(b.t[i] - target) < std::abs(b.t[j] - target)) j = i;
    ts.push_back(b.t[j]);
    vs.push_back(CVec::Constant(1, b.b0[j] / b.sqrt_dxi1_p * std::exp(rate * b.t[j])));
  }
  const Extrapolation ex = extrapolate_exponential(ts, vs, gap);
  out.limit = ex.limit[0];
  out.error = ex.error;
  if (out.error > 1e-6 * std::max(1.0, std::abs(out.limit))) {
    std::ostringstream os;
    os << "a00_limit: not converged by t_max = " << out.t_max << "; trend:";
    for (std::size_t k = 0; k < ts.size(); ++k) os << " (" << ts[k] << ", " << vs[k][0] << ")";
    throw NumericalError(os.str(), out.error);
  }
  const IntersectionPoint ip = intersection_point(scenario, eta_prime);
  out.g1 = leading_coefficient(m, *scenario.phi_minus, -1, ip.x_of_eta, 1e-12);
  out.dxi1_p = m.dxi_p0(ip.rho_eta.x, ip.rho_eta.xi)[0];
  out.value = out.g1.norm() * std::pow(l1, 1.5) * std::exp(-kI * kPi / 4.0) * b.sqrt_dxi1_p *
              out.limit;
  return out;
}

C0Result c0_at(const TransitionScenario& scenario, const Vec& x, const Vec& eta_prime, Complex z,
               double h) {
  const HamiltonianModel& m = scenario.model;
  const double l1 = m.lambda1();
  if (!scenario.phi_plus->domain().contains(x)) throw ValidationError("c0_at: x outside the phi_+ chart");
  if (x.norm() == 0.0) throw ValidationError("c0_at: x = 0 lies on the bad set");
  C0Result out;
  out.a00 = a00_limit(scenario, eta_prime);
  out.g1_plus = leading_coefficient(m, *scenario.phi_plus, +1, x, 1e-12);
  const double margin = margin_of(out.a00.g1, out.g1_plus, x);
  if (margin <= scenario.badset_tol) {
    std::ostringstream os;
    os << "c0_at: x is within the bad-set tolerance (margin " << margin << ")";
    throw ValidationError(os.str());
  }
  check_gamma_pole(m.lambdas(), z, h);

  // action from the Liouville determinant of the reduced Lambda_+ flow
  RayOptions opt;
  opt.with_reduced_jacobian = true;
  const RayResult ray = manifold_ray(m, *scenario.phi_plus, +1, x, opt);
  std::vector<double> ts;
  std::vector<CVec> vs;
  for (int k = 0; k < RayResult::kTail; ++k) {
    const RaySample& r = ray.tail(k);
    const double logdet = r.log_det_reduced;
    const double I = 0.5 * (-logdet - r.trace_pxix) - 0.5 * m.lambda_sum() * r.s;
    ts.push_back(r.s);
    vs.push_back(CVec::Constant(1, I));
  }
  out.action = extrapolate_exponential(ts, vs, ray.rate).limit[0].real();

  const Complex S = 0.5 * m.lambda_sum() - kI * z / h;
  const Complex w = S / l1;
  out.gamma = complex_gamma(w);
  out.bracket = principal_pow(kI * l1 * out.a00.g1.dot(out.g1_plus), -w);
  out.value = std::exp(-out.action) * out.bracket * out.gamma * out.a00.value / l1;
  return out;
}

// ---------------------------------------------------------------------------

TransitionGeometry transition_geometry(const TransitionScenario& scenario, const Vec& x,
                                       const Vec& y_prime) {
  const IncomingSide in = incoming_side(scenario, y_prime);
  const OutgoingSide out = outgoing_side(scenario, x);
  TransitionGeometry g;
  g.x = x;
  g.y_prime = y_prime;
  g.y = in.y;
  g.eta_prime = in.eta;
  g.f_minus = in.f_minus;
  g.g1_minus = in.g1;
  g.g1_plus = out.g1;
  g.inner = in.g1.dot(out.g1);
  g.det_hess = in.det_hess;
  g.dxi1_p = in.dxi1_p;
  g.action = out.action;
  g.action_error = out.action_error;
  g.jac_limit = in.jac;
  g.jac_error = in.jac_error;
  g.badset_margin = margin_of(in.g1, out.g1, x);
  g.branch_log = in.log;
  if (in.dxi1_p < 0.0) g.branch_log.push_back("d_xi1 p0 < 0: principal root i sqrt|.|");
  return g;
}

void check_gamma_pole(const Vec& lambdas, Complex z, double h) {
  const double l1 = lambdas.minCoeff();
  const Complex w = (0.5 * lambdas.sum() - kI * z / h) / l1;
  const long n = std::lround(-w.real());
  for (long k : {n - 1, n, n + 1}) {
    if (k < 0) continue;
    const Complex zn = gamma_pole_point(lambdas, h, static_cast<int>(k));
    if (std::abs(z - zn) <= 1e-8 * h) {
      std::ostringstream os;
      os << "pole of Gamma(S/lambda_1) at the lattice point z = " << zn << " (n = " << k << ")";
      throw PoleError(os.str(), zn, static_cast<int>(k));
    }
  }
}

TransitionEvaluation assemble(const TransitionScenario& scenario, const TransitionGeometry& geo,
                              Complex z, double h) {
  if (!(h > 0.0)) throw ValidationError("assemble: h must be positive");
  const HamiltonianModel& m = scenario.model;
  const int d = m.dim();
  const double l1 = m.lambda1();
  if (geo.badset_margin <= scenario.badset_tol) {
    std::ostringstream os;
    os << "d0: x is within the bad-set tolerance (margin " << geo.badset_margin << ")";
    throw ValidationError(os.str());
  }
  check_gamma_pole(m.lambdas(), z, h);

  TransitionEvaluation ev;
  ev.z = z;
  ev.h = h;
  ev.S = 0.5 * m.lambda_sum() - kI * z / h;
  const Complex w = ev.S / l1;
  ev.F_gamma = std::sqrt(l1) * std::exp(-kI * (d * kPi / 4.0)) * complex_gamma(w);
  ev.F_bracket = principal_pow(kI * l1 * geo.inner, -w);
  ev.F_geom = geo.g1_minus.norm() * std::sqrt(std::abs(geo.det_hess)) * principal_sqrt(geo.dxi1_p);
  ev.F_action = std::exp(-geo.action);
  ev.F_jac = geo.jac_limit;
  ev.d0 = ev.factor_product();
  ev.badset_margin = geo.badset_margin;
  const ResonanceLattice lat =
      gamma0_lattice(m.lambdas(), h, std::abs(z) + 2.0 * m.lambda_sum() * h + l1 * h);
  ev.lattice_distance = distance_to_lattice(z, lat);
  ev.near_lattice = ev.lattice_distance <= scenario.nu * h;
  ev.branch_log = geo.branch_log;
  return ev;
}

TransitionEvaluation d0_closed_form(const TransitionScenario& scenario, const Vec& x,
                                    const Vec& y_prime, Complex z, double h) {
  check_gamma_pole(scenario.model.lambdas(), z, h);
  return assemble(scenario, transition_geometry(scenario, x, y_prime), z, h);
}

TransitionEvaluation d0_closed_form(const TransitionScenario& scenario, const Vec& x,
                                    const Vec& y_prime) {
  return d0_closed_form(scenario, x, y_prime, scenario.spectral.z, scenario.spectral.h);
}

Vec stationary_eta(const TransitionScenario& scenario, const Vec& y_prime) {
  const int d = scenario.dim();
  if (y_prime.size() != d - 1) throw ValidationError("stationary_eta: y' must have d-1 entries");
  Vec eta = scenario.eta_minus();
  if (d == 1) return eta;
  double res = 0.0;
  for (int it = 0; it < 50; ++it) {
    const IntersectionPoint ip = intersection_point(scenario, eta);
    const Vec r = y_prime - ip.x_of_eta.tail(d - 1);
    res = r.norm();
    if (res <= 1e-13 * (scenario.epsilon + y_prime.norm())) return eta;
    const Mat H = scenario.phi_minus->hessian(ip.x_of_eta).bottomRightCorner(d - 1, d - 1);
    eta += H * r;
  }
  throw NumericalError("stationary_eta: Newton on x'(eta') = y' did not converge", res);
}

Complex d0_via_transport(const TransitionScenario& scenario, const Vec& x, const Vec& y_prime,
                         Complex z, double h) {
  const int d = scenario.dim();
  const Vec eta = stationary_eta(scenario, y_prime);
  const C0Result c0 = c0_at(scenario, x, eta, z, h);
  double det = 1.0;
  if (d > 1)
    det = scenario.phi_minus->hessian(with_first(scenario.epsilon, y_prime))
              .bottomRightCorner(d - 1, d - 1)
              .determinant();
  return std::exp(-kI * ((d - 1) * kPi / 4.0)) * std::sqrt(std::abs(det)) * c0.value;
}

// ---------------------------------------------------------------------------

CauchyData CauchyData::point(Complex value) {
  CauchyData c;
  c.values = CVec::Constant(1, value);
  return c;
}

Vec CauchyData::node(std::size_t k) const {
  Vec y(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    y[i] = axes[i][k % axes[i].size()];
    k /= axes[i].size();
  }
  return y;
}

double CauchyData::weight(std::size_t k) const {
  double w = 1.0;
  for (const auto& ax : axes) {
    const std::size_t n = ax.size();
    const std::size_t j = k % n;
    k /= n;
    const double dx = n > 1 ? (ax.back() - ax.front()) / (n - 1) : 1.0;
    w *= (j == 0 || j + 1 == n) && n > 1 ? 0.5 * dx : dx;
  }
  return w;
}

CVec apply_J(const TransitionScenario& scenario, const CauchyData& u0,
             const std::vector<Vec>& x_targets, Complex z, double h) {
  const HamiltonianModel& m = scenario.model;
  const int d = m.dim();
  if (!(h > 0.0)) throw ValidationError("apply_J: h must be positive");
  if (static_cast<int>(u0.axes.size()) != d - 1) throw ValidationError("apply_J: u0 needs d-1 axes");
  std::size_t expected = 1;
  for (const auto& ax : u0.axes) {
    if (ax.size() < 2) throw ValidationError("apply_J: every axis needs at least two nodes");
    const double dx = (ax.back() - ax.front()) / (ax.size() - 1);
    for (std::size_t j = 1; j < ax.size(); ++j)
      if (std::abs(ax[j] - ax[j - 1] - dx) > 1e-9 * std::abs(dx))
        throw ValidationError("apply_J: axes must be uniform");
    expected *= ax.size();
  }
  if (u0.size() != expected) throw ValidationError("apply_J: u0 values do not match the axes");

  CVec out = CVec::Zero(static_cast<Eigen::Index>(x_targets.size()));
  if (u0.values.cwiseAbs().maxCoeff() == 0.0) return out;
  check_gamma_pole(m.lambdas(), z, h);

  // nonstationary-phase resolution of the y' quadrature
  for (std::size_t k = 0; k < u0.size(); ++k) {
    if (u0.values[k] == Complex(0.0)) continue;
    const Vec y = with_first(scenario.epsilon, u0.node(k));
    const Vec g = scenario.phi_minus->gradient(y);
    for (int i = 0; i < d - 1; ++i) {
      const auto& ax = u0.axes[i];
      const double dx = (ax.back() - ax.front()) / (ax.size() - 1);
      if (std::abs(g[i + 1]) * dx / h > kPi / 4.0)
        throw ValidationError("apply_J: u0 grid under-resolves the phase (more than pi/4 per cell)");
    }
  }

  const double l1 = m.lambda1();
  const Complex S = 0.5 * m.lambda_sum() - kI * z / h;
  const Complex pref = std::exp(S / l1 * std::log(h)) * std::pow(2.0 * kPi * h, -0.5 * d);
  std::vector<IncomingSide> ins;
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < u0.size(); ++k) {
    if (u0.values[k] == Complex(0.0)) continue;
    ins.push_back(incoming_side(scenario, u0.node(k)));
    idx.push_back(k);
  }
  for (std::size_t j = 0; j < x_targets.size(); ++j) {
    const Vec& x = x_targets[j];
    const OutgoingSide os = outgoing_side(scenario, x);
    const double phip = scenario.phi_plus->value(x);
    Complex sum = 0.0;
    for (std::size_t q = 0; q < ins.size(); ++q) {
      const IncomingSide& in = ins[q];
      TransitionGeometry g;
      g.x = x;
      g.y = in.y;
      g.g1_minus = in.g1;
      g.g1_plus = os.g1;
      g.inner = in.g1.dot(os.g1);
      g.det_hess = in.det_hess;
      g.dxi1_p = in.dxi1_p;
      g.action = os.action;
      g.jac_limit = in.jac;
      g.badset_margin = margin_of(in.g1, os.g1, x);
      const Complex d0 = assemble(scenario, g, z, h).d0;
      const double phase = (phip - scenario.phi_minus->value(in.y)) / h;
      sum += d0 * std::exp(kI * phase) * u0.values[idx[q]] * u0.weight(idx[q]);
    }
    out[static_cast<Eigen::Index>(j)] = pref * sum;
  }
  return out;
}

}  // namespace saddle

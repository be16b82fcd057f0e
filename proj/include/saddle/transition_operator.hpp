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

#pragma once

#include <complex>
#include <string>
#include <vector>

#include "saddle/linalg.hpp"
#include "saddle/phase_builder.hpp"

namespace saddle {

/// phi_1, the solution of (grad_xi p0(x, grad phi_+) . grad - lambda_1) phi_1 = 0 with
/// grad phi_1(0) = -lambda_1 g_1^-(rho_-). Along the backward Lambda_+ ray it equals
/// -lambda_1 <g_1^- | g_1^+(x)>.
class Phi1Field {
 public:
  explicit Phi1Field(const TransitionScenario& scenario);
  double value(const Vec& x) const;
  /// Central differences of value().
  Vec gradient(const Vec& x, double step = 1e-6) const;
  /// (grad_xi p0 . grad - lambda_1) phi_1 at x, by differentiating along the Lambda_+ flow.
  double transport_residual(const Vec& x, double step = 1e-3) const;
  const Box& domain() const { return sc_->phi_plus->domain(); }

 private:
  const TransitionScenario* sc_;
};

Phi1Field phi1_solve(const TransitionScenario& scenario);

// ---------------------------------------------------------------------------

struct B0Samples {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Complex> det;  // det dx/d(t, x')
  std::vector<Complex> b0;
  Complex sqrt_dxi1_p{};     // principal root of d_{xi_1} p0 at the start
  std::vector<std::string> branch_log;
};

/// b_0 = sqrt(d_{xi_1} p0) / sqrt(det dx(t, x', eta')/d(t, x')) e^{itz/h} along the characteristic
/// of psi_eta' through rho_eta'.
B0Samples transport_b0(const TransitionScenario& scenario, const Vec& eta_prime, double t_max,
                       Complex z, double h, int samples_per_unit = 4);

struct A00Result {
  Complex value{};
  Complex limit{};     // lim e^{(sum lambda/2 - lambda_1)t} / sqrt(det)
  double error = 0.0;  // change between the last two extrapolation orders
  Vec g1;              // g_1^-(rho_eta') from the expandible fit
  double dxi1_p = 0.0;
  double t_max = 0.0;
};

/// a_{0,0}(0, eta') with the Jacobian limit extrapolated over t-windows ending at t_max.
A00Result a00_limit(const TransitionScenario& scenario, const Vec& eta_prime, double t_max = 0.0);

struct C0Result {
  Complex value{};
  Complex bracket{};
  Complex gamma{};
  double action = 0.0;  // the integral I with F_action = e^{-I}
  Vec g1_plus;
  A00Result a00;
};

/// c_0(x, eta') for the spectral parameter (z, h).
C0Result c0_at(const TransitionScenario& scenario, const Vec& x, const Vec& eta_prime, Complex z,
               double h);

// ---------------------------------------------------------------------------

/// z-independent part of the closed form at (x, y').
struct TransitionGeometry {
  Vec x;
  Vec y_prime;
  Vec y;               // (epsilon, y')
  Vec eta_prime;       // grad_{y'} phi_-(epsilon, y')
  double f_minus = 0.0;
  Vec g1_minus;        // at (y, grad phi_-(y))
  Vec g1_plus;         // at (x, grad phi_+(x))
  double inner = 0.0;  // <g_1^- | g_1^+>
  double det_hess = 1.0;   // det Hess_{y'y'} phi_-(epsilon, y')
  double dxi1_p = 0.0;
  double action = 0.0;
  double action_error = 0.0;
  Complex jac_limit{};
  double jac_error = 0.0;
  double badset_margin = 0.0;
  std::vector<std::string> branch_log;
};

TransitionGeometry transition_geometry(const TransitionScenario& scenario, const Vec& x,
                                       const Vec& y_prime);

struct TransitionEvaluation {
  Complex z{};
  double h = 0.0;
  Complex S{};
  Complex d0{};
  Complex F_gamma{};
  Complex F_bracket{};
  Complex F_geom{};
  Complex F_action{};
  Complex F_jac{};
  double badset_margin = 0.0;
  double lattice_distance = 0.0;  // d(z, Gamma_0(h))
  bool near_lattice = false;      // lattice_distance <= nu h
  std::vector<std::string> branch_log;

  Complex factor_product() const { return F_gamma * F_bracket * F_geom * F_action * F_jac; }
};

/// Throws PoleError when |z - z_n| <= 1e-8 h for z_n = -ih(n lambda_1 + sum(lambda)/2).
void check_gamma_pole(const Vec& lambdas, Complex z, double h);

TransitionEvaluation assemble(const TransitionScenario& scenario, const TransitionGeometry& geo,
                              Complex z, double h);

TransitionEvaluation d0_closed_form(const TransitionScenario& scenario, const Vec& x,
                                    const Vec& y_prime, Complex z, double h);

/// Same at the scenario's spectral parameter.
TransitionEvaluation d0_closed_form(const TransitionScenario& scenario, const Vec& x,
                                    const Vec& y_prime);

/// eta'(y') from Newton iteration on x'(eta') = y'.
Vec stationary_eta(const TransitionScenario& scenario, const Vec& y_prime);

/// Independent pipeline through intersection_point, transport_b0, a00_limit and c0_at.
Complex d0_via_transport(const TransitionScenario& scenario, const Vec& x, const Vec& y_prime,
                         Complex z, double h);

// ---------------------------------------------------------------------------

/// Cauchy data u_0(epsilon, y') on a uniform tensor grid of y' (no axes when d = 1).
struct CauchyData {
  std::vector<std::vector<double>> axes;
  CVec values;  // first axis fastest

  static CauchyData point(Complex value);
  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  Vec node(std::size_t k) const;
  double weight(std::size_t k) const;  // trapezoid weight
};

/// J(z) u_0 at the targets with the principal symbol d_0.
CVec apply_J(const TransitionScenario& scenario, const CauchyData& u0,
             const std::vector<Vec>& x_targets, Complex z, double h);

}  // namespace saddle

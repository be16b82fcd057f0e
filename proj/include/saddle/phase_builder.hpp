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

#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "saddle/asymptotics.hpp"
#include "saddle/core_model.hpp"
#include "saddle/flow_geometry.hpp"
#include "saddle/linalg.hpp"

namespace saddle {

struct ScenarioOptions {
  double epsilon = 0.1;
  Vec x_minus_prime;           // transverse coordinates of rho_- on H_- (empty: 0)
  double eta_box_halfwidth = 0.0;  // 0: epsilon / 2
  Box chart_domain;            // empty: the validity box
  ChartOptions chart;
  double nu = 0.1;             // pole guard, in units of h
  double badset_tol = 0.05;
};

/// Incoming data on H_- = {x_1 = epsilon} together with the manifolds and the spectral box.
struct TransitionScenario {
  HamiltonianModel model;
  Linearization lin;
  double epsilon = 0.1;
  PhasePoint rho_minus;
  Box eta_prime_box;
  SpectralParams spectral;
  ChartPtr phi_plus;
  ChartPtr phi_minus;
  Vec g1_minus;  // leading coefficient of the Lambda_- ray through rho_-
  double nu = 0.1;
  double badset_tol = 0.05;

  int dim() const { return model.dim(); }
  /// xi'_- of rho_-.
  Vec eta_minus() const { return rho_minus.xi.tail(model.dim() - 1); }
};

TransitionScenario make_scenario(const HamiltonianModel& model, const SpectralParams& spectral,
                                 const ScenarioOptions& options = {});

// ---------------------------------------------------------------------------

/// Solution psi_eta' of p0(x, grad psi) = 0 with psi = x'.eta' on H_- and
/// d_1 psi = f_-(x, eta') there, evaluated pointwise by the method of characteristics.
class EikonalPsi {
 public:
  struct Point {
    double value = 0.0;
    Vec gradient;
    Mat hessian;
    double t = 0.0;   // time from H_-
    Vec x_prime;      // foot point on H_-
  };

  EikonalPsi(const TransitionScenario& scenario, Vec eta_prime, Vec foot_guess,
             double tol = 1e-12);

  /// Newton from the guess when given, else continuation from the foot point.
  Point evaluate(const Vec& x, const Point* guess = nullptr) const;
  /// (epsilon, x', f_-(epsilon, x', eta'), eta').
  PhasePoint start(const Vec& x_prime) const;
  /// Tangents d/dx'_j of start(x'), 2d x (d-1).
  Mat start_tangents(const Vec& x_prime) const;
  const Vec& eta_prime() const { return eta_; }

 private:
  const TransitionScenario* sc_;
  Vec eta_;
  Vec foot_;
  double tol_;
};

/// Chart view of EikonalPsi; reuses the last solution as the Newton start.
class PsiChart : public LagrangianChart {
 public:
  PsiChart(Box domain, std::shared_ptr<const EikonalPsi> psi);
  void evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const override;
  EikonalPsi::Point point(const Vec& x) const;
  const EikonalPsi& psi() const { return *psi_; }

 private:
  std::shared_ptr<const EikonalPsi> psi_;
  mutable std::mutex mutex_;
  mutable std::optional<EikonalPsi::Point> last_;
  mutable Vec last_x_;
};

/// psi_eta' as a chart on a box around the foot point (exact, by characteristics).
ChartPtr eikonal_psi(const TransitionScenario& scenario, const Vec& eta_prime,
                     const Box& domain = {});

/// Default psi-chart box: x_1 in [eps/2, 3eps/2], x' within eps/2 of the foot point.
Box default_psi_domain(const TransitionScenario& scenario, const Vec& foot_prime);

struct IntersectionPoint {
  Vec x_of_eta;        // (epsilon, x'(eta'))
  PhasePoint rho_eta;  // (x, f_-, eta')
  double residual = 0.0;
  double consistency = 0.0;  // |d_1 phi_- - f_-|
  int iterations = 0;
};

/// Solves grad_{x'} phi_-(epsilon, x') = eta' by Newton iteration from x'_-.
IntersectionPoint intersection_point(const TransitionScenario& scenario, const Vec& eta_prime);

/// psi~(eta') = x'(eta').eta' - phi_-(x(eta')).
double psi_tilde(const TransitionScenario& scenario, const Vec& eta_prime);

/// phi_0 = psi + kappa (psi - psi_0)^2: equals psi with the same gradient on the
/// level set {psi = psi_0}, and kappa removes the (1,1) Hessian entry at x(eta').
class Lambda0Chart : public LagrangianChart {
 public:
  Lambda0Chart(ChartPtr psi, double psi0, double kappa);
  void evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const override;
  double kappa() const { return kappa_; }
  double psi0() const { return psi0_; }
  const ChartPtr& psi() const { return psi_; }

 private:
  ChartPtr psi_;
  double psi0_;
  double kappa_;
};

struct Lambda0 {
  std::shared_ptr<const Lambda0Chart> chart;
  IntersectionPoint intersection;
  Mat tangent_frame;        // 2d x d, columns (e_i, Hess phi_0 e_i)
  double flatness = 0.0;    // |Hess phi_0(x(eta'))|: size of delta xi / delta x on T Lambda_0
  double hp_angle = 0.0;    // angle between H_p(rho_eta) and T Lambda_0, radians
  double gamma0_defect = 0.0;  // max |phi_0 - psi_0| on sampled points of the level set
};

Lambda0 build_lambda0(const TransitionScenario& scenario, const Vec& eta_prime);

// ---------------------------------------------------------------------------

struct PhaseValue {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
  double dt = 0.0;   // -p0 at the foot point on Lambda_0
  double dtt = 0.0;
  Vec foot;          // x_0 on Lambda_0
};

struct PhaseFamilyOptions {
  double t_min = 0.0;   // 0: automatic
  int t_samples = 32;
  double box_radius = 0.0;  // 0: epsilon / 4
  int points_per_dim = 3;
  int poly_degree = 1;
  double tol = 1e-12;
};

/// phi(t, x, eta') on Lambda_t = exp(t H_p)(Lambda_0), evaluated by shooting from Lambda_0.
class PhaseFamily {
 public:
  PhaseFamily(const TransitionScenario& scenario, Vec eta_prime, Lambda0 lambda0, double tol);

  const Vec& eta_prime() const { return eta_; }
  const Lambda0& lambda0() const { return l0_; }
  double psi_tilde() const { return psi_tilde_; }
  const TransitionScenario& scenario() const { return *sc_; }
  /// |g_1^-(rho_eta)|
  double g1_norm() const { return g1_norm_; }

  /// Value and derivatives at (t, x); the foot point guess speeds up continuation.
  PhaseValue evaluate(double t, const Vec& x, const Vec* foot_guess = nullptr) const;

  // Filled by evolve_phase.
  std::vector<double> t_grid;
  std::vector<Vec> x_grid;
  Mat values;             // t_grid x x_grid
  Mat dt_values;
  ExpandiblePolySeries expansion;  // of phi(t, x) - psi~ over the x grid
  Vec limit;              // constant term of the expansion per x
  double eikonal_residual = 0.0;
  double t_max = 0.0;

 private:
  const TransitionScenario* sc_;
  Vec eta_;
  Lambda0 l0_;
  double psi_tilde_;
  double g1_norm_;
  double tol_;
};

PhaseFamily evolve_phase(const TransitionScenario& scenario, const Vec& eta_prime, double t_max,
                         const PhaseFamilyOptions& options = {});

struct CriticalTime {
  double t_star = 0.0;
  double second_derivative = 0.0;
  double leading_order = 0.0;  // |g_1|^2 lambda_1^3 e^{-2 lambda_1 t*}
  PhaseValue phase;
};

CriticalTime critical_time(const PhaseFamily& family, const Vec& x);

}  // namespace saddle

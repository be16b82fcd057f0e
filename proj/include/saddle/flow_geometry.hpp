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

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "saddle/core_model.hpp"
#include "saddle/linalg.hpp"
#include "saddle/ode.hpp"
#include "saddle/polynomial.hpp"

namespace saddle {

// ---------------------------------------------------------------------------
// Hamiltonian flow

struct TrajectorySample {
  std::vector<double> times;
  std::vector<PhasePoint> points;
  std::vector<Mat> jacobians;  // empty unless requested
  std::vector<double> energies;

  double energy_drift() const;
  double max_symplectic_defect() const;
};

/// exp(t H_p)(point). Local error per step <= tol, energy drift <= 100 tol.
PhasePoint flow(const HamiltonianModel& model, const PhasePoint& point, double t,
                double tol = 1e-10);

/// Flow and the solution of the variational equation (2d x 2d).
std::pair<PhasePoint, Mat> flow_with_jacobian(const HamiltonianModel& model,
                                              const PhasePoint& point, double t,
                                              double tol = 1e-10);

/// Samples of the trajectory at the given (monotone) times.
TrajectorySample trajectory(const HamiltonianModel& model, const PhasePoint& point,
                            const std::vector<double>& times, double tol = 1e-10,
                            bool with_jacobian = false);

/// Flow carrying tangent vectors and the action integral of xi . dx.
struct CarriedFlow {
  PhasePoint end;
  Mat tangents;  // 2d x k
  double action = 0.0;
};

CarriedFlow flow_carrying(const HamiltonianModel& model, const PhasePoint& start, double t,
                          const Mat& tangents, const OdeOptions& options, bool monitor = true);

// ---------------------------------------------------------------------------
// Lagrangian charts

enum class ChartKind { phi_plus, phi_minus, psi_eta, lambda0, phase_family_slice };

std::string to_string(ChartKind kind);

/// A generating function phi on a box of x-space: Lambda = {xi = grad phi(x)}.
class LagrangianChart {
 public:
  LagrangianChart(ChartKind kind, Box domain) : kind_(kind), domain_(std::move(domain)) {}
  virtual ~LagrangianChart() = default;

  ChartKind kind() const { return kind_; }
  const Box& domain() const { return domain_; }
  int dim() const { return static_cast<int>(domain_.dim()); }
  const std::optional<PhasePoint>& base_point() const { return base_point_; }
  void set_base_point(PhasePoint p) { base_point_ = std::move(p); }
  double fit_residual() const { return fit_residual_; }
  void set_fit_residual(double r) { fit_residual_ = r; }

  virtual void evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const = 0;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

 private:
  ChartKind kind_;
  Box domain_;
  std::optional<PhasePoint> base_point_;
  double fit_residual_ = 0.0;
};

using ChartPtr = std::shared_ptr<const LagrangianChart>;

/// phi(x) = c + g . x + 1/2 x^T B x.
class QuadraticChart : public LagrangianChart {
 public:
  QuadraticChart(ChartKind kind, Box domain, Mat B, Vec g = {}, double c = 0.0);
  void evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const override;
  const Mat& B() const { return B_; }

 private:
  Mat B_;
  Vec g_;
  double c_;
};

/// phi(x) = 1/2 x^T B x + r(x / w), r a polynomial with no terms below degree 3.
class PolynomialChart : public LagrangianChart {
 public:
  PolynomialChart(ChartKind kind, Box domain, Mat B, Polynomial remainder);
  void evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const override;
  const Mat& B() const { return B_; }
  const Polynomial& remainder() const { return remainder_; }
  const Vec& scale() const { return w_; }

 private:
  Mat B_;
  Polynomial remainder_;
  Vec w_;
};

/// phi(x) = q((x - c) / w) with a dense polynomial q on a box centred at c.
class FittedChart : public LagrangianChart {
 public:
  FittedChart(ChartKind kind, Box domain, Polynomial q);
  void evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const override;
  const Polynomial& polynomial() const { return q_; }

 private:
  Polynomial q_;
  Vec c_;
  Vec w_;
};

/// Values and gradients of a generating function sampled at one point.
struct ChartSample {
  double value = 0.0;
  Vec gradient;
};

using ChartSampler = std::function<ChartSample(const Vec& x)>;

/// Hermite least-squares fit (values and gradients at tensor Chebyshev nodes)
/// in the total-degree Chebyshev basis, returned in monomials of u = (x - c) / w.
Polynomial hermite_fit(const Box& box, const ChartSampler& sampler, int degree, int nodes_per_dim,
                       double* max_residual = nullptr);

/// Fitted chart of an arbitrary sampled generating function.
ChartPtr fit_chart(ChartKind kind, const Box& box, const ChartSampler& sampler, int degree = 10,
                   int nodes_per_dim = 0);

struct ChartOptions {
  double tol = 1e-8;           // invariance residual required
  int degree = 12;             // total degree of the fit
  int nodes_per_dim = 0;       // 0: degree + 4
  double seed_fraction = 1e-4; // seeding radius relative to the domain radius
  double flow_tol = 1e-13;
};

/// Generating function of Lambda_+ (sign = +1) or Lambda_- (sign = -1) on the domain.
ChartPtr manifold_generating_function(const HamiltonianModel& model, int sign, const Box& domain,
                                      const ChartOptions& options = {});

/// Point of Lambda_sign above x, by forward (backward) shooting from the tangent space.
struct ManifoldPoint {
  double value = 0.0;
  Vec gradient;
  int newton_iterations = 0;
};

ManifoldPoint shoot_manifold_point(const HamiltonianModel& model, const Linearization& lin,
                                   int sign, const Vec& x, double seed_radius, double flow_tol);

/// sup over a uniform test grid of |p0(x, grad phi(x))|.
double invariance_residual(const HamiltonianModel& model, const LagrangianChart& chart,
                           int points_per_dim = 21);

// ---------------------------------------------------------------------------
// Rays on the invariant manifolds
//
// A ray is the reduced trajectory x(t) on Lambda_- (t = s >= 0) or on Lambda_+
// (t = -s <= 0), which tends to 0 like g_1 e^{-lambda_1 s}. It is integrated in
// the rescaled variable y = e^{lambda_1 s} x.

struct RayOptions {
  double tol = 1e-12;
  double s_end = 0.0;               // 0: chosen from the ladder gap
  std::vector<double> samples;      // additional sample parameters s
  bool with_action = false;         // integral of 1/2 tr(p_xixi Hess phi) - sum(lambda)/2
  Mat tangents;                     // 2d x k phase-space tangents carried by the linearized flow
  bool with_reduced_jacobian = false;  // d x d Jacobian of the reduced flow
};

struct RaySample {
  double s = 0.0;
  Vec y;         // e^{lambda_1 s} x
  Vec x;
  Vec v_scaled;  // e^{lambda_1 s} dx/dt
  Mat tangents;  // carried phase-space tangents
  Mat reduced_jacobian;
  double log_det_reduced = 0.0;  // log |det reduced_jacobian|, integrated without under/overflow
  double action = 0.0;
  double trace_pxix = 0.0;  // integral of tr(p_xix) ds, for the Liouville form of the action
};

struct RayResult {
  std::vector<RaySample> samples;  // sorted by s
  Vec g1;                          // Richardson limit of P_1 y
  double g1_error = 0.0;
  double rate = 0.0;               // gap mu_2 - mu_1
  double s_end = 0.0;
  double delta = 0.0;              // spacing of the extrapolation samples
  double action_limit = 0.0;
  double action_error = 0.0;

  static constexpr int kTail = 5;
  /// Samples used for extrapolation, k = 0 .. kTail-1 ending at s_end.
  const RaySample& tail(int k) const { return samples[samples.size() - kTail + k]; }
};

/// The gap mu_2 - mu_1 of the exponent ladder.
double ladder_gap(const Vec& lambdas);

/// Spectral projector of A onto the eigenspace of the eigenvalue of modulus lambda_1.
Mat leading_projector(const Mat& A, double lambda1);

RayResult manifold_ray(const HamiltonianModel& model, const LagrangianChart& chart, int sign,
                       const Vec& x0, const RayOptions& options = {});

/// g_1^{sign}(x) = lim e^{lambda_1 |t|} P_1 x(t) along the ray through x.
Vec leading_coefficient(const HamiltonianModel& model, const LagrangianChart& chart, int sign,
                        const Vec& x, double tol = 1e-12);

/// g_1 from an expandible fit of ray samples x(s), s in [s0, s0 + span] (independent
/// of the Richardson limit in manifold_ray).
struct FittedLeading {
  Vec g1;
  double mu1 = 0.0;
  double residual_rms = 0.0;
  std::vector<double> s;
  std::vector<Vec> x;
};

FittedLeading fitted_leading_coefficient(const HamiltonianModel& model, const LagrangianChart& chart,
                                         int sign, const Vec& x, double s0 = 0.0,
                                         double span = 0.0, int samples = 48);

}  // namespace saddle

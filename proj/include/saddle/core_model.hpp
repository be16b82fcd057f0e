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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "saddle/linalg.hpp"
#include "saddle/polynomial.hpp"

namespace saddle {

enum class ModelKind { exact_quadratic, schrodinger_barrier, custom };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// User supplied evaluators for a custom symbol. Derivatives are mandatory.
struct SymbolEvaluators {
  std::function<double(const Vec& x, const Vec& xi)> p0;
  /// Stacked (d_x p, d_xi p).
  std::function<Vec(const Vec& x, const Vec& xi)> grad;
  /// Blocks [[p_xx, p_xxi], [p_xix, p_xixi]].
  std::function<Mat(const Vec& x, const Vec& xi)> hess;
};

/// A symbol p0 with a hyperbolic fixed point at the origin.
///
/// Built-in kinds are of the form sum_j a_j xi_j^2 + V(x) with a polynomial
/// potential V, so every derivative is available in closed form.
class HamiltonianModel {
 public:
  int dim() const { return dim_; }
  const Vec& lambdas() const { return lambdas_; }
  double lambda1() const { return lambdas_[0]; }
  double lambda_sum() const { return lambdas_.sum(); }
  ModelKind kind() const { return kind_; }
  double perturbation_scale() const { return perturbation_scale_; }

  double p0(const Vec& x, const Vec& xi) const;
  double p0(const PhasePoint& r) const { return p0(r.x, r.xi); }
  /// Stacked (d_x p0, d_xi p0).
  Vec grad_p0(const Vec& x, const Vec& xi) const;
  Vec grad_p0(const PhasePoint& r) const { return grad_p0(r.x, r.xi); }
  Mat hess_p0(const Vec& x, const Vec& xi) const;
  Mat hess_p0(const PhasePoint& r) const { return hess_p0(r.x, r.xi); }
  Vec dxi_p0(const Vec& x, const Vec& xi) const;
  Vec dx_p0(const Vec& x, const Vec& xi) const;

  /// Optional subprincipal symbol, restricted to functions of x.
  const std::optional<Polynomial>& p1() const { return p1_; }
  void set_p1(Polynomial p1);

  /// True when p0 = sum a_j xi_j^2 + V(x).
  bool separable() const { return kind_ != ModelKind::custom; }
  const Vec& kinetic() const { return kinetic_; }
  /// Full potential including the quadratic part (separable models only).
  const Polynomial& potential() const { return potential_; }
  /// Terms of degree >= 3 (separable models only).
  const Polynomial& perturbation() const { return perturbation_; }

  /// Half-width of the box |x_i| <= r on which the model is trusted.
  double validity_radius() const { return radius_; }
  Box validity_box() const { return Box::symmetric(dim_, radius_); }
  bool in_validity(const Vec& x, double slack = 1e-9) const;

  friend HamiltonianModel make_quadratic_model(const std::vector<double>& lambdas);
  friend HamiltonianModel make_barrier_model(const std::vector<double>& lambdas,
                                             const std::vector<Monomial>& perturbation);
  friend HamiltonianModel make_custom_model(const std::vector<double>& lambdas,
                                            SymbolEvaluators evaluators, double radius);

 private:
  int dim_ = 0;
  Vec lambdas_;
  ModelKind kind_ = ModelKind::custom;
  double perturbation_scale_ = 0.0;
  double radius_ = 1.0;
  Vec kinetic_;
  Polynomial potential_;
  Polynomial perturbation_;
  std::optional<Polynomial> p1_;
  std::shared_ptr<const SymbolEvaluators> custom_;
};

/// p0 = sum lambda_j/2 (xi_j^2 - x_j^2).
HamiltonianModel make_quadratic_model(const std::vector<double>& lambdas);

/// p0 = xi^2 - 1/4 sum lambda_j^2 x_j^2 + W(x), W vanishing to order 3 at 0.
HamiltonianModel make_barrier_model(const std::vector<double>& lambdas,
                                    const std::vector<Monomial>& perturbation = {});

/// Arbitrary symbol; the caller asserts the exponents and the trusted radius.
HamiltonianModel make_custom_model(const std::vector<double>& lambdas, SymbolEvaluators evaluators,
                                   double radius);

struct Linearization {
  Mat F;                 // 2d x 2d
  Vec eigenvalues;       // ascending: -lambda_d .. -lambda_1, lambda_1 .. lambda_d
  Mat stable_frame;      // 2d x d, spans the tangent of Lambda_-
  Mat unstable_frame;    // 2d x d, spans the tangent of Lambda_+
  Mat B_plus;            // Hessian of phi_+ at 0
  Mat B_minus;           // Hessian of phi_- at 0
  Mat A_plus;            // x-dynamics on Lambda_+ at 0 (eigenvalues +lambda)
  Mat A_minus;           // x-dynamics on Lambda_- at 0 (eigenvalues -lambda)
  Vec residuals;         // |F v - mu v| per eigenpair
};

Linearization linearize(const HamiltonianModel& model);

struct BranchRoots {
  std::complex<double> f_minus;
  std::complex<double> f_plus;
  bool real = true;
  double residual = 0.0;
};

/// Roots xi_1 = f_-(x, xi'), f_+(x, xi') of p0(x, xi_1, xi') = 0.
BranchRoots branch_roots(const HamiltonianModel& model, const Vec& x, const Vec& xi_prime);

struct SpectralParams {
  double h = 0.1;
  std::complex<double> z{};
  double C0 = 1.0;
  double C1 = 1.0;
  double nu = 0.1;
  std::complex<double> S{};
  int K1 = 0;
};

SpectralParams spectral_params(std::complex<double> z, double h, double C0, double C1, double nu,
                               const Vec& lambdas);

struct ResonanceLattice {
  std::vector<std::complex<double>> points;
  std::vector<std::vector<int>> multi_indices;
  double h = 0.0;
  Vec lambdas;
  double bound = 0.0;
};

ResonanceLattice gamma0_lattice(const Vec& lambdas, double h, double modulus_bound);

double distance_to_lattice(std::complex<double> z, const ResonanceLattice& lattice);

/// The sublattice z_n = -i h (n lambda_1 + sum(lambda)/2) carrying the Gamma poles.
std::complex<double> gamma_pole_point(const Vec& lambdas, double h, int n);

}  // namespace saddle

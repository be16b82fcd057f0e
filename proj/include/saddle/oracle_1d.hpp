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

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "saddle/linalg.hpp"
#include "saddle/transition_operator.hpp"

namespace saddle {

// One-dimensional barrier -h^2 u'' - lambda^2 x^2/4 u = z u, solved on the real line.
// Far from 0 the solutions are combinations of
//   W_in(x)  = e^{-i kappa (x^2 - eps^2)} (|x|/eps)^{beta_-} (1 + ...)   (on Lambda_-)
//   W_out(x) = e^{ i kappa (x^2 + eps^2)} (|x|/eps)^{beta_+} (1 + ...)   (on Lambda_+)
// with kappa = lambda/(4h), beta_+- = -1/2 +- i z/(lambda h). The phases are those of
// e^{i(phi_-(x) - phi_-(eps))/h} and e^{i(phi_+(x) - phi_-(eps))/h}, so that unit Cauchy
// data at x = eps for the operator J corresponds to a unit incoming coefficient.

struct WkbBranch {
  double lambda = 1.0;
  Complex z{};
  double h = 0.1;
  double epsilon = 0.1;
  int direction = +1;  // +1: outgoing, -1: incoming

  Complex beta() const;
  /// Value and x-derivative at x != 0 from the asymptotic series, with the size of the first
  /// omitted term (relative) in *truncation.
  std::array<Complex, 2> evaluate(double x, double* truncation = nullptr) const;
  /// The leading term alone, e^{i kappa (...)} (|x|/eps)^beta.
  Complex leading(double x) const;
};

struct ConnectionResult {
  Complex incoming_amplitude{};                 // coefficient of W_in for x > 0
  std::array<Complex, 2> outgoing_amplitudes{};  // coefficients of W_out for x > 0 and x < 0
  double X0 = 0.0;
  double estimated_error = 0.0;
  double matching_residual = 0.0;
  std::vector<double> eval_x;
  std::vector<Complex> eval_u;  // solution normalised to unit incoming amplitude

  Complex transmission() const { return outgoing_amplitudes[1] / incoming_amplitude; }
  Complex reflection() const { return outgoing_amplitudes[0] / incoming_amplitude; }
  double transmission_probability() const { return std::norm(transmission()); }
  double reflection_probability() const { return std::norm(reflection()); }
};

/// Connection coefficients by integrating a pure transmitted wave from -X0 to +X0 and
/// matching against W_in, W_out there. X0 = 0 picks a default; the error estimate repeats the
/// computation with 2 X0 and tol/2.
ConnectionResult weber_connection(double lambda, Complex z, double h, double epsilon,
                                  double X0 = 0.0, double tol = 1e-12,
                                  const std::vector<double>& eval_points = {},
                                  bool estimate_error = true);

struct TransitionComparisonRow {
  Complex z{};
  double h = 0.0;
  double x_eval = 0.0;
  bool excluded = false;      // Gamma pole: apply_J refused
  bool near_lattice = false;  // d(z, Gamma_0(h)) <= nu h
  double transmission_probability = 0.0;  // oracle |T|^2
  double oracle_error = 0.0;
  Complex u_oracle{};
  Complex u_J{};
  double abs_oracle = 0.0;       // |local transmitted amplitude| u/W_out at x_eval, oracle
  double abs_J = 0.0;            // the same for J u0
  double rel_err_modulus = 0.0;  // | |u_J| - |u_oracle| | / |u_oracle| at x_eval
  double abs_T_asymptotic = 0.0;  // |T| from the matching at X0
  double coeff_rel_err = 0.0;     // | |u_J / W_out| - |T| | / |T|
  double phase_err = 0.0;
  std::string note;
};

struct TransitionComparison {
  std::vector<TransitionComparisonRow> rows;
  std::vector<Complex> slope_z;    // one entry per z with at least two usable h
  std::vector<double> slopes;      // log-log slope of rel_err_modulus vs h
  double phase_constant = 0.0;
};

/// apply_J with unit Cauchy data against the oracle solution at x_eval on the transmitted side.
/// The graded error is pointwise; the asymptotic coefficient error is reported alongside.
TransitionComparison compare_transition(const TransitionScenario& scenario,
                                        const std::vector<Complex>& z_list,
                                        const std::vector<double>& h_list, double x_eval = -0.8);

struct ScaledResonances {
  std::vector<Complex> values;
  std::vector<double> change;  // relative change of the extrapolated value under grid doubling
  double X = 0.0;
  int grid_size = 0;
};

/// Resonances of the exact barrier by complex scaling at angle pi/4: the scaled operator is
/// -i (-h^2 d^2 + lambda^2 y^2/4), discretised by second-order differences on [-X, X] with
/// grid_size, 2 grid_size and 4 grid_size points and Richardson-extrapolated.
ScaledResonances scaled_resonances_detail(double lambda, double h, int count, int grid_size = 2000);
std::vector<Complex> scaled_resonances(double lambda, double h, int count, int grid_size = 2000);

}  // namespace saddle

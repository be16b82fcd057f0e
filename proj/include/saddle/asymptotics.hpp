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
#include <limits>
#include <utility>
#include <vector>

#include "saddle/linalg.hpp"

namespace saddle {

/// Sorted set of N-combinations of generators, up to a cutoff.
struct ExponentLadder {
  std::vector<double> exponents;   // strictly increasing, exponents[0] == 0
  std::vector<int> multiplicity;   // how many distinct combinations merged into each entry
  std::vector<double> generators;  // deduplicated
  double cutoff = 0.0;

  std::size_t size() const { return exponents.size(); }
  double operator[](std::size_t i) const { return exponents[i]; }
};

/// All sums of n_j * lambda_j (n_j in N) up to cutoff, including 0.
ExponentLadder mu_ladder(const Vec& lambdas, double cutoff);

/// Ladder generated by mu_k - mu_1, k >= 2, with the same cutoff.
ExponentLadder muhat_ladder(const ExponentLadder& mu);

/// Closure of a generator set under addition (the common kernel of both ladders).
ExponentLadder ladder_from_generators(std::vector<double> generators, double cutoff);

/// One term P_j(t) e^{-mu_j t}; coeffs(i, l) multiplies t^l in component i.
struct SeriesTerm {
  double mu = 0.0;
  CMat coeffs;
  int ladder_index = -1;

  int degree() const { return static_cast<int>(coeffs.cols()) - 1; }
  double norm() const { return coeffs.norm(); }
};

/// Finite expandible representation sum_j P_j(t) e^{-mu_j t}.
struct ExpandiblePolySeries {
  std::vector<SeriesTerm> terms;
  int value_dim = 1;
  double residual_rms = 0.0;
  double tail_bound = 0.0;
  double condition = 0.0;

  CVec evaluate(double t) const;
  Vec evaluate_real(double t) const { return evaluate(t).real(); }
};

struct FitSample {
  double t;
  Vec value;
};

struct FitOptions {
  double drop_relative = 1e-10;
  double max_condition = 1e12;
  /// Exponents whose e^{-mu t_max} is below this are not fitted.
  double noise_floor = 1e-14;
  /// Cap on the number of ladder exponents entering the design matrix.
  int max_terms = 12;
};

/// Least-squares fit of samples by sum_j P_j(t) e^{-mu_j t} on the given ladder.
ExpandiblePolySeries fit_expandible(const std::vector<FitSample>& samples,
                                    const ExponentLadder& ladder, int max_poly_degree,
                                    const FitOptions& options = {});

/// Log-spaced times on [0, t_max] (denser near 0).
std::vector<double> expandible_sample_times(double t_max, int count);

struct LeadingTerm {
  double mu1 = 0.0;
  Vec gamma1;
  Vec g1;
  /// True when the expected first exponent carries no coefficient (bad set).
  bool on_bad_set = false;
  Vec leading_coefficient;
};

/// Leading exponent and its constant coefficient. Throws NumericalError when the
/// leading polynomial depends on t. spatial_dim selects the x-part for g1.
LeadingTerm leading_term(const ExpandiblePolySeries& series, int spatial_dim = -1,
                         double expected_mu1 = std::numeric_limits<double>::quiet_NaN());

/// Terms j < J1, understood with the extra factor e^{-S t}.
struct ShiftedSeries {
  std::vector<SeriesTerm> terms;
  std::complex<double> shift{};
  int value_dim = 1;
};

std::pair<ShiftedSeries, ExpandiblePolySeries> split_series(const ExpandiblePolySeries& series,
                                                            std::complex<double> S, int J1);

ExpandiblePolySeries reassemble(const ShiftedSeries& minus, const ExpandiblePolySeries& plus);

/// sum_j sum_l l!/(S+mu_j)^{l+1} b_{j,l}, the integral over [0, inf) of the shifted series.
CVec resolvent_integral(const ShiftedSeries& minus_part, std::complex<double> S);

/// Limit of v(t) as t -> inf when v(t) - v(inf) expands in powers of e^{-rate t}:
/// polynomial extrapolation in q = e^{-rate t} to q = 0 (Neville).
struct Extrapolation {
  CVec limit;
  double error = 0.0;  // change when the farthest sample is dropped
};

Extrapolation extrapolate_exponential(const std::vector<double>& times,
                                      const std::vector<CVec>& values, double rate);

/// Default truncation depth: first ladder index with mu_J > C1 + sum(lambda)/2.
int default_J1(const ExponentLadder& mu, double C1, const Vec& lambdas);

}  // namespace saddle

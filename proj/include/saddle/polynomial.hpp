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

#include <vector>

#include "saddle/linalg.hpp"

namespace saddle {

/// One monomial c * x^alpha.
struct Monomial {
  std::vector<int> exponents;
  double coeff = 0.0;
};

/// Sparse multivariate polynomial with closed-form derivatives.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int dim) : dim_(dim) {}
  Polynomial(int dim, std::vector<Monomial> terms);

  int dim() const { return dim_; }
  int degree() const;
  int min_degree() const;  // smallest total degree among nonzero terms
  const std::vector<Monomial>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add_term(const std::vector<int>& exponents, double coeff);

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

  /// Evaluates value, gradient and Hessian in one pass.
  void evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const;

  /// Upper bound of the Frobenius norm of the Hessian over the box |x_i| <= r.
  double hessian_bound(double r) const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial scaled(double s) const;

 private:
  void merge();
  int dim_ = 0;
  int max_exp_ = 0;
  std::vector<Monomial> terms_;
};

/// All exponent vectors of total degree in [lo, hi] in graded lexicographic order.
std::vector<std::vector<int>> total_degree_exponents(int dim, int lo, int hi);

/// Chebyshev points of the first kind on [-1, 1].
std::vector<double> chebyshev_nodes(int n);

/// Monomial coefficients of T_0..T_n: row k holds T_k.
Mat chebyshev_to_monomial_table(int n);

}  // namespace saddle

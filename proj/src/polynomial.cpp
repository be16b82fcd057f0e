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

#include "saddle/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "saddle/errors.hpp"

namespace saddle {

Polynomial::Polynomial(int dim, std::vector<Monomial> terms) : dim_(dim), terms_(std::move(terms)) {
  for (const auto& m : terms_) {
    if (static_cast<int>(m.exponents.size()) != dim_)
      throw ValidationError("polynomial term has wrong number of exponents");
    for (int e : m.exponents)
      if (e < 0) throw ValidationError("polynomial exponent must be non-negative");
  }
  merge();
}

void Polynomial::add_term(const std::vector<int>& exponents, double coeff) {
  if (static_cast<int>(exponents.size()) != dim_)
    throw ValidationError("polynomial term has wrong number of exponents");
  terms_.push_back({exponents, coeff});
  merge();
}

void Polynomial::merge() {
  std::map<std::vector<int>, double> acc;
  for (const auto& m : terms_) acc[m.exponents] += m.coeff;
  terms_.clear();
  max_exp_ = 0;
  for (const auto& [e, c] : acc) {
    if (c == 0.0) continue;
    terms_.push_back({e, c});
    for (int k : e) max_exp_ = std::max(max_exp_, k);
  }
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& m : terms_) {
    int s = 0;
    for (int e : m.exponents) s += e;
    d = std::max(d, s);
  }
  return d;
}

int Polynomial::min_degree() const {
  int d = 1 << 20;
  for (const auto& m : terms_) {
    int s = 0;
    for (int e : m.exponents) s += e;
    d = std::min(d, s);
  }
  return terms_.empty() ? 0 : d;
}

void Polynomial::evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const {
  if (x.size() != dim_) throw ValidationError("polynomial evaluated at point of wrong dimension");
  // pw(i, k) = x_i^k
  Mat pw(dim_, max_exp_ + 1);
  for (int i = 0; i < dim_; ++i) {
    pw(i, 0) = 1.0;
    for (int k = 1; k <= max_exp_; ++k) pw(i, k) = pw(i, k - 1) * x[i];
  }
  auto power = [&](int i, int k) { return k < 0 ? 0.0 : pw(i, k); };
  double v = 0.0;
  if (grad) grad->setZero(dim_);
  if (hess) hess->setZero(dim_, dim_);
  for (const auto& m : terms_) {
    const auto& e = m.exponents;
    if (value) {
      double t = m.coeff;
      for (int i = 0; i < dim_; ++i) t *= pw(i, e[i]);
      v += t;
    }
    if (grad) {
      for (int i = 0; i < dim_; ++i) {
        if (e[i] == 0) continue;
        double t = m.coeff * e[i];
        for (int j = 0; j < dim_; ++j) t *= (j == i) ? power(j, e[j] - 1) : pw(j, e[j]);
        (*grad)[i] += t;
      }
    }
    if (hess) {
      for (int i = 0; i < dim_; ++i) {
        for (int j = i; j < dim_; ++j) {
          double t = m.coeff;
          if (i == j) {
            if (e[i] < 2) continue;
            t *= e[i] * (e[i] - 1);
            for (int k = 0; k < dim_; ++k) t *= (k == i) ? power(k, e[k] - 2) : pw(k, e[k]);
          } else {
            if (e[i] == 0 || e[j] == 0) continue;
            t *= e[i] * e[j];
            for (int k = 0; k < dim_; ++k)
              t *= (k == i || k == j) ? power(k, e[k] - 1) : pw(k, e[k]);
          }
          (*hess)(i, j) += t;
          if (i != j) (*hess)(j, i) += t;
        }
      }
    }
  }
  if (value) *value = v;
}

double Polynomial::value(const Vec& x) const {
  double v;
  evaluate(x, &v, nullptr, nullptr);
  return v;
}

Vec Polynomial::gradient(const Vec& x) const {
  Vec g;
  evaluate(x, nullptr, &g, nullptr);
  return g;
}

Mat Polynomial::hessian(const Vec& x) const {
  Mat h;
  evaluate(x, nullptr, nullptr, &h);
  return h;
}

double Polynomial::hessian_bound(double r) const {
  Mat bound = Mat::Zero(dim_, dim_);
  for (const auto& m : terms_) {
    const auto& e = m.exponents;
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) {
        double c = std::abs(m.coeff);
        std::vector<int> f = e;
        if (i == j) {
          if (f[i] < 2) continue;
          c *= f[i] * (f[i] - 1);
          f[i] -= 2;
        } else {
          if (f[i] == 0 || f[j] == 0) continue;
          c *= f[i] * f[j];
          f[i] -= 1;
          f[j] -= 1;
        }
        int s = 0;
        for (int k : f) s += k;
        bound(i, j) += c * std::pow(r, s);
      }
    }
  }
  return bound.norm();
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  if (other.dim_ != dim_ && !(other.terms_.empty() || terms_.empty()))
    throw ValidationError("adding polynomials of different dimension");
  Polynomial out(std::max(dim_, other.dim_));
  out.terms_ = terms_;
  out.terms_.insert(out.terms_.end(), other.terms_.begin(), other.terms_.end());
  out.merge();
  return out;
}

Polynomial Polynomial::scaled(double s) const {
  Polynomial out = *this;
  for (auto& m : out.terms_) m.coeff *= s;
  out.merge();
  return out;
}

std::vector<std::vector<int>> total_degree_exponents(int dim, int lo, int hi) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(dim, 0);
  for (int deg = lo; deg <= hi; ++deg) {
    // enumerate compositions of deg into dim parts, first index largest first
    std::vector<std::vector<int>> level;
    std::function<void(int, int)> rec = [&](int i, int rest) {
      if (i == dim - 1) {
        e[i] = rest;
        level.push_back(e);
        return;
      }
      for (int k = rest; k >= 0; --k) {
        e[i] = k;
        rec(i + 1, rest - k);
      }
    };
    if (dim > 0) rec(0, deg);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::vector<double> chebyshev_nodes(int n) {
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = std::cos(std::numbers::pi * (k + 0.5) / n);
  return x;
}

Mat chebyshev_to_monomial_table(int n) {
  Mat t = Mat::Zero(n + 1, n + 1);
  t(0, 0) = 1.0;
  if (n >= 1) t(1, 1) = 1.0;
  for (int k = 2; k <= n; ++k) {
    for (int j = 0; j <= k; ++j) {
      double v = -t(k - 2, j);
      if (j > 0) v += 2.0 * t(k - 1, j - 1);
      t(k, j) = v;
    }
  }
  return t;
}

}  // namespace saddle

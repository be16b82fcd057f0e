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

#include <cmath>

#include <doctest.h>

#include "helpers.hpp"
#include "saddle/errors.hpp"
#include "saddle/special_functions.hpp"

using namespace saddle;

TEST_SUITE("special_functions") {
  TEST_CASE("gamma on the critical line satisfies the reflection identity") {
    double worst = 0.0;
    for (int k = 0; k <= 100; ++k) {
      const double y = -5.0 + 0.1 * k;
      const double lhs = std::norm(complex_gamma({0.5, y})) * std::cosh(M_PI * y) / M_PI;
      worst = std::max(worst, std::abs(lhs - 1.0));
    }
    CHECK(worst <= 1e-10);
  }

  TEST_CASE("gamma at real points") {
    CHECK(std::abs(complex_gamma(5.0) - 24.0) <= 1e-11);
    CHECK(std::abs(complex_gamma(0.5) - std::sqrt(M_PI)) <= 1e-13);
    CHECK(std::abs(complex_gamma(-0.5) + 2.0 * std::sqrt(M_PI)) <= 1e-12);
    // std::tgamma is an independent real implementation
    for (double x : {0.1, 0.7, 1.3, 2.9, 7.25, -1.5, -2.2})
      CHECK(std::abs(complex_gamma(x).real() - std::tgamma(x)) <= 1e-12 * std::abs(std::tgamma(x)));
  }

  TEST_CASE("gamma recurrence off the real axis") {
    for (Complex z : {Complex(0.3, 1.2), Complex(-2.4, 0.7), Complex(3.0, -4.0)}) {
      const Complex a = complex_gamma(z + 1.0);
      const Complex b = z * complex_gamma(z);
      CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
    }
  }

  TEST_CASE("gamma poles raise PoleError") {
    for (int n = 0; n <= 3; ++n) CHECK_THROWS_AS(complex_gamma(Complex(-n, 0.0)), PoleError);
    CHECK_NOTHROW(complex_gamma(Complex(-1.0, 1e-6)));
  }

  TEST_CASE("principal power uses the principal logarithm") {
    const Complex v = principal_pow(Complex(-1.0, 0.0), 0.5);
    CHECK(std::abs(v - Complex(0.0, 1.0)) <= 1e-15);
    const Complex w = principal_pow(Complex(0.0, 2.0), Complex(1.0, 1.0));
    const Complex ref = std::exp(Complex(1.0, 1.0) * (std::log(2.0) + Complex(0.0, M_PI / 2)));
    CHECK(std::abs(w - ref) <= 1e-14);
  }

  TEST_CASE("branch tracker follows a continuous square root") {
    BranchTracker tr;
    Complex last{};
    for (int k = 0; k <= 400; ++k) {
      const double a = 2.0 * M_PI * k / 200.0;  // twice around the origin
      last = tr.next(std::exp(Complex(0.0, a)));
    }
    // after two turns the continued root returns to the start; after one it flips sign
    CHECK(std::abs(last - 1.0) <= 1e-12);
    BranchTracker one;
    for (int k = 0; k <= 200; ++k) last = one.next(std::exp(Complex(0.0, 2.0 * M_PI * k / 200.0)));
    CHECK(std::abs(last + 1.0) <= 1e-12);
    CHECK(one.off_principal_count() > 0);
  }
}

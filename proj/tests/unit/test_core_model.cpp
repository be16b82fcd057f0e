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

#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "saddle/core_model.hpp"
#include "saddle/errors.hpp"

using namespace saddle;
using saddle::test::vec;

namespace {

// Brute force over a box of multi-indices, independent of the recursive enumeration.
std::vector<std::pair<double, std::vector<int>>> brute_lattice(const Vec& l, double h, double bound) {
  const int d = static_cast<int>(l.size());
  std::vector<std::pair<double, std::vector<int>>> out;
  const int nmax = static_cast<int>(bound / (h * l.minCoeff())) + 2;
  std::vector<int> a(d, 0);
  while (true) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += l[j] * (a[j] + 0.5);
    if (h * s <= bound * (1.0 + 1e-14)) out.push_back({h * s, a});
    int j = 0;
    while (j < d && ++a[j] > nmax) a[j++] = 0;
    if (j == d) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("core_model") {
  TEST_CASE("quadratic model values") {
    const auto m1 = make_quadratic_model({1.0});
    CHECK(m1.p0(vec({2.0}), vec({2.0})) == doctest::Approx(0.0));
    const auto m2 = make_quadratic_model({1.0, 2.0});
    CHECK(m2.p0(vec({1.0, 0.0}), vec({0.0, 1.0})) == doctest::Approx(0.5));
    const auto lin = linearize(make_quadratic_model({3.0}));
    CHECK(lin.eigenvalues[0] == doctest::Approx(-3.0));
    CHECK(lin.eigenvalues[1] == doctest::Approx(3.0));
    // unstable direction spanned by (1, 1)
    const Vec u = lin.unstable_frame.col(0);
    CHECK(std::abs(u[0] - u[1]) <= 1e-12 * u.norm());
  }

  TEST_CASE("barrier model and its linearization") {
    const auto m = make_barrier_model({1.0});
    CHECK(m.p0(vec({0.4}), vec({0.3})) == doctest::Approx(0.09 - 0.04));
    const auto lin = linearize(m);
    CHECK((lin.F - (Mat(2, 2) << 0.0, 2.0, 0.5, 0.0).finished()).norm() <= 1e-14);
    CHECK(lin.eigenvalues[0] == doctest::Approx(-1.0));
    CHECK(lin.eigenvalues[1] == doctest::Approx(1.0));

    const auto m2 = make_barrier_model({1.0, 2.0});
    const auto lin2 = linearize(m2);
    const Vec expect = vec({-2.0, -1.0, 1.0, 2.0});
    CHECK((lin2.eigenvalues - expect).norm() <= 1e-10);
  }

  TEST_CASE("perturbations leave the fixed point and its Hessian alone") {
    const auto cubic = make_barrier_model({1.0}, {{{3}, 0.1}});
    CHECK(cubic.grad_p0(vec({0.0}), vec({0.0})).norm() <= 1e-12);
    const auto quartic = make_barrier_model({1.0, 2.0}, {{{4, 0}, 0.05}});
    const auto plain = make_barrier_model({1.0, 2.0});
    const Vec z2 = Vec::Zero(2);
    CHECK((quartic.hess_p0(z2, z2) - plain.hess_p0(z2, z2)).norm() <= 1e-14);
  }

  TEST_CASE("fixed point invariants over several models") {
    std::vector<HamiltonianModel> models{make_quadratic_model({1.0}), make_quadratic_model({1.0, 2.0}),
                                         make_barrier_model({1.0, 2.0}, {{{3, 0}, 0.05}, {{1, 2}, 0.05}}),
                                         make_barrier_model({0.7, 1.3, 2.1}, {{{2, 1, 0}, 0.1}})};
    for (const auto& m : models) {
      const Vec z = Vec::Zero(m.dim());
      CHECK(m.grad_p0(z, z).norm() <= 1e-12);
      const auto lin = linearize(m);
      Vec expect(2 * m.dim());
      for (int j = 0; j < m.dim(); ++j) {
        expect[m.dim() - 1 - j] = -m.lambdas()[j];
        expect[m.dim() + j] = m.lambdas()[j];
      }
      CHECK((lin.eigenvalues - expect).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(make_quadratic_model({1.0, -2.0}), ValidationError);
    CHECK_THROWS_AS(make_barrier_model({1.0}, {{{2}, 0.1}}), ValidationError);
    CHECK_THROWS_AS(make_barrier_model({1.0}, {{{7}, 0.1}}), ValidationError);
  }

  TEST_CASE("branch roots") {
    const double eps = 0.1;
    const auto q = make_quadratic_model({1.0});
    auto r = branch_roots(q, vec({eps}), Vec());
    CHECK(r.f_minus.real() == doctest::Approx(-eps));
    // quadratic lambda=[1]: 1/2(xi^2 - eps^2) = 0
    CHECK(r.f_plus.real() == doctest::Approx(eps));

    const auto b = make_barrier_model({1.0});
    r = branch_roots(b, vec({0.3}), Vec());
    CHECK(r.f_minus.real() == doctest::Approx(-0.15).epsilon(1e-12));
    CHECK(r.f_plus.real() == doctest::Approx(0.15).epsilon(1e-12));

    const auto bc = make_barrier_model({1.0}, {{{3}, 0.1}});
    r = branch_roots(bc, vec({0.3}), Vec());
    const double exact = std::sqrt(0.0225 - 0.0027);
    CHECK(std::abs(r.f_plus.real() - exact) <= 1e-12);
    CHECK(std::abs(r.f_minus.real() + exact) <= 1e-12);

    const auto m2 = make_barrier_model({1.0, 2.0}, {{{3, 0}, 0.05}, {{1, 2}, 0.05}});
    for (double x2 : {-0.1, 0.0, 0.07}) {
      const Vec x = vec({0.1, x2});
      const Vec xi_p = vec({0.01});
      const auto rr = branch_roots(m2, x, xi_p);
      if (!rr.real) continue;
      CHECK(rr.f_minus.real() <= rr.f_plus.real());
      for (Complex f : {rr.f_minus, rr.f_plus})
        CHECK(std::abs(m2.p0(x, vec({f.real(), 0.01}))) <= 1e-10);
    }
  }

  TEST_CASE("spectral parameters") {
    const double h = 0.1;
    auto sp = spectral_params(0.1 * h, h, 1.0, 1.0, 0.1, vec({1.0, 2.0}));
    CHECK(std::abs(sp.S - Complex(1.5, -0.1)) <= 1e-15);
    sp = spectral_params(0.0, h, 1.0, 1.0, 0.1, vec({1.0}));
    CHECK(sp.K1 == 1);
    sp = spectral_params(Complex(0.0, -h / 2), h, 1.0, 1.0, 0.1, vec({1.0}));
    CHECK(std::abs(sp.S) <= 1e-15);
    // exact identities for S
    for (Complex z : {Complex(0.03, -0.07), Complex(-0.09, 0.02)}) {
      sp = spectral_params(z, h, 1.0, 1.0, 0.1, vec({0.5, 1.5}));
      CHECK(sp.S.real() == 1.0 + z.imag() / h);
      CHECK(sp.S.imag() == -z.real() / h);
    }
    CHECK_THROWS_AS(spectral_params(Complex(0.5, 0.0), h, 1.0, 1.0, 0.1, vec({1.0})), ValidationError);
  }

  TEST_CASE("resonance lattice examples") {
    auto lat = gamma0_lattice(vec({1.0}), 0.1, 0.2);
    REQUIRE(lat.points.size() == 2);
    CHECK(std::abs(lat.points[0] - Complex(0.0, -0.05)) <= 1e-15);
    CHECK(std::abs(lat.points[1] - Complex(0.0, -0.15)) <= 1e-15);

    lat = gamma0_lattice(vec({1.0, 2.0}), 0.1, 0.16);
    REQUIRE(lat.points.size() == 1);
    CHECK(std::abs(lat.points[0] - Complex(0.0, -0.15)) <= 1e-15);
    CHECK(lat.multi_indices[0] == std::vector<int>{0, 0});

    lat = gamma0_lattice(vec({1.0, 1.0}), 0.1, 0.25);
    int hits = 0;
    for (std::size_t k = 0; k < lat.points.size(); ++k)
      if (std::abs(lat.points[k] - Complex(0.0, -0.2)) <= 1e-14) {
        ++hits;
        const auto& a = lat.multi_indices[k];
        CHECK((a == std::vector<int>{1, 0} || a == std::vector<int>{0, 1}));
      }
    CHECK(hits == 2);
  }

  TEST_CASE("resonance lattice equals brute-force enumeration") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> ul(0.3, 3.0), uh(0.01, 0.2), ub(0.5, 6.0);
    std::uniform_int_distribution<int> ud(1, 3);
    for (int draw = 0; draw < 20; ++draw) {
      const int d = ud(rng);
      Vec l(d);
      for (int j = 0; j < d; ++j) l[j] = ul(rng);
      std::sort(l.data(), l.data() + d);
      const double h = uh(rng);
      const double bound = ub(rng) * h * l.sum();
      const auto lat = gamma0_lattice(l, h, bound);
      const auto ref = brute_lattice(l, h, bound);
      REQUIRE(lat.points.size() == ref.size());
      for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(lat.points[k].imag() + ref[k].first) <= 1e-12);
    }
  }

  TEST_CASE("distance to the lattice") {
    const auto lat = gamma0_lattice(vec({1.0}), 0.1, 1.0);
    CHECK(distance_to_lattice(0.0, lat) == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(distance_to_lattice(Complex(0.0, -0.05), lat) <= 1e-16);
    // brute-force minimum
    const Complex z(0.03, -0.04);
    double ref = 1e9;
    for (const Complex& p : lat.points) ref = std::min(ref, std::abs(z - p));
    CHECK(distance_to_lattice(z, lat) == doctest::Approx(ref).epsilon(1e-14));
    CHECK(ref == doctest::Approx(std::sqrt(0.001)).epsilon(1e-12));
  }

  TEST_CASE("validity radius of perturbed models") {
    CHECK(make_quadratic_model({1.0, 2.0}).validity_radius() == 1.0);
    const auto m = make_barrier_model({1.0}, {{{3}, 0.1}});
    // |W''| = 0.6 r must stay below a quarter of lambda_1^2
    CHECK(m.validity_radius() == doctest::Approx(0.25 / 0.6).epsilon(1e-9));
  }
}

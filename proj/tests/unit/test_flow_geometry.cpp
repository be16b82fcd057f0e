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
#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "saddle/core_model.hpp"
#include "saddle/flow_geometry.hpp"

using namespace saddle;
using saddle::test::vec;

namespace {

/// phi_+ of the quadratic lambda=[1] model plus c x^3.
class CubicShiftedChart : public LagrangianChart {
 public:
  explicit CubicShiftedChart(double c) : LagrangianChart(ChartKind::phi_plus, Box::symmetric(1, 0.5)), c_(c) {}
  void evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const override {
    const double t = x[0];
    if (value) *value = 0.5 * t * t + c_ * t * t * t;
    if (grad) *grad = vec({t + 3 * c_ * t * t});
    if (hess) *hess = Mat::Constant(1, 1, 1.0 + 6 * c_ * t);
  }

 private:
  double c_;
};

HamiltonianModel perturbed_2d() { return make_barrier_model({1.0, 2.0}, {{{3, 0}, 0.05}, {{1, 2}, 0.05}}); }

}  // namespace

TEST_SUITE("flow_geometry") {
  TEST_CASE("exact flow of the quadratic model") {
    const auto m = make_quadratic_model({1.0});
    const PhasePoint a = flow(m, {vec({1.0}), vec({-1.0})}, std::log(2.0));
    CHECK(std::abs(a.x[0] - 0.5) <= 1e-9);
    CHECK(std::abs(a.xi[0] + 0.5) <= 1e-9);
    const PhasePoint b = flow(m, {vec({1.0}), vec({1.0})}, -std::log(2.0));
    CHECK(std::abs(b.x[0] - 0.5) <= 1e-9);
    CHECK(std::abs(b.xi[0] - 0.5) <= 1e-9);
  }

  TEST_CASE("perturbed barrier flow contracts along the stable branch") {
    const auto m = make_barrier_model({1.0}, {{{3}, 0.1}});
    const double fm = branch_roots(m, vec({0.3}), Vec()).f_minus.real();
    const PhasePoint p10 = flow(m, {vec({0.3}), vec({fm})}, 5.0, 1e-10);
    const PhasePoint p12 = flow(m, {vec({0.3}), vec({fm})}, 5.0, 1e-12);
    CHECK(std::abs(p10.x[0]) <= 0.3 * std::exp(-4.5) * 1.2);
    // self-convergence under tolerance refinement
    CHECK(std::abs(p10.x[0] - p12.x[0]) <= 1e-8);
  }

  TEST_CASE("Jacobian of the linear flow") {
    const auto m = make_quadratic_model({1.0});
    for (double t : {0.0, 0.4, 1.3}) {
      const auto [p, J] = flow_with_jacobian(m, {vec({0.1}), vec({0.05})}, t);
      Mat ref(2, 2);
      ref << std::cosh(t), std::sinh(t), std::sinh(t), std::cosh(t);
      CHECK((J - ref).norm() <= 1e-9);
    }
  }

  TEST_CASE("Jacobian cocycle property") {
    const auto m = make_barrier_model({1.0});
    const PhasePoint p{vec({0.2}), vec({0.05})};
    const auto [p1, J1] = flow_with_jacobian(m, p, 1.0, 1e-12);
    const auto [ph, Jh] = flow_with_jacobian(m, p, 0.5, 1e-12);
    const auto [ph2, Jh2] = flow_with_jacobian(m, ph, 0.5, 1e-12);
    CHECK((J1 - Jh2 * Jh).norm() <= 1e-8);
  }

  TEST_CASE("flow reversibility and symplecticity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.05, 0.05), ut(-0.8, 0.8);
    const std::vector<HamiltonianModel> models{make_quadratic_model({1.0, 2.0}), perturbed_2d()};
    const double tol = 1e-10;
    for (int k = 0; k < 100; ++k) {
      const auto& m = models[k % 2];
      const PhasePoint p{vec({u(rng), u(rng)}), vec({u(rng), u(rng)})};
      const double t = ut(rng);
      const auto [q, J] = flow_with_jacobian(m, p, t, tol);
      const PhasePoint back = flow(m, q, -t, tol);
      CHECK((back.stacked() - p.stacked()).norm() <= 10 * tol);
      CHECK(symplectic_defect(J) <= 1e-8);
    }
  }

  TEST_CASE("trajectory samples carry energy and symplectic Jacobians") {
    const auto m = perturbed_2d();
    std::vector<double> times;
    for (int k = 0; k <= 20; ++k) times.push_back(0.05 * k);
    const auto traj = trajectory(m, {vec({0.1, 0.05}), vec({-0.03, 0.02})}, times, 1e-11, true);
    CHECK(traj.points.size() == times.size());
    CHECK(traj.energy_drift() <= 1e-9);
    CHECK(traj.max_symplectic_defect() <= 1e-8);
  }

  TEST_CASE("generating functions of the unperturbed barrier") {
    const auto m = make_barrier_model({1.0, 2.0});
    const auto plus = manifold_generating_function(m, +1, m.validity_box());
    const auto minus = manifold_generating_function(m, -1, m.validity_box());
    for (const Vec& x : {vec({0.3, -0.2}), vec({-0.7, 0.5}), vec({0.0, 0.9})}) {
      const double ref = x[0] * x[0] / 4 + x[1] * x[1] / 2;
      CHECK(std::abs(plus->value(x) - ref) <= 1e-10);
      CHECK(std::abs(minus->value(x) + ref) <= 1e-10);
    }
    CHECK(invariance_residual(m, *plus) <= 1e-12);
    CHECK(invariance_residual(m, *minus) <= 1e-12);
  }

  TEST_CASE("quadratic charts are odd under xi -> -xi") {
    const auto m = make_quadratic_model({1.0, 2.0});
    const auto plus = manifold_generating_function(m, +1, m.validity_box());
    const auto minus = manifold_generating_function(m, -1, m.validity_box());
    for (const Vec& x : {vec({0.3, -0.2}), vec({-0.7, 0.5})}) CHECK(std::abs(plus->value(x) + minus->value(x)) <= 1e-12);
    CHECK((plus->hessian(Vec::Zero(2)) - Mat::Identity(2, 2)).norm() <= 1e-10);
  }

  TEST_CASE("Hessians at the fixed point") {
    for (const auto& m : {make_barrier_model({1.0}, {{{3}, 0.1}}), perturbed_2d(), make_barrier_model({1.0, 2.0})}) {
      const Mat L = m.lambdas().asDiagonal();
      for (int sign : {+1, -1}) {
        const auto chart = manifold_generating_function(m, sign, m.validity_box());
        CHECK((chart->hessian(Vec::Zero(m.dim())) - sign * 0.5 * L).norm() <= 1e-6);
        CHECK(invariance_residual(m, *chart) <= 1e-8);
      }
    }
  }

  TEST_CASE("perturbed chart has a cubic part") {
    const auto m = make_barrier_model({1.0}, {{{3}, 0.1}});
    const Box dom = Box::symmetric(1, 0.4);
    const auto chart = manifold_generating_function(m, +1, dom);
    CHECK(invariance_residual(m, *chart) <= 1e-8);
    const double d = 1e-3;
    const double third = (chart->hessian(vec({d}))(0, 0) - chart->hessian(vec({-d}))(0, 0)) / (2 * d);
    // xi = f_+(x) = x/2 sqrt(1 - 0.4 x) = x/2 - 0.1 x^2 + ...: phi'''(0) = -0.2
    CHECK(std::abs(third + 0.2) <= 1e-5);
  }

  TEST_CASE("invariance residual detects a wrong chart") {
    const auto m = make_quadratic_model({1.0});
    const CubicShiftedChart bad(1e-3);
    CHECK(invariance_residual(m, bad) > 1e-5);
    const CubicShiftedChart good(0.0);
    CHECK(invariance_residual(m, good) <= 1e-12);
  }

  TEST_CASE("stable manifold points contract at rate lambda_1") {
    const auto m = perturbed_2d();
    const auto chart = manifold_generating_function(m, -1, m.validity_box());
    const double t = 8.0 / m.lambda1();
    for (const Vec& x : {vec({0.1, 0.05}), vec({-0.2, 0.1}), vec({0.05, -0.15})}) {
      const PhasePoint end = flow(m, {x, chart->gradient(x)}, t, 1e-12);
      CHECK(end.stacked().norm() <= 2.0 * std::exp(-m.lambda1() * t) * PhasePoint{x, chart->gradient(x)}.stacked().norm());
    }
    // a small enough start lands within 1e-6 of the fixed point
    const Vec x = vec({1e-3, 1e-3});
    CHECK(flow(m, {x, chart->gradient(x)}, t, 1e-12).stacked().norm() <= 1e-6);
  }

  TEST_CASE("leading coefficients along rays") {
    const double eps = 0.1;
    const auto q = make_quadratic_model({1.0, 2.0});
    const auto minus = manifold_generating_function(q, -1, q.validity_box());
    const Vec g1 = leading_coefficient(q, *minus, -1, vec({eps, 0.05}));
    CHECK((g1 - vec({eps, 0.0})).norm() <= 1e-10);

    const auto m = perturbed_2d();
    const auto mm = manifold_generating_function(m, -1, m.validity_box());
    const Vec x = vec({0.1, 0.03});
    const Vec g = leading_coefficient(m, *mm, -1, x);
    const auto fit = fitted_leading_coefficient(m, *mm, -1, x);
    CHECK(fit.mu1 == doctest::Approx(1.0));
    // the least-squares fit is a coarse diagnostic
    CHECK((fit.g1 - g).norm() <= 5e-3 * g.norm());
  }

  TEST_CASE("ladder gap") {
    CHECK(ladder_gap(vec({1.0, 2.0})) == doctest::Approx(1.0));
    CHECK(ladder_gap(vec({1.0, 1.5})) == doctest::Approx(0.5));
  }
}

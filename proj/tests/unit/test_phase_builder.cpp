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
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "scenarios.hpp"
#include "saddle/flow_geometry.hpp"
#include "saddle/phase_builder.hpp"

using namespace saddle;
using saddle::test::scenario_for;
using saddle::test::vec;

TEST_SUITE("phase_builder") {
  TEST_CASE("eikonal solution at the base point and on the initial surface") {
    const double eps = 0.1;
    const auto sc = scenario_for(make_barrier_model({1.0, 2.0}), eps);
    const auto psi0 = eikonal_psi(sc, vec({0.0}));
    CHECK((psi0->gradient(vec({eps, 0.0})) - vec({-eps / 2, 0.0})).norm() <= 1e-10);

    const Vec eta = vec({0.01});
    const auto psi = eikonal_psi(sc, eta);
    const Box& dom = psi->domain();
    for (double xp : {dom.lo[1], 0.5 * (dom.lo[1] + dom.hi[1]), dom.hi[1]}) {
      const Vec x = vec({eps, xp});
      CHECK(std::abs(psi->gradient(x)[1] - eta[0]) <= 1e-9);
      CHECK(std::abs(psi->value(x) - xp * eta[0]) <= 1e-10);
      // branch f_- and the eikonal equation
      const Vec g = psi->gradient(x);
      CHECK(std::abs(g[0] - branch_roots(sc.model, x, eta).f_minus.real()) <= 1e-9);
      CHECK(std::abs(sc.model.p0(x, g)) <= 1e-10);
    }
    for (double x1 : {0.06, 0.12}) CHECK(std::abs(sc.model.p0(vec({x1, 0.0}), psi->gradient(vec({x1, 0.0})))) <= 1e-10);
  }

  TEST_CASE("one-dimensional eikonal solution is phi_- up to a constant") {
    const auto sc = scenario_for(make_barrier_model({1.0}), 0.1);
    const auto psi = eikonal_psi(sc, Vec());
    const double c = psi->value(vec({0.1})) - sc.phi_minus->value(vec({0.1}));
    for (double x : {0.06, 0.09, 0.13}) CHECK(std::abs(psi->value(vec({x})) - sc.phi_minus->value(vec({x})) - c) <= 1e-10);
  }

  TEST_CASE("intersection points") {
    const auto sc = scenario_for(make_barrier_model({1.0, 2.0}), 0.1);
    auto ip = intersection_point(sc, sc.eta_minus());
    CHECK((ip.x_of_eta.tail(1) - sc.rho_minus.x.tail(1)).norm() <= 1e-12);
    CHECK((ip.rho_eta.stacked() - sc.rho_minus.stacked()).norm() <= 1e-10);

    const double delta = 0.01;
    ip = intersection_point(sc, vec({delta}));
    // Hess phi_- = -diag(lambda)/2: x' = -2 delta / lambda_2
    CHECK(std::abs(ip.x_of_eta[1] + delta) <= 1e-10);

    const auto sp = scenario_for(saddle::test::perturbed_barrier_2d(), 0.1);
    for (double d : {0.005, -0.01, 0.02}) {
      const auto q = intersection_point(sp, sp.eta_minus() + vec({d}));
      const double ratio = std::abs(q.x_of_eta[1] - sp.rho_minus.x[1]) / std::abs(d);
      CHECK(ratio == doctest::Approx(2.0 / 2.0).epsilon(0.1));
    }
  }

  TEST_CASE("the two manifolds intersect in a single direction") {
    const auto sc = scenario_for(saddle::test::perturbed_barrier_2d(), 0.1);
    const Vec eta = sc.eta_minus() + vec({0.01});
    const auto ip = intersection_point(sc, eta);
    const auto psi = eikonal_psi(sc, eta);
    const Vec x = ip.x_of_eta;
    auto frame = [](const Mat& H) {
      const int d = static_cast<int>(H.rows());
      Mat F(2 * d, d);
      F << Mat::Identity(d, d), H;
      return Mat(Eigen::HouseholderQR<Mat>(F).householderQ() * Mat::Identity(2 * d, d));
    };
    const Mat A = frame(sc.phi_minus->hessian(x));
    const Mat B = frame(psi->hessian(x));
    const Vec s = Eigen::JacobiSVD<Mat>(A.transpose() * B).singularValues();
    int small_angles = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (std::acos(std::min(1.0, s[i])) <= 1e-6) ++small_angles;
    CHECK(small_angles == 1);
  }

  TEST_CASE("Lambda_0 geometry") {
    const auto sc = scenario_for(make_barrier_model({1.0, 2.0}), 0.1);
    const auto l0 = build_lambda0(sc, vec({0.01}));
    CHECK(l0.flatness <= 0.2);
    CHECK(l0.gamma0_defect <= 1e-8);
    // frozen value for the barrier form, see the notes in the README
    CHECK(l0.hp_angle * 180.0 / M_PI == doctest::Approx(24.9).epsilon(0.01));

    const auto sq = scenario_for(make_quadratic_model({1.0, 2.0}), 0.1);
    const auto lq = build_lambda0(sq, vec({0.01}));
    CHECK(lq.hp_angle * 180.0 / M_PI >= 30.0);
    CHECK(lq.gamma0_defect <= 1e-8);
  }

  TEST_CASE("psi tilde") {
    const double eps = 0.1;
    const auto sc = scenario_for(make_barrier_model({1.0, 2.0}), eps);
    CHECK(std::abs(psi_tilde(sc, vec({0.0})) - eps * eps / 4) <= 1e-12);
    const auto s1 = scenario_for(make_barrier_model({1.0}), eps);
    CHECK(std::abs(psi_tilde(s1, Vec()) + s1.phi_minus->value(vec({eps}))) <= 1e-14);
  }

  TEST_CASE("phase family limit and expansion") {
    const auto sc = scenario_for(make_barrier_model({1.0, 2.0}), 0.1);
    const Vec eta = vec({0.01});
    const auto fam = evolve_phase(sc, eta, 10.0);
    CHECK(fam.eikonal_residual <= 1e-8);
    double worst = 0.0;
    for (std::size_t p = 0; p < fam.x_grid.size(); ++p)
      worst = std::max(worst, std::abs(fam.limit[static_cast<Eigen::Index>(p)] - sc.phi_plus->value(fam.x_grid[p])));
    // the fit is of phi - psi~, so a correct constant term and phi_+ limit give a zero difference
    CHECK(worst <= 1e-6);
    CHECK(std::abs(fam.psi_tilde() - psi_tilde(sc, eta)) <= 1e-14);
    double first = 0.0;
    for (const auto& term : fam.expansion.terms)
      if (term.mu > 0.0 && term.norm() > 1e-8) {
        first = term.mu;
        break;
      }
    CHECK(std::abs(first - 1.0) <= 1e-6);
  }

  TEST_CASE("critical times") {
    const double eps = 0.1;
    const auto sc = scenario_for(make_barrier_model({1.0, 2.0}), eps);
    const auto fam = evolve_phase(sc, vec({0.0}), 10.0);
    for (double a : {0.05, 0.02}) {
      const auto ct = critical_time(fam, vec({a, 0.0}));
      CHECK(std::abs(ct.t_star - std::log(eps / a)) <= 1e-8);
      CHECK(ct.second_derivative > 0.0);
    }

    const auto sp = scenario_for(saddle::test::perturbed_barrier_2d(), eps);
    const Vec eta = sp.eta_minus() + vec({0.005});
    const auto fp = evolve_phase(sp, eta, 10.0);
    const auto ip = intersection_point(sp, eta);
    const EikonalPsi psi(sp, eta, ip.x_of_eta.tail(1));
    for (double t0 : {0.3, 0.9}) {
      const Vec x = flow(sp.model, ip.rho_eta, t0, 1e-13).x;
      const auto ct = critical_time(fp, x);
      CHECK(std::abs(ct.t_star - t0) <= 1e-8);
    }

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u1(0.03, 0.09), u2(-0.012, 0.012);
    int positive = 0, total = 0;
    double grad_gap = 0.0, norm_gap = 0.0;
    std::vector<double> value_gaps;
    for (int k = 0; k < 200; ++k) {
      const Vec x = vec({u1(rng), u2(rng)});
      const auto ct = critical_time(fp, x);
      ++total;
      if (ct.second_derivative > 0.0) ++positive;
      if (k % 20 == 0) {
        const auto pp = psi.evaluate(x);
        grad_gap = std::max(grad_gap, (pp.gradient - ct.phase.gradient).norm());
        value_gaps.push_back(ct.phase.value - pp.value);
      }
    }
    CHECK(positive == total);
    CHECK(grad_gap <= 1e-6);
    for (double g : value_gaps) norm_gap = std::max(norm_gap, std::abs(g - value_gaps.front()));
    CHECK(norm_gap <= 1e-8);
    for (double xp : {-0.008, 0.0, 0.006}) {
      const auto pp = psi.evaluate(vec({eps, xp}));
      CHECK(std::abs(pp.value - (xp - ip.x_of_eta[1]) * eta[0] - psi.evaluate(ip.x_of_eta).value) <= 1e-8);
    }
  }
}

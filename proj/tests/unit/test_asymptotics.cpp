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
#include <set>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "helpers.hpp"
#include "saddle/asymptotics.hpp"
#include "saddle/errors.hpp"
#include "saddle/flow_geometry.hpp"

using namespace saddle;
using saddle::test::vec;

namespace {

std::vector<double> brute_ladder(const Vec& l, double cutoff) {
  std::vector<double> sums{0.0};
  // nested loops over n_j <= cutoff / lambda_j
  std::vector<int> n(l.size(), 0);
  while (true) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < l.size(); ++j) s += n[j] * l[j];
    if (s <= cutoff + 1e-12) sums.push_back(s);
    Eigen::Index j = 0;
    while (j < l.size() && (++n[j]) * l[j] > cutoff + 1e-12) n[j++] = 0;
    if (j == l.size()) break;
  }
  std::sort(sums.begin(), sums.end());
  std::vector<double> out;
  for (double s : sums)
    if (out.empty() || s - out.back() > 1e-12 * l.maxCoeff()) out.push_back(s);
  return out;
}

std::vector<FitSample> sample(const std::function<Vec(double)>& f, double t_max, int n) {
  std::vector<FitSample> out;
  for (double t : expandible_sample_times(t_max, n)) out.push_back({t, f(t)});
  return out;
}

}  // namespace

TEST_SUITE("asymptotics") {
  TEST_CASE("ladder examples") {
    auto mu = mu_ladder(vec({1.0}), 3.0);
    CHECK(mu.exponents == std::vector<double>{0, 1, 2, 3});
    mu = mu_ladder(vec({1.0, 2.0}), 3.5);
    CHECK(mu.exponents == std::vector<double>{0, 1, 2, 3});
    mu = mu_ladder(vec({1.0, std::sqrt(2.0)}), 3.0);
    const std::vector<double> ref{0, 1, std::sqrt(2.0), 2, 1 + std::sqrt(2.0), 2 * std::sqrt(2.0), 3};
    REQUIRE(mu.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(mu[i] - ref[i]) <= 1e-12);
  }

  TEST_CASE("ladder equals brute-force enumeration") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> ud(1, 4);
    std::uniform_real_distribution<double> ul(0.5, 3.0), uc(0.2, 1.0);
    for (int draw = 0; draw < 50; ++draw) {
      const int d = ud(rng);
      Vec l(d);
      for (int j = 0; j < d; ++j) l[j] = (draw % 3 == 0) ? std::round(ul(rng)) : ul(rng);
      std::sort(l.data(), l.data() + d);
      const double cutoff = uc(rng) * 10.0 * l[d - 1];
      const auto mu = mu_ladder(l, cutoff);
      const auto ref = brute_ladder(l, cutoff);
      REQUIRE(mu.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(mu[i] - ref[i]) <= 1e-12);
    }
  }

  TEST_CASE("muhat ladder examples") {
    auto hat = muhat_ladder(mu_ladder(vec({1.0}), 6.0));
    CHECK(hat.exponents[0] == 0.0);
    CHECK(hat.exponents[1] == doctest::Approx(1.0));
    CHECK(hat.exponents[2] == doctest::Approx(2.0));
    hat = muhat_ladder(mu_ladder(vec({1.0, 2.0}), 6.0));
    CHECK(hat.exponents[1] == doctest::Approx(1.0));
    hat = muhat_ladder(mu_ladder(vec({2.0, 3.0}), 9.0));
    CHECK(hat.exponents[1] == doctest::Approx(1.0));
    CHECK(hat.exponents[2] == doctest::Approx(2.0));
  }

  TEST_CASE("fit recovers constructed series") {
    const auto ladder = mu_ladder(vec({1.0}), 2.0);
    auto s = fit_expandible(sample([](double t) { return vec({2 * std::exp(-t) + 0.5 * std::exp(-2 * t)}); }, 8.0, 40),
                            ladder, 0);
    Vec c = Vec::Zero(3);
    for (const auto& term : s.terms) c[static_cast<int>(std::lround(term.mu))] = term.coeffs(0, 0).real();
    CHECK(std::abs(c[0]) <= 1e-8);
    CHECK(std::abs(c[1] - 2.0) <= 1e-8);
    CHECK(std::abs(c[2] - 0.5) <= 1e-8);

    const auto lt = leading_term(s);
    CHECK(lt.mu1 == doctest::Approx(1.0));
    CHECK(lt.gamma1[0] == doctest::Approx(2.0).epsilon(1e-8));

    s = fit_expandible(sample([](double t) { return vec({(3 * t + 1) * std::exp(-t)}); }, 8.0, 40),
                       mu_ladder(vec({1.0}), 1.0), 1);
    for (const auto& term : s.terms)
      if (std::abs(term.mu - 1.0) < 1e-12) {
        CHECK(std::abs(term.coeffs(0, 0) - 1.0) <= 1e-8);
        CHECK(std::abs(term.coeffs(0, 1) - 3.0) <= 1e-8);
      }
  }

  TEST_CASE("fit reproduces held-out samples") {
    // the e^{-4.5t} term is off the ladder, so the residual is not at rounding level
    auto f = [](double t) {
      return vec({std::exp(-t) - 0.3 * t * std::exp(-2 * t) + 0.05 * std::exp(-4.5 * t), 0.2 * std::exp(-3 * t)});
    };
    const auto s = fit_expandible(sample(f, 8.0, 48), mu_ladder(vec({1.0}), 4.0), 1);
    double ss = 0.0;
    int n = 0;
    for (double t = 0.013; t < 8.0; t += 0.37, ++n) ss += (s.evaluate_real(t) - f(t)).squaredNorm();
    const double rms = std::sqrt(ss / n);
    CHECK(s.residual_rms > 1e-10);
    CHECK(rms <= 10.0 * s.residual_rms);
  }

  TEST_CASE("fit of an exact stable-manifold trajectory") {
    // quadratic lambda=[1,2] from ((1,1),(-1/2,-1)): x(t) = (e^{-t}, e^{-2t})
    const auto s = fit_expandible(sample([](double t) { return vec({std::exp(-t), std::exp(-2 * t)}); }, 8.0, 48),
                                  mu_ladder(vec({1.0, 2.0}), 6.0), 1);
    std::set<long> used;
    for (const auto& term : s.terms)
      if (term.norm() > 1e-8) used.insert(std::lround(term.mu));
    CHECK(used == std::set<long>{1, 2});
    const auto lt = leading_term(s, 2, 1.0);
    CHECK(lt.mu1 == doctest::Approx(1.0));
    CHECK((lt.g1 - vec({1.0, 0.0})).norm() <= 1e-6);

    const double eps = 0.1;
    const auto s2 = fit_expandible(sample([&](double t) { return vec({eps * std::exp(-t), 0.0}); }, 8.0, 48),
                                   mu_ladder(vec({1.0, 2.0}), 6.0), 1);
    CHECK((leading_term(s2, 2, 1.0).g1 - vec({eps, 0.0})).norm() <= 1e-6);
  }

  TEST_CASE("a start on the bad set has no lambda_1 term") {
    const double eps = 0.1;
    const auto s = fit_expandible(sample([&](double t) { return vec({0.0, eps * std::exp(-2 * t)}); }, 8.0, 48),
                                  mu_ladder(vec({1.0, 2.0}), 6.0), 1);
    bool threw = false;
    LeadingTerm lt;
    try {
      lt = leading_term(s, 2, 1.0);
    } catch (const NumericalError&) {
      threw = true;
    }
    if (!threw) {
      CHECK((lt.on_bad_set || lt.mu1 == doctest::Approx(2.0)));
    }
  }

  TEST_CASE("split and reassemble") {
    ExpandiblePolySeries s;
    for (int j = 0; j < 3; ++j) {
      SeriesTerm t;
      t.mu = j + 1.0;
      t.coeffs = CMat::Constant(1, 2, Complex(j + 1.0, -0.5 * j));
      s.terms.push_back(t);
    }
    const Complex S(1.5, -0.2);
    auto [minus, plus] = split_series(s, S, 3);
    CHECK(plus.terms.empty());
    auto p0 = split_series(s, S, 0);
    CHECK(p0.first.terms.empty());
    auto p1 = split_series(s, S, 1);
    CHECK(p1.first.terms.size() == 1);
    CHECK(p1.second.terms.size() == 2);
    const auto back = reassemble(p1.first, p1.second);
    REQUIRE(back.terms.size() == s.terms.size());
    for (std::size_t j = 0; j < s.terms.size(); ++j) {
      CHECK(back.terms[j].mu == s.terms[j].mu);
      CHECK(back.terms[j].coeffs == s.terms[j].coeffs);
    }
  }

  TEST_CASE("resolvent integral closed form and quadrature") {
    auto single = [](double mu, int l, Complex b) {
      ShiftedSeries m;
      SeriesTerm t;
      t.mu = mu;
      t.coeffs = CMat::Zero(1, l + 1);
      t.coeffs(0, l) = b;
      m.terms.push_back(t);
      return m;
    };
    CHECK(std::abs(resolvent_integral(single(1.0, 0, 1.0), 1.0)[0] - 0.5) <= 1e-15);
    CHECK(std::abs(resolvent_integral(single(0.5, 1, 1.0), 0.5)[0] - 1.0) <= 1e-15);

    // adaptive Gauss-Kronrod on [0, inf) as an independent oracle
    auto quad = [](const std::function<Complex(double)>& f) {
      using boost::math::quadrature::gauss_kronrod;
      auto re = [&](double t) { return f(t).real(); };
      auto im = [&](double t) { return f(t).imag(); };
      const double inf = std::numeric_limits<double>::infinity();
      return Complex(gauss_kronrod<double, 31>::integrate(re, 0.0, inf, 15, 1e-14),
                     gauss_kronrod<double, 31>::integrate(im, 0.0, inf, 15, 1e-14));
    };
    const Complex S(1.0, -1.0);
    const Complex got = resolvent_integral(single(1.0, 2, 3.0), S)[0];
    const Complex ref = quad([&](double t) { return 3.0 * t * t * std::exp(-(S + 1.0) * t); });
    CHECK(std::abs(got - 3.0 * 2.0 / std::pow(Complex(2.0, -1.0), 3)) <= 1e-14);
    CHECK(std::abs(got - ref) <= 1e-9 * std::abs(ref));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int draw = 0; draw < 10; ++draw) {
      ShiftedSeries m;
      const Complex Sd(0.2 + 0.5 * (u(rng) + 1.0), 2.0 * u(rng));
      for (int j = 0; j < 3; ++j) {
        SeriesTerm t;
        t.mu = 0.5 * j;
        t.coeffs = CMat(1, 3);
        for (int l = 0; l < 3; ++l) t.coeffs(0, l) = Complex(u(rng), u(rng));
        m.terms.push_back(t);
      }
      const Complex val = resolvent_integral(m, Sd)[0];
      const Complex q = quad([&](double t) {
        Complex s = 0.0;
        for (const auto& term : m.terms)
          for (int l = 0; l < 3; ++l) s += term.coeffs(0, l) * std::pow(t, l) * std::exp(-(Sd + term.mu) * t);
        return s;
      });
      CHECK(std::abs(val - q) <= 1e-9 * std::max(1.0, std::abs(q)));
    }
  }

  TEST_CASE("exponential extrapolation") {
    std::vector<double> t;
    std::vector<CVec> v;
    for (int k = 0; k < 6; ++k) {
      t.push_back(2.0 + k);
      CVec x(1);
      x[0] = 3.0 + 0.7 * std::exp(-0.5 * t.back()) - 0.2 * std::exp(-1.0 * t.back());
      v.push_back(x);
    }
    const auto e = extrapolate_exponential(t, v, 0.5);
    CHECK(std::abs(e.limit[0] - 3.0) <= 1e-10);
  }

  TEST_CASE("default truncation depth") {
    const auto mu = mu_ladder(vec({1.0, 2.0}), 10.0);
    const int J1 = default_J1(mu, 1.0, vec({1.0, 2.0}));
    CHECK(mu[static_cast<std::size_t>(J1)] > 1.0 + 1.5);
    CHECK(mu[static_cast<std::size_t>(J1 - 1)] <= 1.0 + 1.5);
  }
}

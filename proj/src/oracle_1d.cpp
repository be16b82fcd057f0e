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

#include "saddle/oracle_1d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "saddle/errors.hpp"
#include "saddle/ode.hpp"

namespace saddle {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

double wrap_angle(double a) { return std::remainder(a, 2.0 * kPi); }

}  // namespace

Complex WkbBranch::beta() const { return -0.5 + static_cast<double>(direction) * kI * z / (lambda * h); }

std::array<Complex, 2> WkbBranch::evaluate(double x, double* truncation) const {
  if (x == 0.0) throw ValidationError("WKB branch evaluated at x = 0");
  const double s = std::abs(x);
  const double kap = direction * lambda / (4.0 * h);
  const Complex b = beta();
  // sum a_k s^{-2k} and its s-derivative, a_0 = 1
  Complex a = 1.0, sum = 0.0, dsum = 0.0;
  double last = 0.0, next = 0.0;
  for (int k = 0; k < 80; ++k) {
    const Complex term = a * std::pow(s, -2.0 * k);
    const double mag = std::abs(term);
    if (k > 1 && (mag > last || mag < 1e-18 * std::abs(sum))) {
      next = mag;
      break;
    }
    sum += term;
    dsum += (b - 2.0 * k) * term / s;
    last = mag;
    a *= (b - 2.0 * k) * (b - 2.0 * k - 1.0) / (8.0 * kI * kap * (k + 1.0));
    next = std::abs(a * std::pow(s, -2.0 * (k + 1)));
  }
  if (truncation) *truncation = next / std::abs(sum);
  const Complex pref =
      std::exp(kI * kap * s * s + kI * (lambda / (4.0 * h)) * epsilon * epsilon + b * std::log(s / epsilon));
  const Complex u = pref * sum;
  const Complex du_ds = pref * (2.0 * kI * kap * s * sum + dsum);
  return {u, x > 0.0 ? du_ds : -du_ds};
}

Complex WkbBranch::leading(double x) const {
  if (x == 0.0) throw ValidationError("WKB branch evaluated at x = 0");
  const double s = std::abs(x);
  const double k = lambda / (4.0 * h);
  return std::exp(kI * (direction * k * s * s + k * epsilon * epsilon) + beta() * std::log(s / epsilon));
}

namespace {

struct RawConnection {
  Complex A, B;
  double residual = 0.0;
  std::vector<Complex> eval_u;  // unnormalised
};

RawConnection integrate_connection(double lambda, Complex z, double h, double epsilon, double X0,
                                   double tol, const std::vector<double>& eval_points) {
  const WkbBranch out{lambda, z, h, epsilon, +1};
  const WkbBranch in{lambda, z, h, epsilon, -1};
  const auto seed = out.evaluate(-X0);

  const double delta = std::min(1.0, 0.1 * X0);
  std::vector<double> times;
  for (double x : eval_points) times.push_back(x);
  const int nmatch = 5;
  for (int j = nmatch - 1; j >= 0; --j) times.push_back(X0 - j * delta / (nmatch - 1));
  std::vector<std::size_t> order(times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  std::vector<double> sorted;
  for (std::size_t i : order) sorted.push_back(times[i]);

  const double h2 = h * h;
  OdeRhs rhs = [&](const OdeState& s, OdeState& ds, double x) {
    const Complex u(s[0], s[1]);
    const Complex k2 = -(0.25 * lambda * lambda * x * x + z) / h2;
    const Complex upp = k2 * u;
    ds[0] = s[2];
    ds[1] = s[3];
    ds[2] = upp.real();
    ds[3] = upp.imag();
  };
  OdeState s0{seed[0].real(), seed[0].imag(), seed[1].real(), seed[1].imag()};
  OdeOptions opt;
  opt.abs_tol = tol * std::abs(seed[0]);
  opt.rel_tol = tol;
  opt.initial_step = 1e-3 * h;
  const auto states = integrate_ode(rhs, s0, -X0, sorted, opt);

  std::vector<Complex> u(times.size()), du(times.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    u[order[j]] = Complex(states[j][0], states[j][1]);
    du[order[j]] = Complex(states[j][2], states[j][3]);
  }

  const std::size_t m0 = eval_points.size();
  CMat M(2 * nmatch, 2);
  CVec r(2 * nmatch);
  for (int j = 0; j < nmatch; ++j) {
    const double x = times[m0 + j];
    const double w = 1.0 / (lambda * x / (2.0 * h));  // derivative rows to the scale of u
    const auto wi = in.evaluate(x);
    const auto wo = out.evaluate(x);
    M(2 * j, 0) = wi[0];
    M(2 * j, 1) = wo[0];
    r[2 * j] = u[m0 + j];
    M(2 * j + 1, 0) = w * wi[1];
    M(2 * j + 1, 1) = w * wo[1];
    r[2 * j + 1] = w * du[m0 + j];
  }
  const CVec c = M.colPivHouseholderQr().solve(r);
  RawConnection rc;
  rc.A = c[0];
  rc.B = c[1];
  rc.residual = (M * c - r).norm() / r.norm();
  rc.eval_u.assign(u.begin(), u.begin() + static_cast<long>(m0));
  return rc;
}

}  // namespace

ConnectionResult weber_connection(double lambda, Complex z, double h, double epsilon, double X0,
                                  double tol, const std::vector<double>& eval_points,
                                  bool estimate_error) {
  if (!(lambda > 0.0)) throw ValidationError("weber_connection: lambda must be positive");
  if (!(h > 0.0)) throw ValidationError("weber_connection: h must be positive");
  if (!(epsilon > 0.0)) throw ValidationError("weber_connection: epsilon must be positive");
  const double floor = 5.0 * std::max(std::sqrt(h), epsilon);
  if (X0 == 0.0) X0 = std::max(10.0, floor);
  if (X0 < floor) throw ValidationError("weber_connection: X0 must be >= 5 max(sqrt(h), epsilon)");
  if (!(tol > 0.0)) throw ValidationError("weber_connection: tol must be positive");
  for (double x : eval_points)
    if (!(std::abs(x) < X0 - std::min(1.0, 0.1 * X0)))
      throw ValidationError("weber_connection: evaluation point outside the integration range");

  const RawConnection rc = integrate_connection(lambda, z, h, epsilon, X0, tol, eval_points);
  if (rc.residual > 1e-6) {
    std::ostringstream os;
    os << "weber_connection: insufficient X0/tol (matching residual " << rc.residual << ")";
    throw NumericalError(os.str(), rc.residual);
  }
  ConnectionResult res;
  res.incoming_amplitude = rc.A;
  res.outgoing_amplitudes = {rc.B, 1.0};
  res.X0 = X0;
  res.matching_residual = rc.residual;
  res.eval_x = eval_points;
  for (const Complex& u : rc.eval_u) res.eval_u.push_back(u / rc.A);
  if (estimate_error) {
    const ConnectionResult fine =
        weber_connection(lambda, z, h, epsilon, 2.0 * X0, 0.5 * tol, eval_points, false);
    double err = std::max(std::abs(fine.transmission() - res.transmission()),
                          std::abs(fine.reflection() - res.reflection()));
    for (std::size_t j = 0; j < res.eval_u.size(); ++j)
      err = std::max(err, std::abs(fine.eval_u[j] - res.eval_u[j]) / std::abs(res.eval_u[j]));
    res.estimated_error = err;
  }
  return res;
}

TransitionComparison compare_transition(const TransitionScenario& scenario,
                                        const std::vector<Complex>& z_list,
                                        const std::vector<double>& h_list, double x_eval) {
  if (scenario.dim() != 1) throw ValidationError("compare_transition: scenario must be one-dimensional");
  if (scenario.model.kind() != ModelKind::schrodinger_barrier || scenario.model.perturbation_scale() > 0.0)
    throw ValidationError("compare_transition: the oracle needs the unperturbed barrier model");
  if (!(x_eval < 0.0)) throw ValidationError("compare_transition: x_eval must lie on the transmitted side");
  if (z_list.empty() || h_list.empty()) throw ValidationError("compare_transition: empty sweep");
  const double lambda = scenario.model.lambda1();
  const Vec xv = Vec::Constant(1, x_eval);
  TransitionComparison out;
  for (const Complex& z : z_list) {
    for (double h : h_list) {
      TransitionComparisonRow row;
      row.z = z;
      row.h = h;
      row.x_eval = x_eval;
      const ResonanceLattice lat =
          gamma0_lattice(scenario.model.lambdas(), h, std::abs(z) + 2.0 * lambda * h);
      row.near_lattice = distance_to_lattice(z, lat) <= scenario.nu * h;
      const ConnectionResult oc = weber_connection(lambda, z, h, scenario.epsilon, 0.0, 1e-12, {x_eval});
      row.transmission_probability = oc.transmission_probability();
      row.oracle_error = oc.estimated_error;
      const Complex w_lead = WkbBranch{lambda, z, h, scenario.epsilon, +1}.leading(x_eval);
      row.u_oracle = oc.eval_u[0];
      row.abs_oracle = std::abs(row.u_oracle / w_lead);
      row.abs_T_asymptotic = std::abs(oc.transmission());
      try {
        row.u_J = apply_J(scenario, CauchyData::point(1.0), {xv}, z, h)[0];
        row.abs_J = std::abs(row.u_J / w_lead);
        row.rel_err_modulus = std::abs(row.abs_J - row.abs_oracle) / row.abs_oracle;
        row.coeff_rel_err = std::abs(row.abs_J - row.abs_T_asymptotic) / row.abs_T_asymptotic;
      } catch (const PoleError& e) {
        row.excluded = true;
        row.note = e.what();
      }
      out.rows.push_back(row);
    }
  }
  Complex mean = 0.0;
  for (const auto& r : out.rows)
    if (!r.excluded) mean += r.u_J / r.u_oracle / std::abs(r.u_J / r.u_oracle);
  out.phase_constant = std::arg(mean);
  for (auto& r : out.rows)
    if (!r.excluded) r.phase_err = wrap_angle(std::arg(r.u_J / r.u_oracle) - out.phase_constant);

  for (const Complex& z : z_list) {
    std::vector<double> lx, ly;
    for (const auto& r : out.rows)
      if (r.z == z && !r.excluded && r.rel_err_modulus > 0.0) {
        lx.push_back(std::log(r.h));
        ly.push_back(std::log(r.rel_err_modulus));
      }
    if (lx.size() < 2) continue;
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i] / n;
      my += ly[i] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    out.slope_z.push_back(z);
    out.slopes.push_back(sxx > 0.0 ? sxy / sxx : 0.0);
  }
  return out;
}

ScaledResonances scaled_resonances_detail(double lambda, double h, int count, int grid_size) {
  if (!(lambda > 0.0)) throw ValidationError("scaled_resonances: lambda must be positive");
  if (!(h > 0.0)) throw ValidationError("scaled_resonances: h must be positive");
  if (count < 1 || count > 10) throw ValidationError("scaled_resonances: count must be in 1..10");
  if (grid_size < 1000) throw ValidationError("scaled_resonances: grid_size must be >= 1000");
  ScaledResonances res;
  res.grid_size = grid_size;
  // outer turning point of the highest requested state plus a Gaussian tail of e^{-40}
  res.X = 2.0 * std::sqrt(4.0 * h * (count + 1.0) / lambda) + std::sqrt(160.0 * h / lambda);

  auto levels = [&](int intervals) {
    const int n = intervals - 1;
    const double dx = 2.0 * res.X / intervals;
    Vec diag(n), sub(n - 1);
    for (int i = 0; i < n; ++i) {
      const double y = -res.X + (i + 1) * dx;
      diag[i] = 2.0 * h * h / (dx * dx) + 0.25 * lambda * lambda * y * y;
    }
    sub.setConstant(-h * h / (dx * dx));
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    return Vec(es.eigenvalues().head(count));
  };
  const Vec e1 = levels(grid_size), e2 = levels(2 * grid_size), e4 = levels(4 * grid_size);
  const Vec r1 = (4.0 * e2 - e1) / 3.0;
  const Vec r2 = (4.0 * e4 - e2) / 3.0;
  for (int k = 0; k < count; ++k) {
    const double change = std::abs(r2[k] - r1[k]) / std::abs(r2[k]);
    res.change.push_back(change);
    if (change > 1e-4) {
      std::ostringstream os;
      os << "scaled_resonances: discretisation not converged (level " << k << " moves by " << change
         << " under grid doubling)";
      throw NumericalError(os.str(), change);
    }
    // the scaled operator is -i times the harmonic oscillator
    res.values.push_back(-kI * r2[k]);
  }
  return res;
}

std::vector<Complex> scaled_resonances(double lambda, double h, int count, int grid_size) {
  return scaled_resonances_detail(lambda, h, count, grid_size).values;
}

}  // namespace saddle

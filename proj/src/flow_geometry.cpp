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

#include "saddle/flow_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "saddle/asymptotics.hpp"
#include "saddle/errors.hpp"

namespace saddle {

namespace {

constexpr double kEscapeSlack = 0.05;

// State layout: x (d), xi (d), tangents (2d x k, column major), action.
OdeRhs hamiltonian_rhs(const HamiltonianModel& model, int k) {
  const int d = model.dim();
  return [&model, d, k](const OdeState& s, OdeState& ds, double) {
    const Eigen::Map<const Vec> x(s.data(), d);
    const Eigen::Map<const Vec> xi(s.data() + d, d);
    const Vec g = model.grad_p0(x, xi);
    for (int i = 0; i < d; ++i) {
      ds[i] = g[d + i];
      ds[d + i] = -g[i];
    }
    if (k > 0) {
      const Mat H = model.hess_p0(x, xi);
      Mat F(2 * d, 2 * d);
      F.topRows(d) = H.bottomRows(d);
      F.bottomRows(d) = -H.topRows(d);
      const Eigen::Map<const Mat> M(s.data() + 2 * d, 2 * d, k);
      Eigen::Map<Mat> dM(ds.data() + 2 * d, 2 * d, k);
      dM = F * M;
    }
    ds[2 * d + 2 * d * k] = xi.dot(g.tail(d));
  };
}

OdeState pack(const PhasePoint& p, const Mat& tangents) {
  const int d = static_cast<int>(p.dim());
  const int k = static_cast<int>(tangents.cols());
  OdeState s(2 * d + 2 * d * k + 1, 0.0);
  for (int i = 0; i < d; ++i) {
    s[i] = p.x[i];
    s[d + i] = p.xi[i];
  }
  if (k > 0) Eigen::Map<Mat>(s.data() + 2 * d, 2 * d, k) = tangents;
  return s;
}

PhasePoint unpack_point(const OdeState& s, int d) {
  return {Eigen::Map<const Vec>(s.data(), d), Eigen::Map<const Vec>(s.data() + d, d)};
}

void check_point(const HamiltonianModel& model, const PhasePoint& p) {
  if (p.x.size() != model.dim() || p.xi.size() != model.dim())
    throw ValidationError("phase point dimension does not match the model");
  if (!p.x.allFinite() || !p.xi.allFinite()) throw ValidationError("non-finite phase point");
}

OdeOptions flow_options(double tol) {
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  OdeOptions o;
  o.abs_tol = tol;
  o.rel_tol = tol;
  return o;
}

void check_energy(const HamiltonianModel& model, const PhasePoint& a, const PhasePoint& b,
                  double tol) {
  const double drift = std::abs(model.p0(a) - model.p0(b));
  const double scale = 1.0 + std::abs(model.p0(a));
  if (drift > 100.0 * tol * scale) {
    std::ostringstream os;
    os << "energy drift " << drift << " exceeds 100*tol";
    throw NumericalError(os.str(), drift);
  }
}

}  // namespace

double TrajectorySample::energy_drift() const {
  double m = 0.0;
  for (double e : energies) m = std::max(m, std::abs(e - energies.front()));
  return m;
}

double TrajectorySample::max_symplectic_defect() const {
  double m = 0.0;
  for (const Mat& j : jacobians) m = std::max(m, symplectic_defect(j));
  return m;
}

CarriedFlow flow_carrying(const HamiltonianModel& model, const PhasePoint& start, double t,
                          const Mat& tangents, const OdeOptions& options, bool monitor) {
  check_point(model, start);
  const int d = model.dim();
  const int k = static_cast<int>(tangents.cols());
  OdeMonitor mon;
  if (monitor)
    mon = [&model, d](const OdeState& s, double) {
      return model.in_validity(Eigen::Map<const Vec>(s.data(), d), kEscapeSlack);
    };
  const OdeState end = integrate_ode_to(hamiltonian_rhs(model, k), pack(start, tangents), 0.0, t,
                                        options, mon);
  CarriedFlow out;
  out.end = unpack_point(end, d);
  if (k > 0) out.tangents = Eigen::Map<const Mat>(end.data() + 2 * d, 2 * d, k);
  out.action = end.back();
  return out;
}

PhasePoint flow(const HamiltonianModel& model, const PhasePoint& point, double t, double tol) {
  const CarriedFlow f = flow_carrying(model, point, t, Mat(), flow_options(tol));
  check_energy(model, point, f.end, tol);
  return f.end;
}

std::pair<PhasePoint, Mat> flow_with_jacobian(const HamiltonianModel& model,
                                              const PhasePoint& point, double t, double tol) {
  const int d = model.dim();
  const CarriedFlow f =
      flow_carrying(model, point, t, Mat::Identity(2 * d, 2 * d), flow_options(tol));
  check_energy(model, point, f.end, tol);
  return {f.end, f.tangents};
}

TrajectorySample trajectory(const HamiltonianModel& model, const PhasePoint& point,
                            const std::vector<double>& times, double tol, bool with_jacobian) {
  check_point(model, point);
  const int d = model.dim();
  const int k = with_jacobian ? 2 * d : 0;
  const Mat tangents = with_jacobian ? Mat(Mat::Identity(2 * d, 2 * d)) : Mat();
  OdeMonitor mon = [&model, d](const OdeState& s, double) {
    return model.in_validity(Eigen::Map<const Vec>(s.data(), d), kEscapeSlack);
  };
  const auto states = integrate_ode(hamiltonian_rhs(model, k), pack(point, tangents), 0.0, times,
                                    flow_options(tol), mon);
  TrajectorySample out;
  out.times = times;
  for (const OdeState& s : states) {
    out.points.push_back(unpack_point(s, d));
    out.energies.push_back(model.p0(out.points.back()));
    if (with_jacobian) out.jacobians.emplace_back(Eigen::Map<const Mat>(s.data() + 2 * d, 2 * d, k));
  }
  if (!out.points.empty()) check_energy(model, point, out.points.back(), tol);
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(ChartKind kind) {
  switch (kind) {
    case ChartKind::phi_plus: return "phi_plus";
    case ChartKind::phi_minus: return "phi_minus";
    case ChartKind::psi_eta: return "psi_eta";
    case ChartKind::lambda0: return "lambda0";
    case ChartKind::phase_family_slice: return "phase_family_slice";
  }
  return "unknown";
}

double LagrangianChart::value(const Vec& x) const {
  double v = 0.0;
  evaluate(x, &v, nullptr, nullptr);
  return v;
}

Vec LagrangianChart::gradient(const Vec& x) const {
  Vec g;
  evaluate(x, nullptr, &g, nullptr);
  return g;
}

Mat LagrangianChart::hessian(const Vec& x) const {
  Mat h;
  evaluate(x, nullptr, nullptr, &h);
  return h;
}

QuadraticChart::QuadraticChart(ChartKind kind, Box domain, Mat B, Vec g, double c)
    : LagrangianChart(kind, std::move(domain)), B_(std::move(B)), g_(std::move(g)), c_(c) {
  if (g_.size() == 0) g_ = Vec::Zero(B_.rows());
}

void QuadraticChart::evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const {
  const Vec Bx = B_ * x;
  if (value) *value = c_ + g_.dot(x) + 0.5 * x.dot(Bx);
  if (grad) *grad = g_ + Bx;
  if (hess) *hess = B_;
}

PolynomialChart::PolynomialChart(ChartKind kind, Box domain, Mat B, Polynomial remainder)
    : LagrangianChart(kind, std::move(domain)), B_(std::move(B)), remainder_(std::move(remainder)) {
  w_ = this->domain().half_width();
  if ((this->domain().center().array().abs() > 1e-12 * (1.0 + w_.array())).any())
    throw ValidationError("PolynomialChart: domain must be centred at the origin");
}

void PolynomialChart::evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const {
  const Vec u = x.cwiseQuotient(w_);
  double rv = 0.0;
  Vec rg;
  Mat rh;
  remainder_.evaluate(u, value ? &rv : nullptr, grad ? &rg : nullptr, hess ? &rh : nullptr);
  const Vec Bx = B_ * x;
  if (value) *value = 0.5 * x.dot(Bx) + rv;
  if (grad) *grad = Bx + rg.cwiseQuotient(w_);
  if (hess) {
    const Vec iw = w_.cwiseInverse();
    *hess = B_ + iw.asDiagonal() * rh * iw.asDiagonal();
  }
}

// ---------------------------------------------------------------------------

ManifoldPoint shoot_manifold_point(const HamiltonianModel& model, const Linearization& lin,
                                   int sign, const Vec& x, double seed_radius, double flow_tol) {
  const int d = model.dim();
  const Mat& B = sign > 0 ? lin.B_plus : lin.B_minus;
  const Mat& A = sign > 0 ? lin.A_plus : lin.A_minus;
  ManifoldPoint out;
  const double r = x.norm();
  if (r <= seed_radius) {
    out.value = 0.5 * x.dot(B * x);
    out.gradient = B * x;
    return out;
  }
  const double tau = sign * std::log(r / seed_radius) / model.lambda1();
  Vec y = (Mat(-A * tau)).exp() * x;
  Mat U(2 * d, d);
  U << Mat::Identity(d, d), B;
  OdeOptions opt = flow_options(flow_tol);
  CarriedFlow f;
  double res = 0.0;
  for (int it = 0; it < 30; ++it) {
    f = flow_carrying(model, {y, B * y}, tau, U, opt, false);
    const Vec F = f.end.x - x;
    res = F.norm();
    out.newton_iterations = it + 1;
    if (res <= 1e-13 * (1.0 + r)) break;
    const Mat J = f.tangents.topRows(d);
    Eigen::FullPivLU<Mat> lu(J);
    if (lu.rank() < d || std::abs(lu.determinant()) < 1e-300) {
      std::ostringstream os;
      os << "fold of the manifold over x-space near x = " << x.transpose();
      throw NumericalError(os.str());
    }
    y -= lu.solve(F);
    if (it == 29) throw NumericalError("shooting did not converge", res);
  }
  out.value = 0.5 * y.dot(B * y) + f.action;
  out.gradient = f.end.xi;
  return out;
}

namespace {

// Values T_n(u) and derivatives T_n'(u) for n = 0..N.
void chebyshev_with_derivative(double u, int N, std::vector<double>& T, std::vector<double>& dT) {
  T.assign(N + 1, 0.0);
  dT.assign(N + 1, 0.0);
  std::vector<double> U(N + 1, 0.0);  // second kind
  T[0] = 1.0;
  U[0] = 1.0;
  if (N >= 1) {
    T[1] = u;
    U[1] = 2.0 * u;
  }
  for (int n = 2; n <= N; ++n) {
    T[n] = 2.0 * u * T[n - 1] - T[n - 2];
    U[n] = 2.0 * u * U[n - 1] - U[n - 2];
  }
  for (int n = 1; n <= N; ++n) dT[n] = n * U[n - 1];
}

}  // namespace

FittedChart::FittedChart(ChartKind kind, Box domain, Polynomial q)
    : LagrangianChart(kind, std::move(domain)), q_(std::move(q)) {
  c_ = this->domain().center();
  w_ = this->domain().half_width();
}

void FittedChart::evaluate(const Vec& x, double* value, Vec* grad, Mat* hess) const {
  const Vec u = (x - c_).cwiseQuotient(w_);
  Vec g;
  Mat h;
  q_.evaluate(u, value, grad ? &g : nullptr, hess ? &h : nullptr);
  if (grad) *grad = g.cwiseQuotient(w_);
  if (hess) {
    const Vec iw = w_.cwiseInverse();
    *hess = iw.asDiagonal() * h * iw.asDiagonal();
  }
}

Polynomial hermite_fit(const Box& box, const ChartSampler& sampler, int degree, int nodes_per_dim,
                       double* max_residual) {
  const int d = static_cast<int>(box.dim());
  if (degree < 2) throw ValidationError("fit degree must be >= 2");
  const Vec c = box.center();
  const Vec w = box.half_width();
  const int N = degree;
  const int n = nodes_per_dim > 0 ? nodes_per_dim : N + 4;
  const auto nodes = chebyshev_nodes(n);
  const auto exps = total_degree_exponents(d, 0, N);
  const int ncol = static_cast<int>(exps.size());
  long npts = 1;
  for (int i = 0; i < d; ++i) npts *= n;
  if (npts * (d + 1) < ncol) throw ValidationError("too few fit nodes for the requested degree");

  Mat A(npts * (d + 1), ncol);
  Vec rhs(npts * (d + 1));
  std::vector<std::vector<double>> T(d), dT(d);
  for (long p = 0; p < npts; ++p) {
    long q = p;
    Vec u(d);
    for (int i = 0; i < d; ++i) {
      u[i] = nodes[q % n];
      q /= n;
      chebyshev_with_derivative(u[i], N, T[i], dT[i]);
    }
    const ChartSample smp = sampler(c + u.cwiseProduct(w));
    const long row = p * (d + 1);
    rhs[row] = smp.value;
    const Vec gr = smp.gradient.cwiseProduct(w);
    for (int i = 0; i < d; ++i) rhs[row + 1 + i] = gr[i];
    for (int k = 0; k < ncol; ++k) {
      double v = 1.0;
      for (int i = 0; i < d; ++i) v *= T[i][exps[k][i]];
      A(row, k) = v;
      for (int j = 0; j < d; ++j) {
        double dv = 1.0;
        for (int i = 0; i < d; ++i) dv *= (i == j) ? dT[i][exps[k][i]] : T[i][exps[k][i]];
        A(row + 1 + j, k) = dv;
      }
    }
  }
  const Vec coef = A.colPivHouseholderQr().solve(rhs);
  if (max_residual) *max_residual = (A * coef - rhs).cwiseAbs().maxCoeff();

  const Mat table = chebyshev_to_monomial_table(N);
  Polynomial out(d);
  for (const auto& beta : exps) {
    double sum = 0.0;
    for (int a = 0; a < ncol; ++a) {
      double t = coef[a];
      for (int i = 0; i < d; ++i) {
        if (beta[i] > exps[a][i]) {
          t = 0.0;
          break;
        }
        t *= table(exps[a][i], beta[i]);
      }
      sum += t;
    }
    if (sum != 0.0) out.add_term(beta, sum);
  }
  return out;
}

ChartPtr fit_chart(ChartKind kind, const Box& box, const ChartSampler& sampler, int degree,
                   int nodes_per_dim) {
  double res = 0.0;
  Polynomial q = hermite_fit(box, sampler, degree, nodes_per_dim, &res);
  auto chart = std::make_shared<FittedChart>(kind, box, std::move(q));
  chart->set_fit_residual(res);
  return chart;
}

ChartPtr manifold_generating_function(const HamiltonianModel& model, int sign, const Box& domain,
                                      const ChartOptions& options) {
  if (sign != 1 && sign != -1) throw ValidationError("sign must be +1 or -1");
  const int d = model.dim();
  if (domain.dim() != d) throw ValidationError("domain dimension does not match the model");
  if ((domain.hi.array() <= domain.lo.array()).any()) throw ValidationError("empty domain");
  if (!model.in_validity(domain.lo, 1e-12) || !model.in_validity(domain.hi, 1e-12))
    throw ValidationError("chart domain exceeds the validity neighbourhood");
  if (!domain.contains(Vec::Zero(d))) throw ValidationError("chart domain must contain the origin");

  const Linearization lin = linearize(model);
  const ChartKind kind = sign > 0 ? ChartKind::phi_plus : ChartKind::phi_minus;
  const Mat& B = sign > 0 ? lin.B_plus : lin.B_minus;

  const bool quadratic = model.separable() && model.perturbation().empty();
  if (quadratic) {
    auto chart = std::make_shared<QuadraticChart>(kind, domain, B);
    chart->set_base_point({Vec::Zero(d), Vec::Zero(d)});
    chart->set_fit_residual(invariance_residual(model, *chart));
    return chart;
  }

  // The remainder is fitted on the symmetric hull of the domain; its terms of
  // degree <= 2 are dropped so that the exact quadratic part is kept at 0.
  const Vec w = domain.lo.cwiseAbs().cwiseMax(domain.hi.cwiseAbs());
  const Box fit_box{-w, w};
  const double seed = options.seed_fraction * w.norm();
  ChartSampler sampler = [&](const Vec& x) {
    const ManifoldPoint mp = shoot_manifold_point(model, lin, sign, x, seed, options.flow_tol);
    return ChartSample{mp.value - 0.5 * x.dot(B * x), mp.gradient - B * x};
  };
  double ls_res = 0.0;
  const Polynomial full = hermite_fit(fit_box, sampler, options.degree, options.nodes_per_dim,
                                      &ls_res);
  Polynomial rem(d);
  for (const Monomial& m : full.terms()) {
    int deg = 0;
    for (int e : m.exponents) deg += e;
    if (deg >= 3) rem.add_term(m.exponents, m.coeff);
  }
  auto chart = std::make_shared<PolynomialChart>(kind, fit_box, B, rem);
  chart->set_base_point({Vec::Zero(d), Vec::Zero(d)});
  const double inv = invariance_residual(model, *chart);
  chart->set_fit_residual(std::max(inv, ls_res));
  if (inv > options.tol) {
    std::ostringstream os;
    os << "invariance residual " << inv << " exceeds tolerance " << options.tol;
    throw NumericalError(os.str(), inv);
  }
  return chart;
}

double invariance_residual(const HamiltonianModel& model, const LagrangianChart& chart,
                           int points_per_dim) {
  const int d = chart.dim();
  const Box& box = chart.domain();
  const int n = std::max(2, points_per_dim);
  long npts = 1;
  for (int i = 0; i < d; ++i) npts *= n;
  double worst = 0.0;
  for (long p = 0; p < npts; ++p) {
    long q = p;
    Vec x(d);
    for (int i = 0; i < d; ++i) {
      const int k = static_cast<int>(q % n);
      q /= n;
      x[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * k / (n - 1);
    }
    worst = std::max(worst, std::abs(model.p0(x, chart.gradient(x))));
  }
  return worst;
}

// ---------------------------------------------------------------------------

double ladder_gap(const Vec& lambdas) {
  const double l1 = lambdas.minCoeff();
  double mu2 = 2.0 * l1;
  for (Eigen::Index j = 0; j < lambdas.size(); ++j)
    if (lambdas[j] > l1 * (1.0 + 1e-12)) mu2 = std::min(mu2, lambdas[j]);
  return mu2 - l1;
}

Mat leading_projector(const Mat& A, double lambda1) {
  Eigen::EigenSolver<Mat> es(A);
  const CMat V = es.eigenvectors();
  const CMat Vinv = V.inverse();
  const CVec mu = es.eigenvalues();
  CMat P = CMat::Zero(A.rows(), A.cols());
  for (Eigen::Index j = 0; j < mu.size(); ++j)
    if (std::abs(std::abs(mu[j]) - lambda1) <= 1e-8 * lambda1) P += V.col(j) * Vinv.row(j);
  return P.real();
}

RayResult manifold_ray(const HamiltonianModel& model, const LagrangianChart& chart, int sign,
                       const Vec& x0, const RayOptions& options) {
  if (sign != 1 && sign != -1) throw ValidationError("sign must be +1 or -1");
  const int d = model.dim();
  if (x0.size() != d) throw ValidationError("ray start has wrong dimension");
  if (!chart.domain().contains(x0, 1e-9)) throw ValidationError("ray start outside the chart");
  const double l1 = model.lambda1();
  const double lsum = model.lambda_sum();
  const double sigma = sign < 0 ? 1.0 : -1.0;  // dt/ds
  const int k = static_cast<int>(options.tangents.cols());
  if (k > 0 && options.tangents.rows() != 2 * d) throw ValidationError("tangents must be 2d x k");
  const bool wj = options.with_reduced_jacobian;

  RayResult out;
  out.rate = ladder_gap(model.lambdas());
  out.s_end = options.s_end > 0.0 ? options.s_end : std::min(32.0 / out.rate, 80.0 / l1);
  out.delta = std::min(1.0 / out.rate, out.s_end / 8.0);

  std::vector<double> times;
  for (double t : options.samples)
    if (t < out.s_end - (RayResult::kTail - 0.5) * out.delta) times.push_back(t);
  for (int j = RayResult::kTail - 1; j >= 0; --j) times.push_back(out.s_end - j * out.delta);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-13; }),
              times.end());
  if (times.front() < 0.0) throw ValidationError("ray sample parameters must be >= 0");

  const int off_action = d;
  const int off_trace = d + 1;
  const int off_m = d + 2;
  const int off_w = off_m + 2 * d * k;
  const int size = off_w + (wj ? d * d : 0);

  // W is carried in the eigenbasis of the linear x-dynamics with its exponential
  // rates divided out, so that det W stays O(1) over long rays
  const Linearization lin = linearize(model);
  const Mat& A = sign > 0 ? lin.A_plus : lin.A_minus;
  Mat V = Mat::Identity(d, d);
  Vec rates = Vec::Zero(d);
  if (wj) {
    Eigen::EigenSolver<Mat> es(A);
    V = es.eigenvectors().real();
    rates = sigma * es.eigenvalues().real();
  }

  const Box& dom = chart.domain();
  OdeRhs rhs = [&, sigma](const OdeState& s, OdeState& ds, double t) {
    const Eigen::Map<const Vec> y(s.data(), d);
    const double e = std::exp(-l1 * t);
    const Vec x = e * y;
    Vec xi;
    Mat Hphi;
    chart.evaluate(x, nullptr, &xi, &Hphi);
    const Vec g = model.grad_p0(x, xi);
    const Vec f = g.tail(d);
    const Vec dy = l1 * y + sigma * f / e;
    for (int i = 0; i < d; ++i) ds[i] = dy[i];
    const Mat H = model.hess_p0(x, xi);
    const Mat pxx = H.topLeftCorner(d, d);
    const Mat pxxi = H.topRightCorner(d, d);
    const Mat pxix = H.bottomLeftCorner(d, d);
    const Mat pxixi = H.bottomRightCorner(d, d);
    ds[off_action] = 0.5 * (pxixi * Hphi).trace() - 0.5 * lsum;
    ds[off_trace] = pxix.trace();
    if (k > 0) {
      Mat F(2 * d, 2 * d);
      F << pxix, pxixi, -pxx, -pxxi;
      const Eigen::Map<const Mat> M(s.data() + off_m, 2 * d, k);
      Eigen::Map<Mat>(ds.data() + off_m, 2 * d, k) = sigma * F * M;
    }
    if (wj) {
      const Eigen::Map<const Mat> W(s.data() + off_w, d, d);
      Eigen::Map<Mat>(ds.data() + off_w, d, d) =
          sigma * (pxix + pxixi * Hphi) * W - W * rates.asDiagonal();
    }
  };
  OdeMonitor mon = [&](const OdeState& s, double t) {
    const Vec x = std::exp(-l1 * t) * Eigen::Map<const Vec>(s.data(), d);
    return dom.contains(x, kEscapeSlack);
  };

  OdeState s0(size, 0.0);
  for (int i = 0; i < d; ++i) s0[i] = x0[i];
  if (k > 0) Eigen::Map<Mat>(s0.data() + off_m, 2 * d, k) = options.tangents;
  if (wj) Eigen::Map<Mat>(s0.data() + off_w, d, d) = V;

  OdeOptions opt;
  opt.abs_tol = options.tol * std::max(1e-3, x0.norm());
  opt.rel_tol = options.tol;
  opt.max_step = 0.5 / l1;
  const auto states = integrate_ode(rhs, s0, 0.0, times, opt, mon);

  for (std::size_t j = 0; j < times.size(); ++j) {
    const OdeState& s = states[j];
    RaySample r;
    r.s = times[j];
    r.y = Eigen::Map<const Vec>(s.data(), d);
    const double e = std::exp(-l1 * r.s);
    r.x = e * r.y;
    const Vec xi = chart.gradient(r.x);
    r.v_scaled = model.dxi_p0(r.x, xi) / e;
    r.action = s[off_action];
    r.trace_pxix = s[off_trace];
    if (k > 0) r.tangents = Eigen::Map<const Mat>(s.data() + off_m, 2 * d, k);
    if (wj) {
      const Eigen::Map<const Mat> Ws(s.data() + off_w, d, d);
      const Vec scale = (rates * r.s).array().exp();
      r.reduced_jacobian = Ws * scale.asDiagonal() * V.inverse();
      r.log_det_reduced = std::log(std::abs(Ws.determinant())) + rates.sum() * r.s -
                          std::log(std::abs(V.determinant()));
    }
    out.samples.push_back(std::move(r));
  }

  const Mat P = leading_projector(sign > 0 ? lin.A_plus : lin.A_minus, l1);
  std::vector<double> ts;
  std::vector<CVec> gs, as;
  for (int k = 0; k < RayResult::kTail; ++k) {
    const RaySample& r = out.tail(k);
    ts.push_back(r.s);
    gs.push_back((P * r.y).cast<Complex>());
    as.push_back(CVec::Constant(1, r.action));
  }
  const Extrapolation eg = extrapolate_exponential(ts, gs, out.rate);
  out.g1 = eg.limit.real();
  out.g1_error = eg.error + 1e-15 * out.g1.norm();
  const Extrapolation ea = extrapolate_exponential(ts, as, out.rate);
  out.action_limit = ea.limit[0].real();
  out.action_error = ea.error;
  return out;
}

Vec leading_coefficient(const HamiltonianModel& model, const LagrangianChart& chart, int sign,
                        const Vec& x, double tol) {
  RayOptions opt;
  opt.tol = tol;
  return manifold_ray(model, chart, sign, x, opt).g1;
}

FittedLeading fitted_leading_coefficient(const HamiltonianModel& model, const LagrangianChart& chart,
                                         int sign, const Vec& x, double s0, double span,
                                         int samples) {
  const double l1 = model.lambda1();
  const double L = span > 0.0 ? span : 12.0 / l1;
  RayOptions opt;
  opt.s_end = std::max(s0 + L, 4.0 / l1) + 1.0 / l1;
  for (int k = 0; k < samples; ++k) opt.samples.push_back(s0 + L * k / (samples - 1));
  const RayResult ray = manifold_ray(model, chart, sign, x, opt);
  FittedLeading out;
  std::vector<FitSample> fs;
  for (const RaySample& r : ray.samples) {
    if (r.s > s0 + L + 1e-12) break;
    out.s.push_back(r.s);
    out.x.push_back(r.x);
    fs.push_back({r.s - s0, r.x});
  }
  const ExponentLadder ladder = mu_ladder(model.lambdas(), 8.0 * l1);
  const ExpandiblePolySeries series = fit_expandible(fs, ladder, 1);
  // the lambda_1 term is never resonant, so only its constant coefficient is kept;
  // any fitted t-coefficient there is leakage from the truncated tail
  const SeriesTerm* lead = nullptr;
  for (const SeriesTerm& t : series.terms)
    if (std::abs(t.mu - l1) <= 1e-12 * l1) lead = &t;
  if (!lead) throw NumericalError("fitted_leading_coefficient: no lambda_1 term in the fit");
  out.g1 = lead->coeffs.col(0).real() * std::exp(-l1 * s0);
  out.mu1 = l1;
  out.residual_rms = series.residual_rms;
  return out;
}

}  // namespace saddle

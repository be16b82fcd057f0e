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

#include "saddle/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "saddle/errors.hpp"

namespace saddle {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::exact_quadratic: return "exact_quadratic";
    case ModelKind::schrodinger_barrier: return "schrodinger_barrier";
    case ModelKind::custom: return "custom";
  }
  return "custom";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "exact_quadratic") return ModelKind::exact_quadratic;
  if (name == "schrodinger_barrier") return ModelKind::schrodinger_barrier;
  if (name == "custom") return ModelKind::custom;
  throw ValidationError("unknown model kind '" + name + "'");
}

namespace {

Vec checked_lambdas(const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw ValidationError("lambdas: at least one exponent is required");
  std::vector<double> s = lambdas;
  for (double l : s) {
    if (!(l > 0.0) || !std::isfinite(l))
      throw ValidationError("lambdas: every exponent must be a positive finite number");
  }
  std::sort(s.begin(), s.end());
  return Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(s.size()));
}

double radius_for(const Polynomial& pert, double min_curvature) {
  if (pert.empty()) return 1.0;
  const double target = 0.5 * min_curvature;
  double lo = 0.0, hi = 1.0;
  if (pert.hessian_bound(hi) <= target) return hi;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (pert.hessian_bound(mid) <= target ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

double HamiltonianModel::p0(const Vec& x, const Vec& xi) const {
  if (custom_) return custom_->p0(x, xi);
  return (kinetic_.array() * xi.array().square()).sum() + potential_.value(x);
}

Vec HamiltonianModel::grad_p0(const Vec& x, const Vec& xi) const {
  if (custom_) return custom_->grad(x, xi);
  Vec g(2 * dim_);
  g.head(dim_) = potential_.gradient(x);
  g.tail(dim_) = 2.0 * kinetic_.array() * xi.array();
  return g;
}

Mat HamiltonianModel::hess_p0(const Vec& x, const Vec& xi) const {
  if (custom_) return custom_->hess(x, xi);
  Mat h = Mat::Zero(2 * dim_, 2 * dim_);
  h.topLeftCorner(dim_, dim_) = potential_.hessian(x);
  h.bottomRightCorner(dim_, dim_) = (2.0 * kinetic_).asDiagonal();
  return h;
}

Vec HamiltonianModel::dxi_p0(const Vec& x, const Vec& xi) const {
  if (custom_) return custom_->grad(x, xi).tail(dim_);
  return 2.0 * kinetic_.array() * xi.array();
}

Vec HamiltonianModel::dx_p0(const Vec& x, const Vec& xi) const {
  if (custom_) return custom_->grad(x, xi).head(dim_);
  return potential_.gradient(x);
}

void HamiltonianModel::set_p1(Polynomial p1) {
  if (p1.dim() != dim_ && !p1.empty()) throw ValidationError("p1 has wrong dimension");
  p1_ = std::move(p1);
}

bool HamiltonianModel::in_validity(const Vec& x, double slack) const {
  return x.cwiseAbs().maxCoeff() <= radius_ * (1.0 + slack);
}

HamiltonianModel make_quadratic_model(const std::vector<double>& lambdas) {
  HamiltonianModel m;
  m.lambdas_ = checked_lambdas(lambdas);
  m.dim_ = static_cast<int>(m.lambdas_.size());
  m.kind_ = ModelKind::exact_quadratic;
  m.kinetic_ = 0.5 * m.lambdas_;
  m.potential_ = Polynomial(m.dim_);
  for (int j = 0; j < m.dim_; ++j) {
    std::vector<int> e(m.dim_, 0);
    e[j] = 2;
    m.potential_.add_term(e, -0.5 * m.lambdas_[j]);
  }
  m.perturbation_ = Polynomial(m.dim_);
  m.radius_ = 1.0;
  return m;
}

HamiltonianModel make_barrier_model(const std::vector<double>& lambdas,
                                    const std::vector<Monomial>& perturbation) {
  HamiltonianModel m;
  m.lambdas_ = checked_lambdas(lambdas);
  m.dim_ = static_cast<int>(m.lambdas_.size());
  m.kind_ = ModelKind::schrodinger_barrier;
  m.kinetic_ = Vec::Ones(m.dim_);
  for (const auto& t : perturbation) {
    if (static_cast<int>(t.exponents.size()) != m.dim_) {
      std::ostringstream os;
      os << "perturbation: exponent tuple of length " << t.exponents.size() << " for dim "
         << m.dim_;
      throw ValidationError(os.str());
    }
    int deg = 0;
    for (int e : t.exponents) {
      if (e < 0) throw ValidationError("perturbation: negative exponent");
      deg += e;
    }
    if (t.coeff != 0.0 && deg < 3)
      throw ValidationError(
          "perturbation: terms must vanish to order 3 at the origin (found total degree " +
          std::to_string(deg) + ")");
    if (deg > 6) throw ValidationError("perturbation: total degree is limited to 6");
    if (!std::isfinite(t.coeff)) throw ValidationError("perturbation: non-finite coefficient");
  }
  m.perturbation_ = Polynomial(m.dim_, perturbation);
  m.potential_ = Polynomial(m.dim_);
  for (int j = 0; j < m.dim_; ++j) {
    std::vector<int> e(m.dim_, 0);
    e[j] = 2;
    m.potential_.add_term(e, -0.25 * m.lambdas_[j] * m.lambdas_[j]);
  }
  m.potential_ = m.potential_ + m.perturbation_;
  double scale = 0.0;
  for (const auto& t : m.perturbation_.terms()) scale = std::max(scale, std::abs(t.coeff));
  m.perturbation_scale_ = scale;
  m.radius_ = radius_for(m.perturbation_, 0.5 * m.lambdas_[0] * m.lambdas_[0]);
  return m;
}

HamiltonianModel make_custom_model(const std::vector<double>& lambdas, SymbolEvaluators evaluators,
                                   double radius) {
  if (!evaluators.p0 || !evaluators.grad || !evaluators.hess)
    throw ValidationError("custom model: p0, grad and hess evaluators are all required");
  if (!(radius > 0.0)) throw ValidationError("custom model: radius must be positive");
  HamiltonianModel m;
  m.lambdas_ = checked_lambdas(lambdas);
  m.dim_ = static_cast<int>(m.lambdas_.size());
  m.kind_ = ModelKind::custom;
  m.custom_ = std::make_shared<const SymbolEvaluators>(std::move(evaluators));
  m.radius_ = radius;
  const Vec zero = Vec::Zero(m.dim_);
  if (std::abs(m.p0(zero, zero)) > 1e-12 || m.grad_p0(zero, zero).norm() > 1e-12)
    throw ValidationError("custom model: origin is not a critical point of p0");
  m.perturbation_scale_ = 0.0;
  return m;
}

Linearization linearize(const HamiltonianModel& model) {
  const int d = model.dim();
  const Vec zero = Vec::Zero(d);
  const Mat H = model.hess_p0(zero, zero);
  Linearization lin;
  lin.F.resize(2 * d, 2 * d);
  lin.F.topLeftCorner(d, d) = H.block(d, 0, d, d);
  lin.F.topRightCorner(d, d) = H.block(d, d, d, d);
  lin.F.bottomLeftCorner(d, d) = -H.block(0, 0, d, d);
  lin.F.bottomRightCorner(d, d) = -H.block(0, d, d, d);

  Eigen::EigenSolver<Mat> es(lin.F);
  if (es.info() != Eigen::Success) throw NumericalError("linearize: eigen-decomposition failed");
  const Eigen::VectorXcd ev = es.eigenvalues();
  const Eigen::MatrixXcd V = es.eigenvectors();
  const double scale = 1.0 + lin.F.norm();
  std::vector<int> order(2 * d);
  for (int i = 0; i < 2 * d; ++i) {
    order[i] = i;
    if (std::abs(ev[i].imag()) > 1e-10 * scale)
      throw NumericalError("linearize: complex eigenvalue, the fixed point is not hyperbolic",
                           std::abs(ev[i].imag()));
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ev[a].real() < ev[b].real(); });
  lin.eigenvalues.resize(2 * d);
  lin.residuals.resize(2 * d);
  lin.stable_frame.resize(2 * d, d);
  lin.unstable_frame.resize(2 * d, d);
  for (int k = 0; k < 2 * d; ++k) {
    const int i = order[k];
    lin.eigenvalues[k] = ev[i].real();
    Vec v = V.col(i).real();
    if (v.norm() < 1e-12) v = V.col(i).imag();
    v.normalize();
    lin.residuals[k] = (lin.F * v - lin.eigenvalues[k] * v).norm();
    if (lin.residuals[k] > 1e-10 * scale)
      throw NumericalError("linearize: eigen-residual above tolerance", lin.residuals[k]);
    if (k < d)
      lin.stable_frame.col(k) = v;
    else
      lin.unstable_frame.col(k - d) = v;
  }
  // reference values
  for (int j = 0; j < d; ++j) {
    const double lam = model.lambdas()[j];
    if (std::abs(lin.eigenvalues[d + j] - lam) > 1e-10 * scale ||
        std::abs(lin.eigenvalues[d - 1 - j] + lam) > 1e-10 * scale) {
      std::ostringstream os;
      os << "linearize: eigenvalues of F_p do not match the declared lambdas (found "
         << lin.eigenvalues.transpose() << ")";
      throw ValidationError(os.str());
    }
  }
  auto graph_of = [&](const Mat& frame) {
    const Mat X = frame.topRows(d);
    const Mat Xi = frame.bottomRows(d);
    Eigen::FullPivLU<Mat> lu(X);
    if (!lu.isInvertible() || lu.rcond() < 1e-12)
      throw NumericalError("linearize: invariant subspace does not project onto x-space");
    Mat B = Xi * lu.inverse();
    return Mat(0.5 * (B + B.transpose()));
  };
  // rank check of frames (defective case)
  Eigen::JacobiSVD<Mat> s1(lin.stable_frame), s2(lin.unstable_frame);
  if (s1.singularValues().minCoeff() < 1e-8 || s2.singularValues().minCoeff() < 1e-8)
    throw NumericalError("linearize: defective linearization");
  lin.B_plus = graph_of(lin.unstable_frame);
  lin.B_minus = graph_of(lin.stable_frame);
  lin.A_plus = lin.F.topLeftCorner(d, d) + lin.F.topRightCorner(d, d) * lin.B_plus;
  lin.A_minus = lin.F.topLeftCorner(d, d) + lin.F.topRightCorner(d, d) * lin.B_minus;
  return lin;
}

BranchRoots branch_roots(const HamiltonianModel& model, const Vec& x, const Vec& xi_prime) {
  const int d = model.dim();
  if (x.size() != d || xi_prime.size() != d - 1)
    throw ValidationError("branch_roots: dimension mismatch");
  if (!model.in_validity(x)) throw ValidationError("branch_roots: x outside validity neighbourhood");
  BranchRoots out;
  if (model.separable()) {
    const Vec& a = model.kinetic();
    double rest = model.potential().value(x);
    for (int j = 1; j < d; ++j) rest += a[j] * xi_prime[j - 1] * xi_prime[j - 1];
    const double rad = -rest / a[0];
    if (rad >= 0.0) {
      const double r = std::sqrt(rad);
      out.f_minus = -r;
      out.f_plus = r;
      out.real = true;
      Vec xi(d);
      xi.tail(d - 1) = xi_prime;
      xi[0] = r;
      out.residual = std::abs(model.p0(x, xi));
      xi[0] = -r;
      out.residual = std::max(out.residual, std::abs(model.p0(x, xi)));
    } else {
      const std::complex<double> r = std::sqrt(std::complex<double>(rad, 0.0));
      out.f_minus = -r;
      out.f_plus = r;
      out.real = false;
    }
    return out;
  }
  // custom symbol: Newton from the linear manifolds
  const Linearization lin = linearize(model);
  auto solve = [&](const Mat& B) {
    Vec xi(d);
    xi.tail(d - 1) = xi_prime;
    xi[0] = (B * x)[0];
    double res = 0.0;
    for (int it = 0; it < 60; ++it) {
      const double p = model.p0(x, xi);
      res = std::abs(p);
      if (res <= 1e-13) return std::pair<double, double>(xi[0], res);
      const double dp = model.dxi_p0(x, xi)[0];
      if (dp == 0.0) break;
      xi[0] -= p / dp;
    }
    throw NumericalError("branch_roots: Newton iteration did not converge", res);
  };
  const auto minus = solve(lin.B_minus);
  const auto plus = solve(lin.B_plus);
  out.f_minus = minus.first;
  out.f_plus = plus.first;
  out.residual = std::max(minus.second, plus.second);
  return out;
}

SpectralParams spectral_params(std::complex<double> z, double h, double C0, double C1, double nu,
                               const Vec& lambdas) {
  if (!(h > 0.0)) throw ValidationError("spectral_params: h must be positive");
  if (!(C0 > 0.0) || !(C1 > 0.0) || !(nu > 0.0))
    throw ValidationError("spectral_params: C0, C1 and nu must be positive");
  if (lambdas.size() == 0) throw ValidationError("spectral_params: empty lambdas");
  const double slack = 1e-12 * h;
  if (std::abs(z.real()) > C0 * h + slack || std::abs(z.imag()) > C1 * h + slack) {
    std::ostringstream os;
    os << "spectral_params: z = " << z << " outside the box [-C0 h, C0 h] + i[-C1 h, C1 h]";
    throw ValidationError(os.str());
  }
  SpectralParams sp;
  sp.h = h;
  sp.z = z;
  sp.C0 = C0;
  sp.C1 = C1;
  sp.nu = nu;
  const double half_sum = 0.5 * lambdas.sum();
  sp.S = std::complex<double>(half_sum + z.imag() / h, -z.real() / h);
  const double l1 = lambdas.minCoeff();
  sp.K1 = static_cast<int>(std::floor(C1 / l1 - half_sum / l1)) + 1;
  return sp;
}

ResonanceLattice gamma0_lattice(const Vec& lambdas, double h, double modulus_bound) {
  if (!(modulus_bound > 0.0)) throw ValidationError("gamma0_lattice: bound must be positive");
  if (!(h > 0.0)) throw ValidationError("gamma0_lattice: h must be positive");
  const int d = static_cast<int>(lambdas.size());
  for (int j = 0; j < d; ++j)
    if (!(lambdas[j] > 0.0)) throw ValidationError("gamma0_lattice: lambdas must be positive");
  ResonanceLattice lat;
  lat.h = h;
  lat.lambdas = lambdas;
  lat.bound = modulus_bound;
  const double cap = modulus_bound / h;
  std::vector<int> alpha(d, 0);
  struct Entry {
    double s;
    std::vector<int> a;
  };
  std::vector<Entry> found;
  std::function<void(int, double)> rec = [&](int j, double partial) {
    if (j == d) {
      if (partial <= cap * (1.0 + 1e-14)) found.push_back({partial, alpha});
      return;
    }
    for (int k = 0;; ++k) {
      const double s = partial + lambdas[j] * (k + 0.5);
      double rest = 0.0;
      for (int i = j + 1; i < d; ++i) rest += 0.5 * lambdas[i];
      if (s + rest > cap * (1.0 + 1e-14)) break;
      alpha[j] = k;
      rec(j + 1, s);
    }
    alpha[j] = 0;
  };
  rec(0, 0.0);
  std::stable_sort(found.begin(), found.end(), [](const Entry& a, const Entry& b) {
    if (a.s != b.s) return a.s < b.s;
    return a.a < b.a;
  });
  for (const auto& e : found) {
    lat.points.emplace_back(0.0, -h * e.s);
    lat.multi_indices.push_back(e.a);
  }
  return lat;
}

double distance_to_lattice(std::complex<double> z, const ResonanceLattice& lattice) {
  const double need = std::abs(z) + lattice.lambdas.sum() * lattice.h;
  if (lattice.bound < need)
    throw ValidationError("distance_to_lattice: lattice bound too small for this z");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : lattice.points) best = std::min(best, std::abs(z - p));
  return best;
}

std::complex<double> gamma_pole_point(const Vec& lambdas, double h, int n) {
  return {0.0, -h * (n * lambdas.minCoeff() + 0.5 * lambdas.sum())};
}

}  // namespace saddle

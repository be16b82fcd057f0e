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

#include <complex>

#include <Eigen/Dense>

namespace saddle {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// A point (x, xi) of T*R^d.
struct PhasePoint {
  Vec x;
  Vec xi;

  Eigen::Index dim() const { return x.size(); }

  Vec stacked() const {
    Vec z(2 * x.size());
    z << x, xi;
    return z;
  }

  static PhasePoint from_stacked(const Vec& z) {
    const Eigen::Index d = z.size() / 2;
    return {z.head(d), z.tail(d)};
  }
};

/// Standard symplectic matrix [[0, I], [-I, 0]].
inline Mat symplectic_form(Eigen::Index d) {
  Mat omega = Mat::Zero(2 * d, 2 * d);
  omega.topRightCorner(d, d).setIdentity();
  omega.bottomLeftCorner(d, d) = -Mat::Identity(d, d);
  return omega;
}

/// Frobenius norm of M^T Omega M - Omega.
inline double symplectic_defect(const Mat& m) {
  const Mat omega = symplectic_form(m.rows() / 2);
  return (m.transpose() * omega * m - omega).norm();
}

/// Axis-aligned box in R^d.
struct Box {
  Vec lo;
  Vec hi;

  Eigen::Index dim() const { return lo.size(); }
  Vec center() const { return 0.5 * (lo + hi); }
  Vec half_width() const { return 0.5 * (hi - lo); }
  bool contains(const Vec& x, double slack = 1e-12) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double pad = slack * (1.0 + hi[i] - lo[i]);
      if (x[i] < lo[i] - pad || x[i] > hi[i] + pad) return false;
    }
    return true;
  }
  static Box symmetric(Eigen::Index d, double radius) {
    return {Vec::Constant(d, -radius), Vec::Constant(d, radius)};
  }
};

}  // namespace saddle

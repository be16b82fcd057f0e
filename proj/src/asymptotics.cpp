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

#include "saddle/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "saddle/errors.hpp"

namespace saddle {

ExponentLadder ladder_from_generators(std::vector<double> generators, double cutoff) {
  if (!(cutoff > 0.0)) throw ValidationError("ladder cutoff must be positive");
  std::sort(generators.begin(), generators.end());
  double gmax = 0.0;
  for (double g : generators) {
    if (!(g > 0.0)) throw ValidationError("ladder generators must be positive");
    gmax = std::max(gmax, g);
  }
  const double tol = 1e-12 * std::max(1.0, gmax);
  std::vector<double> gens;
  for (double g : generators)
    if (gens.empty() || g - gens.back() > tol) gens.push_back(g);

  ExponentLadder out;
  out.generators = gens;
  out.cutoff = cutoff;
  // Dijkstra-style enumeration in increasing order. Each value is reached along many
  // paths; duplicates within tol are merged and counted.
  std::priority_queue<double, std::vector<double>, std::greater<>> heap;
  heap.push(0.0);
  while (!heap.empty()) {
    const double s = heap.top();
    heap.pop();
    if (!out.exponents.empty() && s - out.exponents.back() <= tol) continue;
    out.exponents.push_back(s);
    out.multiplicity.push_back(1);
    for (double g : gens)
      if (s + g <= cutoff + tol) heap.push(s + g);
  }
  // multiplicity: number of distinct N-combinations (counted by a small DP)
  const std::size_t n = out.exponents.size();
  std::vector<double> count(n, 0.0);
  count[0] = 1.0;
  for (double g : gens) {
    for (std::size_t i = 0; i < n; ++i) {
      if (count[i] == 0.0) continue;
      const double target = out.exponents[i] + g;
      auto it = std::lower_bound(out.exponents.begin(), out.exponents.end(), target - tol);
      if (it != out.exponents.end() && std::abs(*it - target) <= tol)
        count[static_cast<std::size_t>(it - out.exponents.begin())] += count[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) out.multiplicity[i] = static_cast<int>(count[i]);
  return out;
}

ExponentLadder mu_ladder(const Vec& lambdas, double cutoff) {
  if (!(cutoff > 0.0)) throw ValidationError("mu_ladder: cutoff must be positive");
  return ladder_from_generators(std::vector<double>(lambdas.data(), lambdas.data() + lambdas.size()),
                                cutoff);
}

ExponentLadder muhat_ladder(const ExponentLadder& mu) {
  if (mu.exponents.size() < 3)
    throw ValidationError("muhat_ladder: need at least two exponents beyond 0");
  const double mu1 = mu.exponents[1];
  std::vector<double> gens;
  for (std::size_t k = 2; k < mu.exponents.size(); ++k) gens.push_back(mu.exponents[k] - mu1);
  return ladder_from_generators(gens, mu.cutoff);
}

CVec ExpandiblePolySeries::evaluate(double t) const {
  CVec v = CVec::Zero(value_dim);
  for (const auto& term : terms) {
    CVec p = CVec::Zero(value_dim);
    for (int l = term.degree(); l >= 0; --l) p = p * t + term.coeffs.col(l);
    v += p * std::exp(-term.mu * t);
  }
  return v;
}

std::vector<double> expandible_sample_times(double t_max, int count) {
  if (count < 2 || !(t_max > 0.0)) throw ValidationError("sample times: need count >= 2, t_max > 0");
  std::vector<double> t(count);
  const double s = 3.0 / (count - 1);
  const double denom = std::expm1(s * (count - 1));
  for (int k = 0; k < count; ++k) t[k] = t_max * std::expm1(s * k) / denom;
  return t;
}

ExpandiblePolySeries fit_expandible(const std::vector<FitSample>& samples,
                                    const ExponentLadder& ladder, int max_poly_degree,
                                    const FitOptions& options) {
  if (samples.empty()) throw ValidationError("fit_expandible: no samples");
  if (max_poly_degree < 0) throw ValidationError("fit_expandible: negative polynomial degree");
  const int m = static_cast<int>(samples.front().value.size());
  double t_min = samples.front().t, t_max = samples.front().t;
  for (const auto& s : samples) {
    if (s.value.size() != m) throw ValidationError("fit_expandible: inconsistent value dimension");
    t_min = std::min(t_min, s.t);
    t_max = std::max(t_max, s.t);
  }
  // retained exponents
  std::vector<int> idx;
  for (std::size_t j = 0; j < ladder.exponents.size(); ++j) {
    const double mu = ladder.exponents[j];
    if (std::exp(-mu * (t_max - t_min)) < options.noise_floor) break;
    if (static_cast<int>(idx.size()) >= options.max_terms) break;
    idx.push_back(static_cast<int>(j));
  }
  const int nterm = static_cast<int>(idx.size());
  const int ncol = nterm * (max_poly_degree + 1);
  std::vector<double> distinct;
  for (const auto& s : samples) distinct.push_back(s.t);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (static_cast<int>(distinct.size()) < 2 * ncol) {
    std::ostringstream os;
    os << "fit_expandible: " << distinct.size() << " distinct sample times, need at least "
       << 2 * ncol;
    throw ValidationError(os.str());
  }
  double mu1 = 0.0;
  for (double mu : ladder.exponents)
    if (mu > 0.0) {
      mu1 = mu;
      break;
    }
  if (mu1 > 0.0 && (t_max - t_min) < 3.0 / mu1 * (1.0 - 1e-12))
    throw ValidationError("fit_expandible: sample window shorter than 3/mu_1");

  const int n = static_cast<int>(samples.size());
  Mat A(n, ncol);
  Mat Y(n, m);
  for (int r = 0; r < n; ++r) {
    const double t = samples[r].t;
    Y.row(r) = samples[r].value.transpose();
    for (int j = 0; j < nterm; ++j) {
      const double e = std::exp(-ladder.exponents[idx[j]] * t);
      double tp = 1.0;
      for (int l = 0; l <= max_poly_degree; ++l) {
        A(r, j * (max_poly_degree + 1) + l) = tp * e;
        tp *= t;
      }
    }
  }
  Vec scale(ncol);
  for (int c = 0; c < ncol; ++c) {
    scale[c] = A.col(c).norm();
    if (scale[c] == 0.0) scale[c] = 1.0;
    A.col(c) /= scale[c];
  }
  Eigen::JacobiSVD<Mat> svd(A);
  const Vec sv = svd.singularValues();
  const double cond = sv[0] / std::max(sv[sv.size() - 1], 1e-300);
  if (cond > options.max_condition) {
    std::ostringstream os;
    os << "fit_expandible: design matrix condition " << cond
       << " exceeds limit; use a shorter ladder or lower degree";
    throw NumericalError(os.str(), cond);
  }
  Mat X = A.colPivHouseholderQr().solve(Y);
  for (int c = 0; c < ncol; ++c) X.row(c) /= scale[c];
  // restore scaled matrix for residuals
  for (int c = 0; c < ncol; ++c) A.col(c) *= scale[c];
  const Mat R = A * X - Y;

  ExpandiblePolySeries out;
  out.value_dim = m;
  out.condition = cond;
  out.residual_rms = std::sqrt(R.squaredNorm() / std::max(1, n * m));
  double max_norm = 0.0;
  std::vector<SeriesTerm> all;
  for (int j = 0; j < nterm; ++j) {
    SeriesTerm term;
    term.mu = ladder.exponents[idx[j]];
    term.ladder_index = idx[j];
    term.coeffs = X.block(j * (max_poly_degree + 1), 0, max_poly_degree + 1, m)
                      .transpose()
                      .cast<std::complex<double>>();
    max_norm = std::max(max_norm, term.norm());
    all.push_back(term);
  }
  for (auto& term : all) {
    if (term.norm() < options.drop_relative * max_norm || term.norm() == 0.0) continue;
    // trim trailing negligible powers of t
    int deg = term.degree();
    while (deg > 0 && term.coeffs.col(deg).norm() < options.drop_relative * max_norm) --deg;
    term.coeffs = CMat(term.coeffs.leftCols(deg + 1));
    out.terms.push_back(term);
  }
  // empirical tail bound against the next unused exponent
  double mu_next = ladder.exponents.empty() ? 0.0 : ladder.exponents.back();
  if (nterm < static_cast<int>(ladder.exponents.size())) mu_next = ladder.exponents[nterm];
  double tail = 0.0;
  for (int r = 0; r < n; ++r)
    tail = std::max(tail, R.row(r).norm() * std::exp((mu_next - 0.01) * samples[r].t));
  out.tail_bound = tail;
  return out;
}

LeadingTerm leading_term(const ExpandiblePolySeries& series, int spatial_dim,
                         double expected_mu1) {
  if (series.terms.empty()) throw NumericalError("leading_term: empty series");
  const SeriesTerm* lead = nullptr;
  for (const auto& t : series.terms) {
    if (t.mu > 0.0 || series.terms.size() == 1) {
      lead = &t;
      break;
    }
  }
  if (!lead) lead = &series.terms.front();
  const Vec c0 = lead->coeffs.col(0).real();
  for (int l = 1; l <= lead->degree(); ++l) {
    if (lead->coeffs.col(l).norm() > 1e-8 * std::max(c0.norm(), 1e-300)) {
      std::ostringstream os;
      os << "leading_term: resonant leading term (polynomial of degree " << lead->degree()
         << " at mu = " << lead->mu << ")";
      throw NumericalError(os.str(), lead->coeffs.col(l).norm());
    }
  }
  LeadingTerm out;
  out.mu1 = lead->mu;
  out.leading_coefficient = c0;
  const int sd = spatial_dim < 0 ? static_cast<int>(c0.size()) : spatial_dim;
  if (!std::isnan(expected_mu1) && lead->mu > expected_mu1 * (1.0 + 1e-9)) {
    out.on_bad_set = true;
    out.gamma1 = Vec::Zero(c0.size());
    out.g1 = Vec::Zero(sd);
    return out;
  }
  out.gamma1 = c0;
  out.g1 = c0.head(sd);
  return out;
}

std::pair<ShiftedSeries, ExpandiblePolySeries> split_series(const ExpandiblePolySeries& series,
                                                            std::complex<double> S, int J1) {
  if (J1 < 0) throw ValidationError("split_series: J1 must be non-negative");
  ShiftedSeries minus;
  minus.shift = S;
  minus.value_dim = series.value_dim;
  ExpandiblePolySeries plus;
  plus.value_dim = series.value_dim;
  plus.residual_rms = series.residual_rms;
  plus.tail_bound = series.tail_bound;
  for (std::size_t k = 0; k < series.terms.size(); ++k) {
    const auto& t = series.terms[k];
    const int j = t.ladder_index >= 0 ? t.ladder_index : static_cast<int>(k);
    if (j < J1)
      minus.terms.push_back(t);
    else
      plus.terms.push_back(t);
  }
  return {minus, plus};
}

ExpandiblePolySeries reassemble(const ShiftedSeries& minus, const ExpandiblePolySeries& plus) {
  ExpandiblePolySeries out = plus;
  out.terms = minus.terms;
  out.terms.insert(out.terms.end(), plus.terms.begin(), plus.terms.end());
  std::stable_sort(out.terms.begin(), out.terms.end(),
                   [](const SeriesTerm& a, const SeriesTerm& b) { return a.mu < b.mu; });
  return out;
}

CVec resolvent_integral(const ShiftedSeries& minus_part, std::complex<double> S) {
  CVec out = CVec::Zero(minus_part.value_dim);
  for (const auto& t : minus_part.terms) {
    const std::complex<double> w = S + t.mu;
    if (std::abs(w) <= 1e-8) {
      std::ostringstream os;
      os << "resolvent_integral: S + mu_j = " << w << " is a pole";
      throw PoleError(os.str(), w, t.ladder_index);
    }
    std::complex<double> fact = 1.0;  // l!
    std::complex<double> wp = w;      // w^{l+1}
    for (int l = 0; l <= t.degree(); ++l) {
      if (l > 0) {
        fact *= static_cast<double>(l);
        wp *= w;
      }
      out += (fact / wp) * t.coeffs.col(l);
    }
  }
  return out;
}

int default_J1(const ExponentLadder& mu, double C1, const Vec& lambdas) {
  const double target = C1 + 0.5 * lambdas.sum();
  for (std::size_t j = 0; j < mu.exponents.size(); ++j)
    if (mu.exponents[j] > target) return static_cast<int>(j);
  throw ValidationError("default_J1: ladder cutoff too small for the requested C1");
}

namespace {

CVec neville_at_zero(const std::vector<double>& q, const std::vector<CVec>& v, std::size_t m) {
  std::vector<CVec> p(v.begin(), v.begin() + m);
  for (std::size_t k = 1; k < m; ++k)
    for (std::size_t i = 0; i + k < m; ++i)
      p[i] = (q[i + k] * p[i] - q[i] * p[i + 1]) / (q[i + k] - q[i]);
  return p[0];
}

}  // namespace

Extrapolation extrapolate_exponential(const std::vector<double>& times,
                                      const std::vector<CVec>& values, double rate) {
  if (times.size() != values.size() || times.empty())
    throw ValidationError("extrapolate_exponential: mismatched or empty samples");
  if (!(rate > 0.0)) throw ValidationError("extrapolate_exponential: rate must be positive");
  std::vector<std::size_t> order(times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });
  std::vector<double> q;
  std::vector<CVec> v;
  for (std::size_t i : order) {
    q.push_back(std::exp(-rate * times[i]));
    v.push_back(values[i]);
  }
  Extrapolation out;
  out.limit = neville_at_zero(q, v, q.size());
  if (q.size() >= 2) out.error = (out.limit - neville_at_zero(q, v, q.size() - 1)).norm();
  return out;
}

}  // namespace saddle

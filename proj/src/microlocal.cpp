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

#include "saddle/microlocal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/FFT>

#include "saddle/errors.hpp"
#include "saddle/transition_operator.hpp"

namespace saddle {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

}  // namespace

Axis Axis::span(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw ValidationError("Axis::span needs hi > lo and n >= 2");
  return {lo, (hi - lo) / (n - 1), n};
}

Axis Axis::with_max_step(double lo, double hi, double max_step) {
  if (!(max_step > 0.0)) throw ValidationError("Axis::with_max_step needs a positive step");
  const int n = static_cast<int>(std::ceil((hi - lo) / max_step - 1e-12)) + 1;
  return span(lo, hi, std::max(n, 2));
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(std::vector<Axis> a, double hh) : axes(std::move(a)), h(hh) {
  values = CVec::Zero(static_cast<Eigen::Index>(size()));
}

std::size_t GridFunction::size() const {
  std::size_t n = axes.empty() ? 0 : 1;
  for (const Axis& a : axes) n *= static_cast<std::size_t>(a.n);
  return n;
}

std::vector<int> GridFunction::index(std::size_t k) const {
  std::vector<int> idx(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    idx[i] = static_cast<int>(k % axes[i].n);
    k /= axes[i].n;
  }
  return idx;
}

std::size_t GridFunction::flat(const std::vector<int>& idx) const {
  std::size_t k = 0;
  for (std::size_t i = axes.size(); i-- > 0;) k = k * axes[i].n + idx[i];
  return k;
}

Vec GridFunction::point(std::size_t k) const {
  const auto idx = index(k);
  Vec p(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) p[i] = axes[i].at(idx[i]);
  return p;
}

double GridFunction::cell_volume() const {
  double v = 1.0;
  for (const Axis& a : axes) v *= a.step;
  return v;
}

double GridFunction::l2_norm() const { return std::sqrt(values.squaredNorm() * cell_volume()); }

double GridFunction::boundary_decay() const {
  const double peak = values.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  double shell = 0.0;
  for (std::size_t k = 0; k < size(); ++k) {
    const auto idx = index(k);
    bool outer = false;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const int w = std::max(1, static_cast<int>(std::ceil(0.05 * axes[i].n)));
      if (idx[i] < w || idx[i] >= axes[i].n - w) outer = true;
    }
    if (outer) shell = std::max(shell, std::abs(values[static_cast<Eigen::Index>(k)]));
  }
  return shell / peak;
}

void GridFunction::validate() const {
  if (axes.empty()) throw ValidationError("GridFunction: no axes");
  for (const Axis& a : axes)
    if (a.n < 1 || !(a.step > 0.0)) throw ValidationError("GridFunction: axes must be uniform and nonempty");
  if (static_cast<std::size_t>(values.size()) != size())
    throw ValidationError("GridFunction: values do not match the axes");
  if (!values.allFinite()) throw ValidationError("GridFunction: non-finite values");
}

// ---------------------------------------------------------------------------

PhaseSpaceRegion PhaseSpaceRegion::ball(const Vec& center, double radius) {
  if (center.size() % 2 != 0) throw ValidationError("ball: center must be a point (x, xi)");
  if (!(radius >= 0.0)) throw ValidationError("ball: radius must be >= 0");
  PhaseSpaceRegion r;
  r.kind_ = Kind::ball;
  r.center_ = center;
  r.radius_ = radius;
  const Eigen::Index d = center.size() / 2;
  r.x_box_ = {center.head(d).array() - radius, center.head(d).array() + radius};
  r.xi_box_ = {center.tail(d).array() - radius, center.tail(d).array() + radius};
  return r;
}

PhaseSpaceRegion PhaseSpaceRegion::tube(std::vector<ChartPtr> charts, double thickness, const Box& x_box) {
  if (charts.empty()) throw ValidationError("tube: at least one chart is needed");
  if (!(thickness > 0.0)) throw ValidationError("tube: thickness must be positive");
  for (const auto& c : charts)
    if (!c || c->domain().dim() != x_box.dim()) throw ValidationError("tube: chart dimension mismatch");
  PhaseSpaceRegion r;
  r.kind_ = Kind::tube_around_manifold;
  r.charts_ = std::move(charts);
  r.thickness_ = thickness;
  r.x_box_ = x_box;
  r.xi_bounded_ = false;
  return r;
}

PhaseSpaceRegion PhaseSpaceRegion::complement(const PhaseSpaceRegion& inner, const Box& x_box,
                                              const Box& xi_box) {
  PhaseSpaceRegion r;
  r.kind_ = Kind::complement;
  r.inner_ = std::make_shared<const PhaseSpaceRegion>(inner);
  r.x_box_ = x_box;
  r.xi_box_ = xi_box;
  return r;
}

PhaseSpaceRegion PhaseSpaceRegion::everything(const Box& x_box, const Box& xi_box) {
  PhaseSpaceRegion r;
  r.kind_ = Kind::everything;
  r.x_box_ = x_box;
  r.xi_box_ = xi_box;
  return r;
}

bool PhaseSpaceRegion::contains(const Vec& x, const Vec& xi) const {
  switch (kind_) {
    case Kind::ball: {
      Vec p(x.size() + xi.size());
      p << x, xi;
      return (p - center_).norm() <= radius_;
    }
    case Kind::tube_around_manifold: {
      if (!x_box_.contains(x)) return false;
      for (const auto& c : charts_)
        if (c->domain().contains(x) && (xi - c->gradient(x)).norm() < thickness_) return true;
      return false;
    }
    case Kind::complement:
      return x_box_.contains(x) && xi_box_.contains(xi) && !inner_->contains(x, xi);
    case Kind::everything:
      return x_box_.contains(x) && xi_box_.contains(xi);
  }
  return false;
}

std::string PhaseSpaceRegion::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::ball: os << "ball(r=" << radius_ << ")"; break;
    case Kind::tube_around_manifold: os << "tube(" << charts_.size() << " charts, thickness=" << thickness_ << ")"; break;
    case Kind::complement: os << "complement(" << inner_->describe() << ")"; break;
    case Kind::everything: os << "everything"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

// K[x, xi, y] for one dimension, flattened as (ix + nx * ixi) rows, y columns (banded in practice).
struct Kernel1d {
  Axis x, xi, y;
  double h;
  int half_window;  // in y samples

  Kernel1d(const Axis& xa, const Axis& xia, const Axis& ya, double hh) : x(xa), xi(xia), y(ya), h(hh) {
    half_window = static_cast<int>(std::ceil(8.0 * std::sqrt(h) / y.step));
  }
  // sum_y K(x, xi, y) f(y) dy for one x index and all xi
  void apply(int ix, const Complex* f, std::ptrdiff_t stride, Complex* out, std::ptrdiff_t out_stride) const {
    const double xv = x.at(ix);
    const int centre = static_cast<int>(std::lround((xv - y.start) / y.step));
    const int lo = std::max(0, centre - half_window), hi = std::min(y.n - 1, centre + half_window);
    const double c = std::pow(2.0, -0.5) * std::pow(kPi * h, -0.75) * y.step;
    for (int k = 0; k < xi.n; ++k) out[k * out_stride] = 0.0;
    for (int j = lo; j <= hi; ++j) {
      const double dy = xv - y.at(j);
      if (std::abs(dy) > 8.0 * std::sqrt(h)) continue;
      const Complex fj = f[j * stride] * (c * std::exp(-dy * dy / (2.0 * h)));
      const Complex rot = std::exp(kI * (dy * xi.step / h));
      Complex ph = std::exp(kI * (dy * xi.start / h));
      for (int k = 0; k < xi.n; ++k) {
        out[k * out_stride] += fj * ph;
        ph *= rot;
      }
    }
  }
};

}  // namespace

FbiResult fbi(const GridFunction& u, const PhaseSpaceGrid& grid, double h) {
  u.validate();
  const int d = u.dim();
  if (d > 2) throw ValidationError("fbi: only d <= 2 is supported");
  if (static_cast<int>(grid.x_axes.size()) != d || static_cast<int>(grid.xi_axes.size()) != d)
    throw ValidationError("fbi: phase-space grid dimension mismatch");
  if (!(h > 0.0)) throw ValidationError("fbi: h must be positive");
  const double decay = u.boundary_decay();
  if (decay > 1e-8) {
    std::ostringstream os;
    os << "fbi: input does not decay at the grid boundary (shell/peak = " << decay << ")";
    throw ValidationError(os.str());
  }
  std::vector<Axis> axes = grid.x_axes;
  axes.insert(axes.end(), grid.xi_axes.begin(), grid.xi_axes.end());
  FbiResult res;
  res.transform = GridFunction(axes, h);
  res.input_norm = u.l2_norm();
  CVec& T = res.transform.values;

  if (d == 1) {
    const Kernel1d K(grid.x_axes[0], grid.xi_axes[0], u.axes[0], h);
    const int nx = grid.x_axes[0].n;
    for (int ix = 0; ix < nx; ++ix) K.apply(ix, u.values.data(), 1, T.data() + ix, nx);
  } else {
    const Axis &y1 = u.axes[0], &y2 = u.axes[1];
    const Axis &x1 = grid.x_axes[0], &x2 = grid.x_axes[1], &k1 = grid.xi_axes[0], &k2 = grid.xi_axes[1];
    // transform along y2: V(a, i2, j2) stored with a fastest
    const Kernel1d K2(x2, k2, y2, h);
    CVec V(static_cast<Eigen::Index>(y1.n) * x2.n * k2.n);
    for (int a = 0; a < y1.n; ++a)
      for (int i2 = 0; i2 < x2.n; ++i2)
        K2.apply(i2, u.values.data() + a, y1.n, V.data() + a + static_cast<std::ptrdiff_t>(y1.n) * i2,
                 static_cast<std::ptrdiff_t>(y1.n) * x2.n);
    // then along y1; output index i1 + n1 (i2 + n2 (j1 + m1 j2))
    const Kernel1d K1(x1, k1, y1, h);
    std::vector<Complex> col(k1.n);
    for (int j2 = 0; j2 < k2.n; ++j2)
      for (int i2 = 0; i2 < x2.n; ++i2) {
        const Complex* f = V.data() + static_cast<std::ptrdiff_t>(y1.n) * (i2 + static_cast<std::ptrdiff_t>(x2.n) * j2);
        for (int i1 = 0; i1 < x1.n; ++i1) {
          K1.apply(i1, f, 1, col.data(), 1);
          for (int j1 = 0; j1 < k1.n; ++j1)
            T[i1 + static_cast<Eigen::Index>(x1.n) * (i2 + static_cast<Eigen::Index>(x2.n) * (j1 + static_cast<Eigen::Index>(k1.n) * j2))] = col[j1];
        }
      }
  }
  res.transform_norm = res.transform.l2_norm();
  return res;
}

double frequency_mass(const GridFunction& Tu, const PhaseSpaceRegion& region) {
  Tu.validate();
  if (Tu.dim() % 2 != 0) throw ValidationError("frequency_mass: transform must live on (x, xi)");
  const int d = Tu.dim() / 2;
  const double slack = 1e-9;
  auto inside = [&](const Box& b, int off) {
    if (b.dim() != d) throw ValidationError("frequency_mass: region dimension mismatch");
    for (int i = 0; i < d; ++i) {
      const Axis& a = Tu.axes[off + i];
      const double pad = slack * (1.0 + a.stop() - a.start);
      if (b.lo[i] < a.start - pad || b.hi[i] > a.stop() + pad) return false;
    }
    return true;
  };
  if (region.kind() != PhaseSpaceRegion::Kind::ball || region.x_bounds().dim() > 0) {
    if (!inside(region.x_bounds(), 0)) throw ValidationError("frequency_mass: region exceeds the x-range of the grid");
    if (region.xi_bounded() && !inside(region.xi_bounds(), d))
      throw ValidationError("frequency_mass: region exceeds the xi-range of the grid");
  }
  double mass = 0.0;
  for (std::size_t k = 0; k < Tu.size(); ++k) {
    const Vec p = Tu.point(k);
    if (region.contains(p.head(d), p.tail(d))) mass += std::norm(Tu.values[static_cast<Eigen::Index>(k)]);
  }
  return mass * Tu.cell_volume();
}

// ---------------------------------------------------------------------------

double PolySymbol::value(const Vec& x, const Vec& xi) const {
  double v = 0.0;
  for (const Term& t : terms) {
    double m = t.coeff.value(x);
    if (t.i >= 0) m *= xi[t.i];
    if (t.j >= 0) m *= xi[t.j];
    v += m;
  }
  return v;
}

PolySymbol PolySymbol::from_model(const HamiltonianModel& model, double h) {
  if (!model.separable()) throw ValidationError("weyl_apply: unsupported symbol class (custom model)");
  const int d = model.dim();
  PolySymbol p;
  p.dim = d;
  for (int j = 0; j < d; ++j) {
    Polynomial c(d);
    c.add_term(std::vector<int>(d, 0), model.kinetic()[j]);
    p.terms.push_back({c, j, j});
  }
  Polynomial v = model.potential();
  if (h > 0.0 && model.p1()) v = v + model.p1()->scaled(h);
  p.terms.push_back({v, -1, -1});
  return p;
}

namespace {

// (h/i) d/dx_axis by FFT along one axis
CVec hD(const GridFunction& g, const CVec& f, int axis, double h) {
  const Axis& a = g.axes[axis];
  const int n = a.n;
  std::size_t stride = 1;
  for (int i = 0; i < axis; ++i) stride *= g.axes[i].n;
  const std::size_t total = g.size();
  CVec out(f.size());
  Eigen::FFT<double> fft;
  std::vector<Complex> line(n), spec;
  std::vector<double> k(n);
  const double L = n * a.step;
  for (int m = 0; m < n; ++m) {
    const int mm = m <= n / 2 ? m : m - n;
    k[m] = (n % 2 == 0 && m == n / 2) ? 0.0 : 2.0 * kPi * mm / L;
  }
  for (std::size_t base = 0; base < total; ++base) {
    if ((base / stride) % n != 0) continue;
    for (int m = 0; m < n; ++m) line[m] = f[static_cast<Eigen::Index>(base + m * stride)];
    fft.fwd(spec, line);
    for (int m = 0; m < n; ++m) spec[m] *= h * k[m];  // (h/i)(i k)
    std::vector<Complex> back;
    fft.inv(back, spec);
    for (int m = 0; m < n; ++m) out[static_cast<Eigen::Index>(base + m * stride)] = back[m];
  }
  return out;
}

}  // namespace

GridFunction weyl_apply(const PolySymbol& p, const GridFunction& u, double h) {
  u.validate();
  if (u.dim() > 2) throw ValidationError("weyl_apply: only d <= 2 is supported");
  if (p.dim != u.dim()) throw ValidationError("weyl_apply: symbol and grid dimensions differ");
  if (!(h > 0.0)) throw ValidationError("weyl_apply: h must be positive");
  GridFunction out = u;
  out.values.setZero();
  const std::size_t n = u.size();
  for (const auto& t : p.terms) {
    if ((t.i < -1 || t.i >= p.dim) || (t.j < -1 || t.j >= p.dim) || (t.i < 0 && t.j >= 0))
      throw ValidationError("weyl_apply: unsupported symbol class");
    CVec a(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) a[static_cast<Eigen::Index>(k)] = t.coeff.value(u.point(k));
    const bool constant = t.coeff.degree() <= 0;
    if (t.i < 0) {
      out.values += a.cwiseProduct(u.values);
    } else if (t.j < 0) {
      const CVec Du = hD(u, u.values, t.i, h);
      out.values += 0.5 * (a.cwiseProduct(Du) + hD(u, a.cwiseProduct(u.values), t.i, h));
    } else if (constant) {
      out.values += a.cwiseProduct(hD(u, hD(u, u.values, t.j, h), t.i, h));
    } else {
      const CVec Dju = hD(u, u.values, t.j, h);
      const CVec Diu = hD(u, u.values, t.i, h);
      CVec acc = a.cwiseProduct(hD(u, Dju, t.i, h));
      acc += hD(u, a.cwiseProduct(Dju), t.i, h);
      acc += hD(u, a.cwiseProduct(Diu), t.j, h);
      acc += hD(u, hD(u, a.cwiseProduct(u.values), t.j, h), t.i, h);
      out.values += 0.25 * acc;
    }
  }
  return out;
}

double residual(const HamiltonianModel& model, Complex z, double h, const GridFunction& u,
                const Box& interior) {
  const GridFunction Pu = weyl_apply(PolySymbol::from_model(model, h), u, h);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!interior.contains(u.point(k))) continue;
    const auto i = static_cast<Eigen::Index>(k);
    num += std::norm(Pu.values[i] - z * u.values[i]);
    den += std::norm(u.values[i]);
  }
  if (den == 0.0) throw ValidationError("residual: u vanishes on the interior region");
  return std::sqrt(num / den);
}

GridFunction coherent_state(const std::vector<Axis>& axes, const Vec& x0, const Vec& xi0, double h) {
  if (static_cast<int>(axes.size()) != x0.size() || x0.size() != xi0.size())
    throw ValidationError("coherent_state: dimension mismatch");
  GridFunction g(axes, h);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec y = g.point(k) - x0;
    g.values[static_cast<Eigen::Index>(k)] = std::exp(kI * xi0.dot(y) / h - y.squaredNorm() / (2.0 * h));
  }
  return g;
}

double smooth_plateau(double x, double a, double b, double w) {
  auto step = [](double t) {  // C-infinity step from 0 (t <= 0) to 1 (t >= 1)
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double p = std::exp(-1.0 / t), q = std::exp(-1.0 / (1.0 - t));
    return p / (p + q);
  };
  return step((x - (a - w)) / w) * step(((b + w) - x) / w);
}

AssembledSolution assemble_solution_1d(const TransitionScenario& scenario, Complex z, double h,
                                       const Axis& axis, double inner, double outer, double width) {
  if (scenario.dim() != 1) throw ValidationError("assemble_solution_1d: scenario must be one-dimensional");
  if (!(inner > width) || !(outer > inner)) throw ValidationError("assemble_solution_1d: bad cutoff");
  const Box& dom = scenario.phi_plus->domain();
  if (outer + width > std::min(-dom.lo[0], dom.hi[0]) ||
      outer + width > std::min(-scenario.phi_minus->domain().lo[0], scenario.phi_minus->domain().hi[0]))
    throw ValidationError("assemble_solution_1d: cutoff reaches beyond the charts");
  const HamiltonianModel& m = scenario.model;
  const double eps = scenario.epsilon;
  const Vec ve = Vec::Constant(1, eps);
  const double phim_eps = scenario.phi_minus->value(ve);
  const double dxi_eps = m.dxi_p0(ve, scenario.phi_minus->gradient(ve))[0];

  AssembledSolution s{GridFunction({axis}, h), GridFunction({axis}, h), GridFunction({axis}, h)};
  std::vector<Vec> xs;
  std::vector<int> ks;
  for (int k = 0; k < axis.n; ++k) {
    const double x = axis.at(k);
    const double chi = smooth_plateau(std::abs(x), inner, outer, width);
    if (chi == 0.0) continue;
    xs.push_back(Vec::Constant(1, x));
    ks.push_back(k);
    if (x > 0.0) {
      // transport along Lambda_-: b = |d_xi p(eps) / d_xi p(x)|^{1/2} e^{i z t(x)/h}
      const Vec vx = Vec::Constant(1, x);
      auto inv_speed = [&](double y) {
        const Vec vy = Vec::Constant(1, y);
        return 1.0 / m.dxi_p0(vy, scenario.phi_minus->gradient(vy))[0];
      };
      const double t = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(inv_speed, eps, x, 8, 1e-13);
      const double dxi_x = m.dxi_p0(vx, scenario.phi_minus->gradient(vx))[0];
      const Complex b = std::sqrt(std::abs(dxi_eps / dxi_x)) * std::exp(kI * z * t / h);
      s.incoming.values[k] = chi * b * std::exp(kI * (scenario.phi_minus->value(vx) - phim_eps) / h);
    }
  }
  const CVec J = apply_J(scenario, CauchyData::point(1.0), xs, z, h);
  for (std::size_t q = 0; q < ks.size(); ++q) {
    const double chi = smooth_plateau(std::abs(axis.at(ks[q])), inner, outer, width);
    s.outgoing.values[ks[q]] = chi * J[static_cast<Eigen::Index>(q)];
  }
  s.u.values = s.incoming.values + s.outgoing.values;
  return s;
}

std::vector<MicrolocalizationLevel> microlocalization_study(const TransitionScenario& scenario,
                                                            Complex z, const std::vector<double>& h_list,
                                                            double tube, double window, double xi_half) {
  if (h_list.empty()) throw ValidationError("microlocalization_study: empty h list");
  const Box xb{Vec::Constant(1, -window), Vec::Constant(1, window)};
  const Box kb{Vec::Constant(1, -xi_half), Vec::Constant(1, xi_half)};
  const auto tube_region = PhaseSpaceRegion::tube({scenario.phi_minus, scenario.phi_plus}, tube, xb);
  const auto outside = PhaseSpaceRegion::complement(tube_region, xb, kb);
  const auto all = PhaseSpaceRegion::everything(xb, kb);
  std::vector<MicrolocalizationLevel> out;
  for (double h : h_list) {
    const double step = std::sqrt(h) / 6.0;
    const Axis ax = Axis::with_max_step(-1.0, 1.0, step);
    const AssembledSolution s = assemble_solution_1d(scenario, z, h, ax);
    const PhaseSpaceGrid g{{Axis::with_max_step(-window, window, step)}, {Axis::with_max_step(-xi_half, xi_half, step)}};
    const FbiResult r = fbi(s.u, g, h);
    MicrolocalizationLevel lv;
    lv.h = h;
    lv.grid_points = ax.n;
    lv.total_mass = frequency_mass(r.transform, all);
    lv.outside_mass = frequency_mass(r.transform, outside);
    lv.outside_fraction = lv.outside_mass / lv.total_mass;
    if (!out.empty()) lv.ratio_to_previous = out.back().outside_fraction / lv.outside_fraction;
    lv.plancherel_error = r.plancherel_error();
    lv.residual = residual(scenario.model, z, h, s.u, Box{Vec::Constant(1, 0.2), Vec::Constant(1, 0.6)});
    out.push_back(lv);
  }
  return out;
}

}  // namespace saddle

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

#include <memory>
#include <string>
#include <vector>

#include "saddle/core_model.hpp"
#include "saddle/flow_geometry.hpp"
#include "saddle/linalg.hpp"
#include "saddle/phase_builder.hpp"

namespace saddle {

struct Axis {
  double start = 0.0;
  double step = 1.0;
  int n = 1;

  double at(int k) const { return start + k * step; }
  double stop() const { return at(n - 1); }
  static Axis span(double lo, double hi, int n);
  /// Uniform axis on [lo, hi] with spacing at most max_step.
  static Axis with_max_step(double lo, double hi, double max_step);
};

/// Complex samples on a uniform tensor grid; axis 0 varies fastest.
struct GridFunction {
  std::vector<Axis> axes;
  CVec values;
  double h = 0.0;

  GridFunction() = default;
  GridFunction(std::vector<Axis> axes, double h);

  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t size() const;
  Vec point(std::size_t k) const;
  std::vector<int> index(std::size_t k) const;
  std::size_t flat(const std::vector<int>& idx) const;
  double cell_volume() const;
  double l2_norm() const;
  /// Largest modulus on the outermost 5% shell, relative to the peak modulus.
  double boundary_decay() const;
  /// Throws ValidationError on non-uniform or empty axes, size mismatch or non-finite values.
  void validate() const;
};

/// Region in T*R^d given by a membership test on (x, xi) and a bounding box.
class PhaseSpaceRegion {
 public:
  enum class Kind { ball, tube_around_manifold, complement, everything };

  static PhaseSpaceRegion ball(const Vec& center, double radius);
  /// {|xi - grad phi(x)| < thickness for some chart} within the x-box.
  static PhaseSpaceRegion tube(std::vector<ChartPtr> charts, double thickness, const Box& x_box);
  /// Points of box (in x and xi) not in inner.
  static PhaseSpaceRegion complement(const PhaseSpaceRegion& inner, const Box& x_box, const Box& xi_box);
  static PhaseSpaceRegion everything(const Box& x_box, const Box& xi_box);

  Kind kind() const { return kind_; }
  bool contains(const Vec& x, const Vec& xi) const;
  /// x-bounds and xi-bounds that the region needs from a grid (xi may be unbounded for tubes).
  const Box& x_bounds() const { return x_box_; }
  bool xi_bounded() const { return xi_bounded_; }
  const Box& xi_bounds() const { return xi_box_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::everything;
  Vec center_;
  double radius_ = 0.0;
  std::vector<ChartPtr> charts_;
  double thickness_ = 0.0;
  Box x_box_, xi_box_;
  bool xi_bounded_ = true;
  std::shared_ptr<const PhaseSpaceRegion> inner_;
};

struct PhaseSpaceGrid {
  std::vector<Axis> x_axes;
  std::vector<Axis> xi_axes;
};

struct FbiResult {
  GridFunction transform;  // over (x_1..x_d, xi_1..xi_d)
  double input_norm = 0.0;
  double transform_norm = 0.0;
  double plancherel_error() const { return std::abs(transform_norm - input_norm) / input_norm; }
};

/// T'u(x, xi) = c_d(h) int e^{i(x-y)xi/h - |x-y|^2/2h} u(y) dy, c_d(h) = 2^{-d/2}(pi h)^{-3d/4},
/// by direct quadrature with the window cut at 8 sqrt(h).
FbiResult fbi(const GridFunction& u, const PhaseSpaceGrid& grid, double h);

/// Squared L2 mass of a transform over a region.
double frequency_mass(const GridFunction& Tu, const PhaseSpaceRegion& region);

/// Symbol sum_k a_k(x) xi^{alpha_k} with |alpha_k| <= 2 and polynomial coefficients.
struct PolySymbol {
  struct Term {
    Polynomial coeff;
    int i = -1;  // first xi index or -1
    int j = -1;  // second xi index or -1
  };
  int dim = 0;
  std::vector<Term> terms;

  double value(const Vec& x, const Vec& xi) const;
  /// p0 of a separable model, plus h p1 when the model has one and h > 0.
  static PolySymbol from_model(const HamiltonianModel& model, double h = 0.0);
};

/// Weyl quantization of a PolySymbol with spectral (FFT) differentiation; d <= 2.
GridFunction weyl_apply(const PolySymbol& p, const GridFunction& u, double h);

/// ||(Op_h(p0) + h Op_h(p1) - z) u|| / ||u|| over the grid points inside the box.
double residual(const HamiltonianModel& model, Complex z, double h, const GridFunction& u,
                const Box& interior);

/// e^{i xi0.(y - x0)/h - |y - x0|^2/2h} on the grid.
GridFunction coherent_state(const std::vector<Axis>& axes, const Vec& x0, const Vec& xi0, double h);

/// Smooth plateau: 1 on [a, b], 0 outside [a - w, b + w].
double smooth_plateau(double x, double a, double b, double w);

struct AssembledSolution {
  GridFunction u;
  GridFunction incoming;
  GridFunction outgoing;
};

/// One-dimensional solution assembled from the incoming WKB state b e^{i phi_-/h} with unit
/// Cauchy data at x = eps and the output of apply_J, cut off away from 0 and from the edge of
/// the chart: cutoff = plateau on inner <= |x| <= outer with transition width.
AssembledSolution assemble_solution_1d(const TransitionScenario& scenario, Complex z, double h,
                                       const Axis& axis, double inner = 0.1, double outer = 0.75,
                                       double width = 0.05);

struct MicrolocalizationLevel {
  double h = 0.0;
  int grid_points = 0;
  double total_mass = 0.0;
  double outside_mass = 0.0;
  double outside_fraction = 0.0;
  double ratio_to_previous = 0.0;  // previous fraction / this fraction (0 for the first level)
  double plancherel_error = 0.0;
  double residual = 0.0;           // PDE residual on 0.2 <= x <= 0.6
};

/// Fraction of the FBI mass of the assembled 1-D solution lying outside the tube of the given
/// thickness around Lambda_- and Lambda_+, over |x| <= window and |xi| <= xi_half. Spatial
/// grid on [-1, 1] and transform grid both use spacing sqrt(h)/6.
std::vector<MicrolocalizationLevel> microlocalization_study(const TransitionScenario& scenario,
                                                            Complex z, const std::vector<double>& h_list,
                                                            double tube = 0.15, double window = 0.5,
                                                            double xi_half = 1.5);

}  // namespace saddle

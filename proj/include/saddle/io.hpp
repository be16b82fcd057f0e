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

#include <cstdint>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "saddle/asymptotics.hpp"
#include "saddle/core_model.hpp"
#include "saddle/flow_geometry.hpp"
#include "saddle/microlocal.hpp"
#include "saddle/oracle_1d.hpp"
#include "saddle/transition_operator.hpp"

namespace saddle {

using json = nlohmann::ordered_json;

/// Text of a double with 16 significant digits ("%.16g").
std::string fmt(double v);

std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t v);

/// {"dim", "lambdas", "kind", "perturbation": [{"exponents", "coeff"}]}. Errors name the field
/// relative to the where argument.
HamiltonianModel model_from_json(const json& j, const std::string& where = "model");
json model_to_json(const HamiltonianModel& model);

/// Columns re, im, alpha_0 .. alpha_{d-1}.
void write_lattice_csv(std::ostream& os, const ResonanceLattice& lattice);

json series_to_json(const ExpandiblePolySeries& series);
ExpandiblePolySeries series_from_json(const json& j);

/// Columns t, x_*, xi_*, energy and, with Jacobians, the symplectic defect (absolute and
/// relative to |M|^2).
void write_trajectory_csv(std::ostream& os, const TrajectorySample& traj);

/// Kind, domain, fit residual and value/gradient samples on a tensor grid.
json chart_to_json(const LagrangianChart& chart, int points_per_dim = 5);

json transition_to_json(const TransitionEvaluation& ev);
void write_transition_csv_header(std::ostream& os, int dim);
void write_transition_csv_row(std::ostream& os, const Vec& x, const Vec& y_prime,
                              const TransitionEvaluation& ev);

/// "# axes start:step:n;..." followed by rows x_*, re, im.
void write_grid_csv(std::ostream& os, const GridFunction& g);
GridFunction read_grid_csv(std::istream& is);

/// Columns z_re, z_im, h, |T|_oracle, |T|_J, rel_err_modulus, phase_err plus diagnostics.
void write_comparison_csv(std::ostream& os, const TransitionComparison& cmp);

json complex_to_json(Complex z);
Complex complex_from_json(const json& j, const std::string& where);

}  // namespace saddle

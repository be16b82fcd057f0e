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
#include <string>
#include <vector>

#include "saddle/core_model.hpp"
#include "saddle/io.hpp"
#include "saddle/phase_builder.hpp"

namespace saddle {

inline constexpr const char* kVersion = "0.1.0";

struct SweepPoint {
  Complex z{};
  double h = 0.1;
};

struct RunConfig {
  json raw;
  std::string hash;  // FNV-1a of the canonical (key-sorted) dump
  std::string base_dir;

  HamiltonianModel model;
  json model_json;

  // scenario
  double epsilon = 0.1;
  Vec x_minus_prime;
  double eta_box_halfwidth = 0.0;
  double badset_tol = 0.05;

  // spectral box
  double C0 = 1.0;
  double C1 = 1.0;
  double nu = 0.1;

  // sweep
  std::vector<double> h_list{0.1};
  std::vector<Complex> z_list{Complex(0.0, 0.0)};
  bool z_in_units_of_h = true;

  // tolerances
  double flow_tol = 1e-10;
  double chart_tol = 1e-8;
  double oracle_tol = 1e-12;

  std::string output_dir = "out";
  std::uint64_t seed = 0;

  // lattice
  double lattice_bound = 0.0;  // 0: max |z| of the spectral box

  // flow
  Vec flow_x0;           // empty: epsilon e_1
  int flow_sign = -1;
  double flow_t_max = 0.0;  // 0: 8 / lambda_1
  int flow_samples = 64;
  int flow_fit_degree = 1;

  // phase
  Vec phase_eta_prime;   // empty: eta'_-
  double phase_t_max = 0.0;  // 0: 6 / ladder gap
  std::vector<Vec> phase_points;

  // transition
  std::vector<Vec> targets;
  std::vector<Vec> y_primes;
  bool apply_j = true;

  // verify
  double x_eval = -0.8;
  int resonance_count = 5;
  std::vector<double> microlocal_h{0.1, 0.05, 0.025};
  double tube = 0.15;
  bool microlocal = true;

  // fbi
  std::string fbi_state = "coherent";  // coherent | assembled
  double fbi_h = 0.05;
  Vec fbi_x0;
  Vec fbi_xi0;
  double fbi_x_half = 1.0;
  double fbi_window_half = 0.5;
  double fbi_xi_half = 1.5;
  std::string region_kind = "ball";  // ball | tube | complement_tube | everything
  Vec region_center;
  double region_radius = 0.5;

  /// All (z, h) sweep pairs, h outermost; z scaled by h when z_in_units_of_h.
  std::vector<SweepPoint> sweep() const;
  ScenarioOptions scenario_options() const;
  SpectralParams spectral_at(const SweepPoint& p) const;
  TransitionScenario build_scenario(const SweepPoint& p) const;
};

/// Parses and validates; ValidationError messages start with the offending field.
RunConfig parse_config(const json& j, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace saddle

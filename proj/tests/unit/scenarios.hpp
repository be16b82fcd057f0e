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

#include "saddle/core_model.hpp"
#include "saddle/phase_builder.hpp"

namespace saddle::test {

inline TransitionScenario scenario_for(const HamiltonianModel& m, double eps = 0.1, double h = 0.1,
                                       Vec x_minus_prime = Vec(), double C1 = 1.0) {
  ScenarioOptions o;
  o.epsilon = eps;
  o.x_minus_prime = std::move(x_minus_prime);
  return make_scenario(m, spectral_params(0.0, h, 1.0, C1, 0.1, m.lambdas()), o);
}

inline HamiltonianModel perturbed_barrier_2d() {
  return make_barrier_model({1.0, 2.0}, {{{3, 0}, 0.05}, {{1, 2}, 0.05}});
}

}  // namespace saddle::test

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

#include <functional>
#include <vector>

namespace saddle {

using OdeState = std::vector<double>;
using OdeRhs = std::function<void(const OdeState& x, OdeState& dxdt, double t)>;
/// Returns false when the state has left the admissible region.
using OdeMonitor = std::function<bool(const OdeState& x, double t)>;

struct OdeOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double initial_step = 1e-2;
  double max_step = 0.0;  // 0: unlimited
  long max_steps = 2000000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
};

/// Adaptive embedded Runge-Kutta-Fehlberg 7(8) integration from t0 through the
/// monotone list of output times. Returns the state at each output time.
/// Throws DomainEscapeError when the monitor rejects a state.
std::vector<OdeState> integrate_ode(const OdeRhs& rhs, OdeState x0, double t0,
                                    const std::vector<double>& times, const OdeOptions& options,
                                    const OdeMonitor& monitor = {}, OdeStats* stats = nullptr);

/// Convenience for a single end time.
OdeState integrate_ode_to(const OdeRhs& rhs, OdeState x0, double t0, double t1,
                          const OdeOptions& options, const OdeMonitor& monitor = {});

}  // namespace saddle

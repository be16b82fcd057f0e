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

#include "saddle/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "saddle/errors.hpp"

namespace saddle {

namespace odeint = boost::numeric::odeint;

std::vector<OdeState> integrate_ode(const OdeRhs& rhs, OdeState x, double t0,
                                    const std::vector<double>& times, const OdeOptions& options,
                                    const OdeMonitor& monitor, OdeStats* stats) {
  using Stepper = odeint::runge_kutta_fehlberg78<OdeState>;
  auto controlled = odeint::make_controlled<Stepper>(options.abs_tol, options.rel_tol);
  auto system = [&rhs](const OdeState& s, OdeState& ds, double t) { rhs(s, ds, t); };

  std::vector<OdeState> out;
  out.reserve(times.size());
  double t = t0;
  const double direction = times.empty() || times.back() >= t0 ? 1.0 : -1.0;
  double dt = direction * std::abs(options.initial_step);
  long steps = 0;
  for (double target : times) {
    if ((target - t) * direction < -1e-14 * (1.0 + std::abs(t)))
      throw ValidationError("integrate_ode: output times must be monotone");
    while ((target - t) * direction > 0.0) {
      double step = dt;
      if (options.max_step > 0.0 && std::abs(step) > options.max_step)
        step = direction * options.max_step;
      bool last = false;
      if ((t + step - target) * direction >= 0.0) {
        step = target - t;
        last = true;
      }
      const double t_before = t;
      const odeint::controlled_step_result res = controlled.try_step(system, x, t, step);
      if (res == odeint::success) {
        if (stats) ++stats->accepted;
        if (last) t = target;  // avoid round-off drift
        if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }))
          throw NumericalError("integrate_ode: non-finite state");
        if (monitor && !monitor(x, t)) {
          std::ostringstream os;
          os << "trajectory left the validity neighbourhood at t = " << t;
          throw DomainEscapeError(os.str(), t);
        }
        // keep the proposed next step unless we shortened it to hit the target
        dt = last && std::abs(step) < std::abs(dt) ? dt : step;
      } else {
        if (stats) ++stats->rejected;
        dt = step;
        (void)t_before;
      }
      if (++steps > options.max_steps) throw NumericalError("integrate_ode: too many steps");
      if (std::abs(dt) < 1e-15 * (1.0 + std::abs(t)))
        throw NumericalError("integrate_ode: step size underflow");
    }
    out.push_back(x);
  }
  return out;
}

OdeState integrate_ode_to(const OdeRhs& rhs, OdeState x0, double t0, double t1,
                          const OdeOptions& options, const OdeMonitor& monitor) {
  if (t1 == t0) return x0;
  return integrate_ode(rhs, std::move(x0), t0, {t1}, options, monitor).front();
}

}  // namespace saddle

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
#include <stdexcept>
#include <string>

namespace saddle {

/// Bad input: a precondition on arguments or configuration does not hold.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to reach its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A trajectory left the model's validity neighbourhood.
class DomainEscapeError : public NumericalError {
 public:
  DomainEscapeError(const std::string& what, double exit_time)
      : NumericalError(what), exit_time_(exit_time) {}
  double exit_time() const noexcept { return exit_time_; }

 private:
  double exit_time_;
};

/// Evaluation at (or within guard distance of) a pole of the Gamma factor,
/// i.e. at a point z = -ih(n*lambda_1 + sum(lambda)/2) of the resonance lattice.
class PoleError : public NumericalError {
 public:
  PoleError(const std::string& what, std::complex<double> lattice_point, int order)
      : NumericalError(what), lattice_point_(lattice_point), order_(order) {}
  std::complex<double> lattice_point() const noexcept { return lattice_point_; }
  int order() const noexcept { return order_; }

 private:
  std::complex<double> lattice_point_;
  int order_;
};

}  // namespace saddle

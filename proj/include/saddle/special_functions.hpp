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
#include <string>
#include <vector>

namespace saddle {

/// Euler Gamma function on the complex plane (Lanczos, g = 7, with reflection).
/// Throws PoleError at non-positive integers.
std::complex<double> complex_gamma(std::complex<double> z);

/// Principal branch of base^exponent, exp(exponent * Log(base)).
std::complex<double> principal_pow(std::complex<double> base, std::complex<double> exponent);

/// Square root that follows a continuous path of arguments.
///
/// Each call to next() picks the root closest to the previous one, so the
/// branch is continuous along a sampled deformation. The first call uses the
/// principal branch.
class BranchTracker {
 public:
  std::complex<double> next(std::complex<double> value);
  bool started() const { return started_; }
  /// Number of times the tracked root differs from the principal root.
  int off_principal_count() const { return off_principal_; }
  const std::vector<std::string>& log() const { return log_; }

 private:
  bool started_ = false;
  std::complex<double> last_{};
  int off_principal_ = 0;
  std::vector<std::string> log_;
};

}  // namespace saddle

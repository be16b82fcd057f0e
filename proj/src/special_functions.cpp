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

#include "saddle/special_functions.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "saddle/errors.hpp"

namespace saddle {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeff = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

std::complex<double> lanczos_right(std::complex<double> z) {
  // valid for Re z >= 1/2
  z -= 1.0;
  std::complex<double> x = kLanczosCoeff[0];
  for (int i = 1; i < 9; ++i) x += kLanczosCoeff[i] / (z + static_cast<double>(i));
  const std::complex<double> t = z + kLanczosG + 0.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::exp((z + 0.5) * std::log(t) - t) * x;
}

}  // namespace

std::complex<double> complex_gamma(std::complex<double> z) {
  if (z.imag() == 0.0 && z.real() <= 0.0 && std::floor(z.real()) == z.real()) {
    std::ostringstream os;
    os << "Gamma pole at " << z.real();
    throw PoleError(os.str(), z, static_cast<int>(-z.real()));
  }
  if (z.real() < 0.5) {
    const std::complex<double> s = std::sin(std::numbers::pi * z);
    return std::numbers::pi / (s * lanczos_right(1.0 - z));
  }
  return lanczos_right(z);
}

std::complex<double> principal_pow(std::complex<double> base, std::complex<double> exponent) {
  if (base == 0.0) throw ValidationError("principal_pow: zero base");
  return std::exp(exponent * std::log(base));
}

std::complex<double> BranchTracker::next(std::complex<double> value) {
  const std::complex<double> principal = std::sqrt(value);
  std::complex<double> root = principal;
  if (started_ && std::abs(-principal - last_) < std::abs(principal - last_)) root = -principal;
  if (root != principal) {
    ++off_principal_;
    if (off_principal_ == 1) {
      std::ostringstream os;
      os << "left principal branch at value (" << value.real() << "," << value.imag() << ")";
      log_.push_back(os.str());
    }
  }
  started_ = true;
  last_ = root;
  return root;
}

}  // namespace saddle

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

#include <iosfwd>
#include <string>
#include <vector>

#include "saddle/config.hpp"

namespace saddle {

struct CliOptions {
  std::string out;       // overrides the config's output directory when nonempty
  int jobs = 1;
  bool verbose = false;
  bool timestamp = true; // false writes a fixed header date (reproducible files)
  std::ostream* log = nullptr;  // progress and summary lines; null: std::cout
  std::ostream* err = nullptr;  // diagnostics; null: std::cerr
};

enum ExitCode { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3 };

const std::vector<std::string>& subcommands();

/// Loads the config and runs one subcommand. Never throws; returns an ExitCode.
int run(const std::string& subcommand, const std::string& config_path, const CliOptions& options = {});
int run(const std::string& subcommand, const RunConfig& config, const CliOptions& options = {});

}  // namespace saddle

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

#include <string>

#include <CLI11.hpp>

#include "saddle/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"saddle: transition through a hyperbolic fixed point"};
  app.require_subcommand(1);
  std::string config;
  saddle::CliOptions opt;
  for (const std::string& name : saddle::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides the config)");
    sub->add_option("--jobs", opt.jobs, "worker threads over sweep points")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", opt.verbose, "progress on stderr");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : saddle::kExitValidation;
  }
  return saddle::run(app.get_subcommands().front()->get_name(), config, opt);
}

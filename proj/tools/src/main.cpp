// Copyright 2026 The bal Authors.
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

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Loss-driven Bayesian active learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Experiment file (JSON)")->required();

  std::string results_path, metric, out_path;
  auto* plot = app.add_subcommand("plotdata", "Per-round mean and SEM of one metric");
  plot->add_option("results", results_path, "results.csv from a run")->required();
  plot->add_option("--metric", metric, "Metric name")->required();
  plot->add_option("--out", out_path, "Output CSV")->required();

  auto* selftest = app.add_subcommand("selftest", "Run built-in invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bal::cli::kConfigError;
  }

  if (*run) return bal::cli::cmd_run(config_path, std::cout, std::cerr);
  if (*plot) return bal::cli::cmd_plotdata(results_path, metric, out_path, std::cerr);
  if (*selftest) return bal::cli::cmd_selftest(std::cout);
  return bal::cli::kConfigError;
}

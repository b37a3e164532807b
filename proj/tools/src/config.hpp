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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bal/acquisition.hpp"
#include "bal/common.hpp"
#include "bal/loop.hpp"

namespace bal::cli {

/// Raised for any problem in the experiment file. `line` is 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct TaskSpec {
  std::string kind = "synth_1d";  ///< synth_1d | csv_regression | blobs | csv_classification
  std::string path;
  std::string target;
  std::size_t test_size = 20;
  std::size_t n_initial = 10;
  std::size_t n_contexts = 0;
  std::string contexts = "separate";  ///< separate | test
  int n_classes = 4;
  std::size_t per_class = 80;
  int dim = 4;
  double separation = 2.0;
  std::optional<std::uint64_t> data_seed;  ///< blobs: fixed points, seeds vary the split
  std::size_t per_class_test = 15;
  std::size_t per_class_context = 0;
  std::size_t n_initial_per_class = 5;

  bool is_classification() const { return kind == "blobs" || kind == "csv_classification"; }
};

struct KernelSpec {
  std::string type = "rbf";  ///< rbf | matern
  double lengthscale = 1.0;
  double variance = 1.0;
  double nu = 1.5;
};

struct ModelSpec {
  std::string kind = "gp";              ///< gp | forest
  std::string hyperparameters = "fixed";  ///< fixed | robust
  KernelSpec kernel;
  double mean = 0.0;
  double noise_var = 0.04;
  double nu = 1.5;
  std::size_t n_trees = 100;
  unsigned tree_threads = 1;
};

struct WeightSpec {
  std::string kind = "constant";  ///< constant | exp_pos | exp_neg | class_weights
  double alpha = 1.0;
  double scale = 1.0;
  std::vector<double> values;

  losses::WeightFunction build() const;
};

struct McSpec {
  std::size_t n_contexts = 0;
  std::size_t n_y_draws = 64;
  std::size_t n_z_draws = 256;
};

struct ExperimentConfig {
  TaskSpec task;
  ModelSpec model;
  std::vector<std::string> methods = {"Random", "EVR"};
  WeightSpec weight;
  double linex_alpha = 1.0;
  McSpec mc;
  std::size_t rounds = 25;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "results";
  unsigned threads = 1;
};

/// Seeds handed to the task builder and the acquisition loop for one
/// entry of the seed list.
struct DerivedSeeds {
  std::uint64_t seed;
  std::uint64_t task;
  std::uint64_t acquisition;
};
DerivedSeeds derive_seeds(std::uint64_t seed);

/// Parses and validates. Unknown keys and type mismatches throw ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved form, including derived seeds; parse_config accepts it back.
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace bal::cli

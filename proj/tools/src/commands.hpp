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
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace bal::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kRuntimeError = 3 };

/// Environment variable that replaces the configured output directory.
inline constexpr const char* kOutputDirEnv = "BAL_OUTPUT_DIR";

struct ResultRow {
  std::uint64_t seed;
  std::string method;
  std::size_t round;
  std::string metric;
  double value;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Raised when one (seed, method) run fails.
class ExperimentError : public Error {
 public:
  ExperimentError(std::uint64_t seed, std::string method, std::size_t round, const std::string& what);
  std::uint64_t seed() const { return seed_; }
  const std::string& method() const { return method_; }
  std::size_t round() const { return round_; }

 private:
  std::uint64_t seed_;
  std::string method_;
  std::size_t round_;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  ///< sorted by (seed, method, round)
  std::size_t truncated_runs = 0;
  std::size_t nll_clamped = 0;
};

/// Runs every (seed, method) pair. Throws ConfigError for inputs that cannot
/// form a task and ExperimentError for failures inside a run.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes results.csv, config.lock and summary.json into `dir`.
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, const std::filesystem::path& dir);

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);
int cmd_plotdata(const std::filesystem::path& results, const std::string& metric, const std::filesystem::path& out_path,
                 std::ostream& err);
int cmd_selftest(std::ostream& out);

std::vector<ResultRow> read_results(const std::filesystem::path& path);

}  // namespace bal::cli

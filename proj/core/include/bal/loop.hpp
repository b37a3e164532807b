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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bal/acquisition.hpp"
#include "bal/datasets.hpp"
#include "bal/gp.hpp"
#include "bal/losses.hpp"

namespace bal::loop {

struct Metric {
  std::string name;
  double value;
};

/// State after `round` acquisitions. Round 0 is the initial model.
struct RoundRecord {
  std::size_t round = 0;
  std::string method;
  std::optional<std::size_t> chosen;  ///< pool index (regression) or row index (classification)
  std::vector<Metric> metrics;
  std::vector<std::size_t> class_counts;  ///< cumulative labelled per class, classification only
  std::size_t nll_clamped = 0;
  double wall_seconds = 0.0;
  bool truncated = false;  ///< pool ran out before the requested rounds

  /// Throws std::out_of_range for an unknown name.
  double metric(std::string_view name) const;
};

/// Thrown when a run fails; carries the round that failed.
class RunError : public Error {
 public:
  RunError(std::size_t round, const std::string& what)
      : Error("round " + std::to_string(round) + ": " + what), round_(round) {}
  std::size_t round() const { return round_; }

 private:
  std::size_t round_;
};

struct RegressionModelConfig {
  enum class Hyperparameters { Fixed, Robust };
  Hyperparameters mode = Hyperparameters::Fixed;
  gp::Kernel kernel = gp::Kernel::rbf(1.0, 1.0);
  double mean_const = 0.0;
  double noise_var = 0.04;
  double nu = 1.5;  ///< Matern smoothness for robust mode
};

struct EvaluationConfig {
  losses::WeightFunction weight;  ///< w(y) in the weighted metrics
  double linex_alpha = 1.0;
};

struct RegressionMetrics {
  double sel = 0.0;
  double sel_w = 0.0;
  double sel_w_mean = 0.0;  ///< weighted squared error of the unweighted mean
  double nll = 0.0;
  double nll_w = 0.0;
  double linex = 0.0;
  std::size_t clamped = 0;
};

/// Test metrics for Gaussian predictives N(mean, var) of the label.
/// SEL uses the predictive mean, SEL_w the weighted predictive mean and
/// Linex the Linex Bayes act m - alpha var / 2. SEL_w_mean scores the
/// unweighted mean under the weighted average.
RegressionMetrics regression_metrics(const Vec& mean, const Vec& var, const Vec& y, const losses::WeightFunction& w,
                                     double linex_alpha);

struct ClassificationMetrics {
  double nll = 0.0;
  double nll_w = 0.0;
  std::size_t clamped = 0;
};

/// probs is rows x classes.
ClassificationMetrics classification_metrics(const Mat& probs, std::span<const int> labels, const Vec& class_weights);

/// Per-round seed for acquisition-internal randomness.
std::uint64_t acquisition_seed(std::uint64_t master, std::size_t round, acquisition::Method method);

std::vector<RoundRecord> run_regression(const datasets::RegressionTask& task, const RegressionModelConfig& model,
                                        const acquisition::AcquisitionConfig& acq, const EvaluationConfig& eval,
                                        std::size_t n_rounds);

struct EnsembleConfig {
  std::size_t n_trees = 100;
  unsigned n_threads = 1;
};

std::vector<RoundRecord> run_classification(const datasets::ClassificationTask& task, const EnsembleConfig& model,
                                            const acquisition::AcquisitionConfig& acq, std::size_t n_rounds);

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;
  std::size_t n = 0;
};

/// Mean and standard error (sample sd / sqrt n; zero for n = 1).
MeanSem mean_sem(std::span<const double> values);

}  // namespace bal::loop

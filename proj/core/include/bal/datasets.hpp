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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bal/common.hpp"

namespace bal::datasets {

/// Feature-wise standardization frozen at construction. Zero-variance
/// features get unit scale.
struct Standardizer {
  Vec mean;
  Vec scale;

  static Standardizer fit(const Mat& x);
  Mat apply(const Mat& x) const;
};

/// Pool-based regression problem. Every label is drawn when the task is
/// built, so the acquisition order cannot change label values.
struct RegressionTask {
  std::string name;
  Mat pool_x;
  Vec pool_y;
  Mat context_x;
  Mat test_x;
  Vec test_y;
  std::vector<std::size_t> initial;  ///< indices into the pool
  double noise_var = std::numeric_limits<double>::quiet_NaN();  ///< known observation noise, if any
  std::uint64_t seed = 0;

  double label(std::size_t pool_index) const { return pool_y[static_cast<Eigen::Index>(pool_index)]; }
};

/// 2 sin(2x) + 8 N(x; 2.5, 0.5^2) + 10 N(x; 7.5, 0.25^2) - 6 N(x; -4.5, 0.5^2),
/// N being the Gaussian density.
double synth_1d_function(double x);

constexpr double kSynth1dNoiseVar = 0.04;

/// Evenly spaced grids on [-8, 8] with 65 candidates, 49 contexts and 97
/// test inputs; three initial labels drawn from the candidate grid.
RegressionTask synth_1d(std::uint64_t seed);

/// Header plus a dense numeric body.
struct Table {
  std::vector<std::string> header;
  Mat values;

  Eigen::Index column(const std::string& name) const;
};

/// Comma-separated, header row, numeric cells.
Table read_csv(const std::filesystem::path& path);

enum class ContextSource { Separate, Test };

struct CsvRegressionOptions {
  std::string target;
  std::size_t test_size = 20;
  std::size_t n_initial = 10;
  std::size_t n_contexts = 0;  ///< 0 means the same size as the test set
  ContextSource contexts = ContextSource::Separate;
};

/// Uniform test split, remainder as pool, features standardized on the pool.
RegressionTask load_csv_regression(const std::filesystem::path& path, const CsvRegressionOptions& options,
                                   std::uint64_t seed);
RegressionTask make_regression_task(std::string name, const Mat& x, const Vec& y,
                                    const CsvRegressionOptions& options, std::uint64_t seed);

/// Pool-based classification problem; all index lists refer to rows of x.
struct ClassificationTask {
  std::string name;
  Mat x;
  std::vector<int> y;
  int n_classes = 0;
  std::vector<std::size_t> initial;
  std::vector<std::size_t> pool;
  std::vector<std::size_t> contexts;
  std::vector<std::size_t> test;
  Vec class_weights;
  std::uint64_t seed = 0;
};

struct StratifyOptions {
  std::size_t per_class_test = 15;
  std::size_t per_class_context = 0;  ///< 0 means per_class_test
  std::size_t n_initial_per_class = 5;
  Vec class_weights;                  ///< empty means all ones
};

struct CsvClassificationOptions : StratifyOptions {
  std::string target;
};

ClassificationTask load_csv_classification(const std::filesystem::path& path, const CsvClassificationOptions& options,
                                           std::uint64_t seed);

/// Stratified split of labelled data: per-class test rows, then per-class
/// initial labels from the remainder, rest to the pool. Contexts are a
/// per-class draw from the non-test rows.
ClassificationTask make_classification_task(std::string name, const Mat& x, std::vector<int> y, int n_classes,
                                            const StratifyOptions& options, std::uint64_t seed);

struct BlobOptions {
  int n_classes = 4;
  std::size_t per_class = 80;
  int dim = 4;
  double separation = 2.0;  ///< standard deviation of the class centres
  StratifyOptions split;
  /// Fixes the generated points so that `seed` only changes the split.
  std::optional<std::uint64_t> data_seed;
};

/// Isotropic unit-variance Gaussian blobs around random centres.
ClassificationTask synth_blobs(const BlobOptions& options, std::uint64_t seed);

}  // namespace bal::datasets

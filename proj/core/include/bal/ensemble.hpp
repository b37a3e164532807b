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
#include <span>
#include <vector>

#include "bal/common.hpp"

namespace bal::ensemble {

/// Axis-aligned binary classification tree. Leaves hold Laplace-smoothed
/// class probabilities, so every prediction is strictly inside the simplex.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;
    int left = -1;   ///< taken when x[feature] <= threshold
    int right = -1;
    Vec probs;       ///< leaves only
  };

  DecisionTree() = default;

  /// Single-leaf tree returning `probs` everywhere.
  static DecisionTree leaf(Vec probs);
  /// Hand-built tree; node 0 is the root.
  static DecisionTree from_nodes(std::vector<Node> nodes, int n_classes);

  /// Gini splits over sqrt(D) randomly chosen features per node, grown until
  /// pure or until no feature separates the rows (min leaf size 1).
  static DecisionTree grow(const Mat& x, std::span<const int> labels, std::span<const std::size_t> rows,
                           int n_classes, std::uint64_t seed);

  const Vec& predict(const Eigen::Ref<const Vec>& x) const;
  int n_classes() const { return n_classes_; }
  std::size_t n_nodes() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  std::vector<Node> nodes_;
  int n_classes_ = 0;
};

class TreeEnsemble {
 public:
  TreeEnsemble() = default;
  TreeEnsemble(std::vector<DecisionTree> trees, int n_classes);

  bool trained() const { return !trees_.empty(); }
  std::size_t size() const { return trees_.size(); }
  int n_classes() const { return n_classes_; }
  const std::vector<DecisionTree>& trees() const { return trees_; }

  /// p(z | x, theta_i) for every member: n_trees x n_classes.
  Mat member_probs(const Eigen::Ref<const Vec>& x) const;
  /// Member probabilities for many inputs: n_trees x (rows * n_classes),
  /// with the block for row r in columns [r K, (r + 1) K).
  Mat member_probs_batch(const Mat& x) const;
  Vec posterior_predictive(const Eigen::Ref<const Vec>& x) const;
  /// p_w(z | x) proportional to w(z) p(z | x).
  Vec weighted_predictive(const Eigen::Ref<const Vec>& x, const Vec& class_weights) const;

  /// Out-of-bag accuracy; requires the in-bag record kept by train_ensemble.
  double oob_accuracy(const Mat& x, std::span<const int> labels) const;
  void set_in_bag(std::vector<std::vector<std::uint32_t>> counts) { in_bag_ = std::move(counts); }

 private:
  void require_trained() const;
  std::vector<DecisionTree> trees_;
  int n_classes_ = 0;
  std::vector<std::vector<std::uint32_t>> in_bag_;
};

/// Bagged trees: each member sees a bootstrap resample drawn from its own
/// stream derived from `seed`. Labels are in {0, ..., n_classes - 1}.
/// n_threads = 0 uses the hardware concurrency.
TreeEnsemble train_ensemble(const Mat& x, std::span<const int> labels, int n_classes, std::size_t n_trees,
                            std::uint64_t seed, unsigned n_threads = 0);

}  // namespace bal::ensemble

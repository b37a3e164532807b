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

#include "bal/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "bal/random.hpp"

namespace bal::ensemble {

namespace {

Vec smoothed(const std::vector<double>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  Vec p(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t k = 0; k < counts.size(); ++k) {
    p[static_cast<Eigen::Index>(k)] = (counts[k] + 1.0) / (total + static_cast<double>(counts.size()));
  }
  return p;
}

double gini_mass(const std::vector<double>& counts, double n) {
  if (n == 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += c * c;
  return n - s / n;  // n * gini
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

Split best_split_on(const Mat& x, std::span<const int> labels, std::vector<std::size_t>& rows, int feature,
                    int n_classes) {
  std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    return x(static_cast<Eigen::Index>(a), feature) < x(static_cast<Eigen::Index>(b), feature);
  });
  std::vector<double> left(static_cast<std::size_t>(n_classes), 0.0), right(left);
  for (auto r : rows) right[static_cast<std::size_t>(labels[r])] += 1.0;
  Split best;
  const double n = static_cast<double>(rows.size());
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto lab = static_cast<std::size_t>(labels[rows[i]]);
    left[lab] += 1.0;
    right[lab] -= 1.0;
    const double a = x(static_cast<Eigen::Index>(rows[i]), feature);
    const double b = x(static_cast<Eigen::Index>(rows[i + 1]), feature);
    if (!(a < b)) continue;
    const double nl = static_cast<double>(i + 1);
    const double imp = gini_mass(left, nl) + gini_mass(right, n - nl);
    if (imp < best.impurity) {
      best.impurity = imp;
      best.feature = feature;
      best.threshold = 0.5 * (a + b);
      if (!(best.threshold > a && best.threshold <= b)) best.threshold = a;
    }
  }
  return best;
}

}  // namespace

DecisionTree DecisionTree::leaf(Vec probs) {
  if (probs.size() == 0 || !(probs.minCoeff() > 0.0) || std::abs(probs.sum() - 1.0) > 1e-12) {
    throw DomainError("leaf probabilities must be positive and sum to one");
  }
  DecisionTree t;
  t.n_classes_ = static_cast<int>(probs.size());
  Node n;
  n.probs = std::move(probs);
  t.nodes_.push_back(std::move(n));
  return t;
}

DecisionTree DecisionTree::from_nodes(std::vector<Node> nodes, int n_classes) {
  if (nodes.empty()) throw DomainError("tree needs at least one node");
  const auto count = static_cast<int>(nodes.size());
  for (const auto& n : nodes) {
    if (n.feature < 0) {
      if (n.probs.size() != n_classes || !(n.probs.minCoeff() > 0.0) || std::abs(n.probs.sum() - 1.0) > 1e-12) {
        throw DomainError("leaf probabilities must be positive, sum to one and match the class count");
      }
    } else if (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count) {
      throw DomainError("internal node refers to a missing child");
    }
  }
  DecisionTree t;
  t.nodes_ = std::move(nodes);
  t.n_classes_ = n_classes;
  return t;
}

DecisionTree DecisionTree::grow(const Mat& x, std::span<const int> labels, std::span<const std::size_t> rows,
                                int n_classes, std::uint64_t seed) {
  if (rows.empty()) throw InsufficientDataError("cannot grow a tree on zero rows");
  Rng rng(seed);
  const auto n_features = static_cast<int>(x.cols());
  const int per_split = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n_features)))));

  DecisionTree tree;
  tree.n_classes_ = n_classes;
  struct Pending {
    int node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  tree.nodes_.emplace_back();
  stack.push_back({0, std::vector<std::size_t>(rows.begin(), rows.end())});
  std::vector<int> order(static_cast<std::size_t>(n_features));

  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
    for (auto r : job.rows) counts[static_cast<std::size_t>(labels[r])] += 1.0;
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;

    Split best;
    if (!pure && job.rows.size() > 1) {
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      // Examine sqrt(D) features; keep drawing only while none can split.
      for (int i = 0; i < n_features; ++i) {
        if (i >= per_split && best.feature >= 0) break;
        const Split s = best_split_on(x, labels, job.rows, order[static_cast<std::size_t>(i)], n_classes);
        if (s.impurity < best.impurity) best = s;
      }
    }

    if (best.feature < 0) {
      tree.nodes_[static_cast<std::size_t>(job.node)].probs = smoothed(counts);
      continue;
    }
    std::vector<std::size_t> left, right;
    for (auto r : job.rows) {
      (x(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
    }
    const int li = static_cast<int>(tree.nodes_.size());
    tree.nodes_.emplace_back();
    tree.nodes_.emplace_back();
    auto& node = tree.nodes_[static_cast<std::size_t>(job.node)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = li;
    node.right = li + 1;
    stack.push_back({li + 1, std::move(right)});
    stack.push_back({li, std::move(left)});
  }
  return tree;
}

const Vec& DecisionTree::predict(const Eigen::Ref<const Vec>& x) const {
  if (nodes_.empty()) throw Error("predict on an empty tree");
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& n = nodes_[i];
    if (n.feature >= x.size()) throw ShapeError("input has fewer features than the tree uses");
    i = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i].probs;
}

TreeEnsemble::TreeEnsemble(std::vector<DecisionTree> trees, int n_classes)
    : trees_(std::move(trees)), n_classes_(n_classes) {
  for (const auto& t : trees_) {
    if (t.n_classes() != n_classes_) throw ShapeError("ensemble members disagree on the class count");
  }
}

void TreeEnsemble::require_trained() const {
  if (trees_.empty()) throw Error("ensemble has not been trained");
}

Mat TreeEnsemble::member_probs(const Eigen::Ref<const Vec>& x) const {
  require_trained();
  Mat p(static_cast<Eigen::Index>(trees_.size()), n_classes_);
  for (std::size_t i = 0; i < trees_.size(); ++i) p.row(static_cast<Eigen::Index>(i)) = trees_[i].predict(x);
  return p;
}

Mat TreeEnsemble::member_probs_batch(const Mat& x) const {
  require_trained();
  const Eigen::Index k = n_classes_;
  Mat p(static_cast<Eigen::Index>(trees_.size()), x.rows() * k);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Vec xr = x.row(r).transpose();
    for (std::size_t i = 0; i < trees_.size(); ++i) {
      p.block(static_cast<Eigen::Index>(i), r * k, 1, k) = trees_[i].predict(xr).transpose();
    }
  }
  return p;
}

Vec TreeEnsemble::posterior_predictive(const Eigen::Ref<const Vec>& x) const {
  require_trained();
  Vec p = Vec::Zero(n_classes_);
  for (const auto& t : trees_) p += t.predict(x);
  p /= static_cast<double>(trees_.size());
  return p / p.sum();
}

Vec TreeEnsemble::weighted_predictive(const Eigen::Ref<const Vec>& x, const Vec& class_weights) const {
  if (class_weights.size() != n_classes_) throw ShapeError("class weight vector does not match the class count");
  if (!(class_weights.minCoeff() > 0.0)) throw InvalidWeightError("class weights must be positive");
  Vec p = posterior_predictive(x).cwiseProduct(class_weights);
  return p / p.sum();
}

double TreeEnsemble::oob_accuracy(const Mat& x, std::span<const int> labels) const {
  require_trained();
  if (in_bag_.size() != trees_.size()) throw Error("ensemble carries no in-bag record");
  std::size_t scored = 0, correct = 0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Vec p = Vec::Zero(n_classes_);
    std::size_t votes = 0;
    for (std::size_t i = 0; i < trees_.size(); ++i) {
      if (in_bag_[i][static_cast<std::size_t>(r)] == 0) {
        p += trees_[i].predict(x.row(r).transpose());
        ++votes;
      }
    }
    if (votes == 0) continue;
    Eigen::Index arg = 0;
    p.maxCoeff(&arg);
    ++scored;
    if (arg == labels[static_cast<std::size_t>(r)]) ++correct;
  }
  return scored == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(scored);
}

TreeEnsemble train_ensemble(const Mat& x, std::span<const int> labels, int n_classes, std::size_t n_trees,
                            std::uint64_t seed, unsigned n_threads) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0) throw InsufficientDataError("cannot train an ensemble on an empty training set");
  if (labels.size() != n) throw ShapeError("feature rows and labels differ in length");
  if (n_trees == 0) throw DomainError("ensemble needs at least one tree");
  for (int l : labels) {
    if (l < 0 || l >= n_classes) throw DomainError("label " + std::to_string(l) + " outside the class range");
  }

  std::vector<DecisionTree> trees(n_trees);
  std::vector<std::vector<std::uint32_t>> in_bag(n_trees, std::vector<std::uint32_t>(n, 0));
  const Rng root(seed);
  auto build = [&](std::size_t t) {
    Rng stream = root.split(static_cast<std::uint64_t>(t));
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) {
      r = stream.uniform_index(n);
      ++in_bag[t][r];
    }
    trees[t] = DecisionTree::grow(x, labels, rows, n_classes, stream.next_u64());
  };

  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_trees));
  if (n_threads <= 1) {
    for (std::size_t t = 0; t < n_trees; ++t) build(t);
  } else {
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < n_threads; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t t = w; t < n_trees; t += n_threads) build(t);
      });
    }
    for (auto& th : workers) th.join();
  }
  TreeEnsemble ens(std::move(trees), n_classes);
  ens.set_in_bag(std::move(in_bag));
  return ens;
}

}  // namespace bal::ensemble

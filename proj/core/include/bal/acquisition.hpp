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
#include <string>
#include <string_view>
#include <vector>

#include "bal/ensemble.hpp"
#include "bal/gp.hpp"
#include "bal/losses.hpp"

namespace bal::acquisition {

/// Linex targets the Linex generalised entropy of the GP predictive.
enum class Method { Random, EVR, EVRw, EPIG, EPIGw, Linex };

std::string to_string(Method m);
/// Throws ValidationError for unknown names.
Method method_from_string(std::string_view name);

struct AcquisitionConfig {
  Method method = Method::EVR;
  losses::WeightFunction weight;  ///< used by EVRw (and EPIGw via class weights)
  std::size_t n_contexts = 0;     ///< 0 keeps every provided context
  std::size_t n_y_draws = 64;     ///< J, outer draws of the hypothetical label
  std::size_t n_z_draws = 256;    ///< S, inner draws of the context output
  std::uint64_t seed = 0;
  double linex_alpha = 1.0;
};

/// Per-candidate scores. `best` is the smallest index attaining the maximum.
struct ScoreReport {
  Vec scores;
  std::size_t best = 0;
  Mat per_context;  ///< contexts x candidates contributions, when available
  Vec std_errors;   ///< Monte Carlo paths only
};

/// Index of the largest entry, lowest index on ties. Throws on empty input.
std::size_t argmax_lowest(const Vec& scores);
std::size_t select_next(const ScoreReport& report);
/// Uniform pick from {0, ..., pool_size - 1}, a pure function of the seed.
std::size_t random_select(std::size_t pool_size, std::uint64_t seed);

/// EVR(x+) = mean_j s_n(c_j, x+)^2 / (v_n(x+) + noise).
ScoreReport evr_scores(const gp::GpPosterior& post, const Mat& candidates, const Mat& contexts);

struct McOptions {
  std::size_t n_y_draws = 64;
  std::size_t n_z_draws = 256;
  std::uint64_t seed = 0;
  /// Share the label and output noise draws across candidates. When false
  /// each candidate gets its own draws.
  bool common_random_numbers = true;
};

/// Weighted EVR. The pre-update term is exact (closed form for
/// exponential weights, quadrature otherwise); the expected post-update
/// term is a self-normalised Monte Carlo estimate over J label draws times
/// S output draws. A constant weight takes the exact path.
ScoreReport evr_weighted_scores(const gp::GpPosterior& post, const Mat& candidates, const Mat& contexts,
                                const losses::WeightFunction& weight, const McOptions& options);

/// Expected reduction of the generalised entropy of any scalar weighted
/// Bregman loss under the GP predictive. The label expectation uses the same
/// shared draws as the weighted EVR estimator.
ScoreReport eur_scores(const gp::GpPosterior& post, const Mat& candidates, const Mat& contexts,
                       const losses::WeightedBregmanLoss& loss, const McOptions& options);

/// Exact-sum weighted EPIG from member probabilities laid out as
/// n_members x (rows * n_classes). Returns one score per candidate row and,
/// if requested, the contexts x candidates contributions.
Vec epig_weighted_from_member_probs(const Mat& context_probs, const Mat& candidate_probs, int n_classes,
                                    const Vec& class_weights, Mat* per_context = nullptr);

ScoreReport epig_weighted_scores(const ensemble::TreeEnsemble& ens, const Mat& candidates, const Mat& contexts,
                                 const Vec& class_weights);
/// Unweighted EPIG; identical to the weighted form with unit weights.
ScoreReport epig_scores(const ensemble::TreeEnsemble& ens, const Mat& candidates, const Mat& contexts);

/// Fully discrete model p(c) p(z | c) p(y | z, c) for one fixed candidate x.
struct DiscreteJointModel {
  Vec p_c;                           ///< contexts
  Mat p_z_given_c;                   ///< contexts x |Z|
  std::vector<Mat> p_y_given_zc;     ///< per context, |Z| x |Y|
  std::vector<Vec> z_support;        ///< world states
};

/// E_{p(c) p(y | c)} h[p(z | c, y)].
double discrete_epu(const DiscreteJointModel& model, const losses::WeightedBregmanLoss& loss);
/// E_{p(c)} h[p(z | c)] - discrete_epu.
double discrete_eur(const DiscreteJointModel& model, const losses::WeightedBregmanLoss& loss);

}  // namespace bal::acquisition

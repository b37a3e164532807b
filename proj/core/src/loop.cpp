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

#include "bal/loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bal/beliefs.hpp"
#include "bal/ensemble.hpp"
#include "bal/random.hpp"

namespace bal::loop {

using acquisition::Method;

double RoundRecord::metric(std::string_view name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m.value;
  }
  throw std::out_of_range("no metric named " + std::string(name));
}

namespace {

constexpr double kProbFloor = 1e-12;

/// Normalised weights w(y_i) / sum_j w(y_j), stable for exponential weights.
Vec normalised_weights(const losses::WeightFunction& w, const Vec& y) {
  Vec lw(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) lw[i] = w.log_weight(y[i]);
  const double top = lw.maxCoeff();
  if (!std::isfinite(top)) throw DegenerateBeliefError("evaluation weights are all zero");
  Vec out = (lw.array() - top).exp().matrix();
  return out / out.sum();
}

Mat rows_of(const Mat& x, const std::vector<std::size_t>& rows) {
  Mat out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RegressionMetrics regression_metrics(const Vec& mean, const Vec& var, const Vec& y, const losses::WeightFunction& w,
                                     double linex_alpha) {
  if (mean.size() != y.size() || var.size() != y.size() || y.size() == 0) {
    throw ShapeError("regression metrics need matching, non-empty prediction and label vectors");
  }
  const Vec nw = normalised_weights(w, y);
  const auto sel_w_loss = losses::WeightedBregmanLoss::squared_error(w);
  const auto n = static_cast<double>(y.size());
  RegressionMetrics m;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double e = y[i] - mean[i];
    m.sel += e * e / n;
    const double act_w = beliefs::gaussian_bayes_act(sel_w_loss, {mean[i], var[i]});
    m.sel_w += nw[i] * (y[i] - act_w) * (y[i] - act_w);
    m.sel_w_mean += nw[i] * e * e;
    double dens = std::exp(-0.5 * e * e / var[i]) / std::sqrt(2.0 * std::numbers::pi * var[i]);
    if (dens < kProbFloor) {
      dens = kProbFloor;
      ++m.clamped;
    }
    const double nll = -std::log(dens);
    m.nll += nll / n;
    m.nll_w += nw[i] * nll;
    const double b = mean[i] - 0.5 * linex_alpha * var[i];
    const double d = linex_alpha * (b - y[i]);
    m.linex += (std::exp(d) - d - 1.0) / n;
  }
  return m;
}

ClassificationMetrics classification_metrics(const Mat& probs, std::span<const int> labels, const Vec& class_weights) {
  if (static_cast<std::size_t>(probs.rows()) != labels.size() || labels.empty()) {
    throw ShapeError("classification metrics need one probability row per label");
  }
  ClassificationMetrics m;
  double wsum = 0.0;
  const auto n = static_cast<double>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double p = probs(static_cast<Eigen::Index>(i), labels[i]);
    if (p < kProbFloor) {
      p = kProbFloor;
      ++m.clamped;
    }
    const double nll = -std::log(p);
    const double w = class_weights[labels[i]];
    m.nll += nll / n;
    m.nll_w += w * nll;
    wsum += w;
  }
  m.nll_w /= wsum;
  return m;
}

std::uint64_t acquisition_seed(std::uint64_t master, std::size_t round, Method method) {
  return Rng(master).split(acquisition::to_string(method)).split(static_cast<std::uint64_t>(round)).key();
}

std::vector<RoundRecord> run_regression(const datasets::RegressionTask& task, const RegressionModelConfig& model,
                                        const acquisition::AcquisitionConfig& acq, const EvaluationConfig& eval,
                                        std::size_t n_rounds) {
  const auto pool_size = static_cast<std::size_t>(task.pool_x.rows());
  std::vector<std::size_t> labelled = task.initial;
  std::vector<std::size_t> unlabelled;
  for (std::size_t i = 0; i < pool_size; ++i) {
    if (std::find(labelled.begin(), labelled.end(), i) == labelled.end()) unlabelled.push_back(i);
  }
  Mat contexts = task.context_x;
  if (acq.n_contexts > 0 && acq.n_contexts < static_cast<std::size_t>(contexts.rows())) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(contexts.rows()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng(acq.seed).split("contexts").shuffle(idx);
    idx.resize(acq.n_contexts);
    std::sort(idx.begin(), idx.end());
    contexts = rows_of(contexts, idx);
  }
  gp::HyperparameterSchedule schedule(model.nu);
  const auto linex_loss = losses::WeightedBregmanLoss::linex(acq.linex_alpha);

  std::vector<RoundRecord> records;
  std::optional<std::size_t> last_choice;
  for (std::size_t round = 0;; ++round) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Mat x_lab = rows_of(task.pool_x, labelled);
      Vec y_lab(static_cast<Eigen::Index>(labelled.size()));
      for (std::size_t i = 0; i < labelled.size(); ++i) y_lab[static_cast<Eigen::Index>(i)] = task.label(labelled[i]);

      gp::Kernel kernel = model.kernel;
      double mean_const = model.mean_const;
      double noise_var = model.noise_var;
      if (model.mode == RegressionModelConfig::Hyperparameters::Robust) {
        const auto& h = schedule.at_round(round, x_lab, y_lab);
        kernel = h.kernel();
        mean_const = h.mean_const;
        noise_var = h.noise_var;
      }
      const auto post = gp::fit(kernel, mean_const, noise_var, x_lab, y_lab);

      const auto pred = post.predict(task.test_x);
      const Vec var_y = (pred.var.array() + noise_var).matrix();
      const auto m = regression_metrics(pred.mean, var_y, task.test_y, eval.weight, eval.linex_alpha);
      RoundRecord rec;
      rec.round = round;
      rec.method = acquisition::to_string(acq.method);
      rec.chosen = last_choice;
      rec.metrics = {{"SEL", m.sel}, {"SEL_w", m.sel_w}, {"SEL_w_mean", m.sel_w_mean}, {"NLL", m.nll}, {"NLL_w", m.nll_w}, {"Linex", m.linex}};
      rec.nll_clamped = m.clamped;

      if (round == n_rounds || unlabelled.empty()) {
        rec.truncated = round < n_rounds;
        rec.wall_seconds = seconds_since(t0);
        records.push_back(std::move(rec));
        break;
      }

      const Mat candidates = rows_of(task.pool_x, unlabelled);
      const std::uint64_t seed = acquisition_seed(acq.seed, round, acq.method);
      const acquisition::McOptions mc{acq.n_y_draws, acq.n_z_draws, seed, true};
      std::size_t pick = 0;
      switch (acq.method) {
        case Method::Random: pick = acquisition::random_select(unlabelled.size(), seed); break;
        case Method::EVR: pick = acquisition::evr_scores(post, candidates, contexts).best; break;
        case Method::EVRw:
          pick = acquisition::evr_weighted_scores(post, candidates, contexts, acq.weight, mc).best;
          break;
        case Method::Linex: pick = acquisition::eur_scores(post, candidates, contexts, linex_loss, mc).best; break;
        case Method::EPIG:
        case Method::EPIGw: throw ValidationError("EPIG methods need a classification task");
      }
      last_choice = unlabelled[pick];
      labelled.push_back(unlabelled[pick]);
      unlabelled.erase(unlabelled.begin() + static_cast<std::ptrdiff_t>(pick));
      rec.wall_seconds = seconds_since(t0);
      records.push_back(std::move(rec));
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      throw RunError(round, e.what());
    }
  }
  return records;
}

std::vector<RoundRecord> run_classification(const datasets::ClassificationTask& task, const EnsembleConfig& model,
                                            const acquisition::AcquisitionConfig& acq, std::size_t n_rounds) {
  const auto k = static_cast<std::size_t>(task.n_classes);
  std::vector<std::size_t> labelled = task.initial;
  std::vector<std::size_t> unlabelled = task.pool;
  const Mat contexts = rows_of(task.x, task.contexts);
  const Mat test_x = rows_of(task.x, task.test);
  std::vector<int> test_y;
  for (auto r : task.test) test_y.push_back(task.y[r]);
  const double min_weight = task.class_weights.minCoeff();

  std::vector<std::size_t> counts(k, 0);
  for (auto r : labelled) ++counts[static_cast<std::size_t>(task.y[r])];
  const std::vector<std::size_t> initial_counts = counts;

  std::vector<RoundRecord> records;
  std::optional<std::size_t> last_choice;
  for (std::size_t round = 0;; ++round) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Mat x_lab = rows_of(task.x, labelled);
      std::vector<int> y_lab;
      for (auto r : labelled) y_lab.push_back(task.y[r]);
      // The ensemble stream depends only on (seed, round) so that methods
      // differing only in acquisition see identical models.
      const std::uint64_t ens_seed = Rng(acq.seed).split("ensemble").split(static_cast<std::uint64_t>(round)).key();
      const auto ens = ensemble::train_ensemble(x_lab, y_lab, task.n_classes, model.n_trees, ens_seed, model.n_threads);

      Mat probs(test_x.rows(), task.n_classes);
      for (Eigen::Index i = 0; i < test_x.rows(); ++i) probs.row(i) = ens.posterior_predictive(test_x.row(i).transpose());
      const auto m = classification_metrics(probs, test_y, task.class_weights);

      RoundRecord rec;
      rec.round = round;
      rec.method = acquisition::to_string(acq.method);
      rec.chosen = last_choice;
      rec.metrics = {{"NLL", m.nll}, {"NLL_w", m.nll_w}};
      std::size_t acquired = 0, acquired_up = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const std::size_t a = counts[c] - initial_counts[c];
        acquired += a;
        if (task.class_weights[static_cast<Eigen::Index>(c)] > min_weight) acquired_up += a;
      }
      for (std::size_t c = 0; c < k; ++c) {
        const double share =
            acquired == 0 ? 0.0 : static_cast<double>(counts[c] - initial_counts[c]) / static_cast<double>(acquired);
        rec.metrics.push_back({"acq_share_class_" + std::to_string(c), share});
      }
      rec.metrics.push_back(
          {"acq_share_upweighted", acquired == 0 ? 0.0 : static_cast<double>(acquired_up) / static_cast<double>(acquired)});
      rec.class_counts = counts;
      rec.nll_clamped = m.clamped;

      if (round == n_rounds || unlabelled.empty()) {
        rec.truncated = round < n_rounds;
        rec.wall_seconds = seconds_since(t0);
        records.push_back(std::move(rec));
        break;
      }

      const Mat candidates = rows_of(task.x, unlabelled);
      std::size_t pick = 0;
      switch (acq.method) {
        case Method::Random:
          pick = acquisition::random_select(unlabelled.size(), acquisition_seed(acq.seed, round, acq.method));
          break;
        case Method::EPIG: pick = acquisition::epig_scores(ens, candidates, contexts).best; break;
        case Method::EPIGw:
          pick = acquisition::epig_weighted_scores(ens, candidates, contexts, task.class_weights).best;
          break;
        case Method::EVR:
        case Method::EVRw:
        case Method::Linex: throw ValidationError("GP methods need a regression task");
      }
      last_choice = unlabelled[pick];
      labelled.push_back(unlabelled[pick]);
      ++counts[static_cast<std::size_t>(task.y[unlabelled[pick]])];
      unlabelled.erase(unlabelled.begin() + static_cast<std::ptrdiff_t>(pick));
      rec.wall_seconds = seconds_since(t0);
      records.push_back(std::move(rec));
    } catch (const ValidationError&) {
      throw;
    } catch (const Error& e) {
      throw RunError(round, e.what());
    }
  }
  return records;
}

MeanSem mean_sem(std::span<const double> values) {
  MeanSem out;
  out.n = values.size();
  if (values.empty()) return out;
  double s = 0.0;
  for (double v : values) s += v;
  out.mean = s / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sem = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return out;
}

}  // namespace bal::loop

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


#include <benchmark/benchmark.h>

#include <vector>

#include "bal/acquisition.hpp"
#include "bal/datasets.hpp"
#include "bal/ensemble.hpp"
#include "bal/gp.hpp"
#include "bal/random.hpp"

namespace {

using namespace bal;

gp::GpPosterior synth_posterior(std::size_t n_labelled) {
  const auto task = datasets::synth_1d(0);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n_labelled; ++i) idx.push_back(i * 64 / n_labelled);
  Mat x(static_cast<Eigen::Index>(idx.size()), 1);
  Vec y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = task.pool_x(static_cast<Eigen::Index>(idx[i]), 0);
    y[static_cast<Eigen::Index>(i)] = task.label(idx[i]);
  }
  return gp::fit(gp::Kernel::rbf(1, 1), 0, 0.04, x, y);
}

void BM_GpFit(benchmark::State& state) {
  const auto n = state.range(0);
  Rng rng(1);
  Mat x(n, 4);
  Vec y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < 4; ++d) x(i, d) = rng.normal();
    y[i] = rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(gp::fit(gp::Kernel::matern(1.5, 1.0, 1.0), 0, 0.1, x, y));
}
BENCHMARK(BM_GpFit)->Arg(16)->Arg(64)->Arg(256);

void BM_EvrScores(benchmark::State& state) {
  const auto task = datasets::synth_1d(0);
  const auto post = synth_posterior(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(acquisition::evr_scores(post, task.pool_x, task.context_x));
}
BENCHMARK(BM_EvrScores)->Arg(3)->Arg(28);

void BM_EvrWeightedExp(benchmark::State& state) {
  const auto task = datasets::synth_1d(0);
  const auto post = synth_posterior(10);
  acquisition::McOptions opt;
  for (auto _ : state) {
    benchmark::DoNotOptimize(acquisition::evr_weighted_scores(post, task.pool_x, task.context_x,
                                                              losses::WeightFunction::exp_pos(1.0), opt));
  }
}
BENCHMARK(BM_EvrWeightedExp);

void BM_EvrWeightedGeneric(benchmark::State& state) {
  const auto task = datasets::synth_1d(0);
  const auto post = synth_posterior(10);
  acquisition::McOptions opt;
  const auto w = losses::WeightFunction::custom([](double z) { return 1.0 + z * z; }, "quadratic");
  for (auto _ : state) {
    benchmark::DoNotOptimize(acquisition::evr_weighted_scores(post, task.pool_x, task.context_x, w, opt));
  }
}
BENCHMARK(BM_EvrWeightedGeneric)->Unit(benchmark::kMillisecond);

datasets::ClassificationTask blob_task() {
  datasets::BlobOptions o;
  o.n_classes = 4;
  o.per_class = 200;
  o.dim = 18;
  o.separation = 0.5;
  o.split.per_class_test = 45;
  o.split.per_class_context = 45;
  return datasets::synth_blobs(o, 0);
}

void BM_TrainEnsemble(benchmark::State& state) {
  const auto task = blob_task();
  Mat x(static_cast<Eigen::Index>(task.pool.size()), task.x.cols());
  std::vector<int> y;
  for (std::size_t i = 0; i < task.pool.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = task.x.row(static_cast<Eigen::Index>(task.pool[i]));
    y.push_back(task.y[task.pool[i]]);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(ensemble::train_ensemble(x, y, 4, static_cast<std::size_t>(state.range(0)), 3, 1));
  }
}
BENCHMARK(BM_TrainEnsemble)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_EpigWeighted(benchmark::State& state) {
  const auto task = blob_task();
  auto rows = [&](const std::vector<std::size_t>& idx) {
    Mat m(static_cast<Eigen::Index>(idx.size()), task.x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = task.x.row(static_cast<Eigen::Index>(idx[i]));
    return m;
  };
  const Mat lab = rows(task.initial);
  std::vector<int> y;
  for (auto i : task.initial) y.push_back(task.y[i]);
  const auto ens = ensemble::train_ensemble(lab, y, 4, 100, 3, 1);
  const Mat cand = rows(task.pool), ctx = rows(task.contexts);
  const Vec w = Vec{{50.0, 1.0, 1.0, 50.0}};
  for (auto _ : state) benchmark::DoNotOptimize(acquisition::epig_weighted_scores(ens, cand, ctx, w));
}
BENCHMARK(BM_EpigWeighted)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

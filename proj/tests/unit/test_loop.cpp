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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "bal/datasets.hpp"
#include "bal/loop.hpp"

using namespace bal;
using namespace bal::loop;
using acquisition::AcquisitionConfig;
using acquisition::Method;
using losses::WeightFunction;

namespace {

datasets::ClassificationTask small_blobs(std::uint64_t seed, Vec weights = {}) {
  datasets::BlobOptions o;
  o.n_classes = 2;
  o.per_class = 60;
  o.dim = 3;
  o.separation = 0.7;
  o.split.per_class_test = 15;
  o.split.per_class_context = 15;
  o.split.n_initial_per_class = 3;
  o.split.class_weights = std::move(weights);
  o.data_seed = 0;
  return datasets::synth_blobs(o, seed);
}

AcquisitionConfig acq_config(Method m, std::uint64_t seed, WeightFunction w = WeightFunction::constant()) {
  AcquisitionConfig a;
  a.method = m;
  a.seed = seed;
  a.weight = std::move(w);
  a.n_y_draws = 16;
  a.n_z_draws = 32;
  return a;
}

}  // namespace

TEST_CASE("perfect predictions give zero squared error") {
  const Vec y = Vec{{0.3, -1.0, 2.0}};
  const auto m = regression_metrics(y, Vec::Ones(3), y, WeightFunction::constant(), 1.0);
  CHECK(m.sel == 0.0);
  CHECK(m.sel_w == 0.0);
  CHECK(m.sel_w_mean == 0.0);
}

TEST_CASE("unit weight makes weighted metrics equal the plain ones") {
  const Vec mean = Vec{{0.1, 0.5, -0.3, 1.2}}, var = Vec{{0.2, 0.1, 0.5, 0.3}}, y = Vec{{0.0, 1.0, -1.0, 1.0}};
  const auto m = regression_metrics(mean, var, y, WeightFunction::constant(), 1.0);
  CHECK(m.sel_w == doctest::Approx(m.sel).epsilon(1e-15));
  CHECK(m.sel_w_mean == doctest::Approx(m.sel).epsilon(1e-15));
  CHECK(m.nll_w == doctest::Approx(m.nll).epsilon(1e-15));
  double nll = 0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    nll += 0.5 * std::log(2 * std::numbers::pi * var[i]) + 0.5 * (y[i] - mean[i]) * (y[i] - mean[i]) / var[i];
  }
  CHECK(m.nll == doctest::Approx(nll / 4).epsilon(1e-14));
}

TEST_CASE("two-point weighted squared error") {
  const double e = std::exp(1.0);
  const Vec y = Vec{{0.0, 1.0}}, mean = Vec{{1.0, 3.0}};
  const auto m = regression_metrics(mean, Vec::Constant(2, 1e-14), y, WeightFunction::exp_pos(1.0), 1.0);
  CHECK(m.sel_w_mean == doctest::Approx((1 + 4 * e) / (1 + e)).epsilon(1e-14));
  // A vanishing predictive variance moves the weighted Bayes act to the mean.
  CHECK(m.sel_w == doctest::Approx((1 + 4 * e) / (1 + e)).epsilon(1e-10));
  CHECK(m.sel == doctest::Approx(2.5));
}

TEST_CASE("weighted squared error uses the weighted Bayes act") {
  const double alpha = 0.5, v = 0.4;
  const Vec y = Vec{{0.0}}, mean = Vec{{0.2}}, var = Vec{{v}};
  const auto m = regression_metrics(mean, var, y, WeightFunction::exp_pos(alpha), 1.0);
  CHECK(m.sel_w == doctest::Approx((0.2 + alpha * v) * (0.2 + alpha * v)).epsilon(1e-14));
  CHECK(m.sel_w_mean == doctest::Approx(0.04).epsilon(1e-14));
}

TEST_CASE("linex metric and clamping") {
  const auto m = regression_metrics(Vec{{0.0}}, Vec{{1.0}}, Vec{{0.0}}, WeightFunction::constant(), 2.0);
  // b = m - alpha v / 2 = -1, d = alpha (b - y) = -2.
  CHECK(m.linex == doctest::Approx(std::exp(-2.0) + 1.0).epsilon(1e-14));
  const auto far = regression_metrics(Vec{{0.0}}, Vec{{1e-4}}, Vec{{50.0}}, WeightFunction::constant(), 1.0);
  CHECK(far.clamped == 1);
  CHECK(far.nll == doctest::Approx(-std::log(1e-12)));
  CHECK_THROWS_AS(regression_metrics(Vec(0), Vec(0), Vec(0), WeightFunction::constant(), 1.0), ShapeError);
}

TEST_CASE("classification metrics") {
  Mat p(3, 2);
  p << 0.9, 0.1, 0.2, 0.8, 0.5, 0.5;
  const std::vector<int> labels{0, 1, 1};
  const auto m = classification_metrics(p, labels, Vec{{50.0, 1.0}});
  CHECK(m.nll == doctest::Approx(-(std::log(0.9) + std::log(0.8) + std::log(0.5)) / 3).epsilon(1e-14));
  CHECK(m.nll_w == doctest::Approx(-(50 * std::log(0.9) + std::log(0.8) + std::log(0.5)) / 52).epsilon(1e-14));
  CHECK(classification_metrics(p, labels, Vec::Ones(2)).nll_w == doctest::Approx(m.nll).epsilon(1e-15));
}

TEST_CASE("mean and standard error across seeds") {
  const std::vector<double> two{1.0, 3.0}, one{5.0};
  const auto a = mean_sem(two);
  CHECK(a.mean == 2.0);
  CHECK(a.sem == doctest::Approx(1.0));
  CHECK(a.n == 2);
  const auto b = mean_sem(one);
  CHECK(b.mean == 5.0);
  CHECK(b.sem == 0.0);
}

TEST_CASE("acquisition seeds are isolated by method and round") {
  CHECK(acquisition_seed(3, 1, Method::EVR) == acquisition_seed(3, 1, Method::EVR));
  CHECK(acquisition_seed(3, 1, Method::EVR) != acquisition_seed(3, 1, Method::EVRw));
  CHECK(acquisition_seed(3, 1, Method::EVR) != acquisition_seed(3, 2, Method::EVR));
  CHECK(acquisition_seed(3, 1, Method::EVR) != acquisition_seed(4, 1, Method::EVR));
}

TEST_CASE("zero rounds evaluate the initial model only") {
  const auto task = datasets::synth_1d(0);
  const auto r = run_regression(task, {}, acq_config(Method::EVR, 1), {}, 0);
  REQUIRE(r.size() == 1);
  CHECK(r[0].round == 0);
  CHECK(!r[0].chosen);
  CHECK(!r[0].truncated);
  CHECK(std::isfinite(r[0].metric("SEL")));
  CHECK_THROWS_AS(r[0].metric("accuracy"), std::out_of_range);
  const auto c = run_classification(small_blobs(0), {10, 1}, acq_config(Method::EPIG, 1), 0);
  REQUIRE(c.size() == 1);
  CHECK(c[0].class_counts == std::vector<std::size_t>{3, 3});
}

TEST_CASE("regression bookkeeping") {
  const auto task = datasets::synth_1d(2);
  for (Method m : {Method::Random, Method::EVR, Method::EVRw, Method::Linex}) {
    auto acq = acq_config(m, 5, WeightFunction::exp_pos(0.5));
    const auto r = run_regression(task, {}, acq, {WeightFunction::exp_pos(0.5), 1.0}, 6);
    REQUIRE(r.size() == 7);
    std::set<std::size_t> seen(task.initial.begin(), task.initial.end());
    for (std::size_t i = 1; i < r.size(); ++i) {
      CHECK(r[i].round == i);
      REQUIRE(r[i].chosen.has_value());
      CHECK(*r[i].chosen < 65);
      CHECK(seen.insert(*r[i].chosen).second);
      for (const auto& metric : r[i].metrics) CHECK(std::isfinite(metric.value));
    }
    CHECK(seen.size() == task.initial.size() + 6);
    const auto again = run_regression(task, {}, acq, {WeightFunction::exp_pos(0.5), 1.0}, 6);
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(r[i].chosen == again[i].chosen);
      CHECK(r[i].metric("SEL") == again[i].metric("SEL"));
    }
  }
}

TEST_CASE("robust hyperparameters run on a tabular task") {
  Mat x(40, 2);
  Vec y(40);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = std::sin(i * 0.7);
    x(i, 1) = std::cos(i * 1.3);
    y[i] = x(i, 0) - 0.5 * x(i, 1) * x(i, 1);
  }
  datasets::CsvRegressionOptions o;
  o.test_size = 10;
  o.n_initial = 5;
  const auto task = datasets::make_regression_task("toy", x, y, o, 1);
  RegressionModelConfig model;
  model.mode = RegressionModelConfig::Hyperparameters::Robust;
  const auto r = run_regression(task, model, acq_config(Method::EVR, 2), {}, 4);
  CHECK(r.size() == 5);
  for (const auto& rec : r) CHECK(std::isfinite(rec.metric("NLL")));
}

TEST_CASE("runs stop early when the pool is exhausted") {
  Mat x(6, 1);
  Vec y(6);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = i;
    y[i] = 0.1 * i;
  }
  datasets::CsvRegressionOptions o;
  o.test_size = 2;
  o.n_initial = 1;
  o.n_contexts = 2;
  const auto task = datasets::make_regression_task("tiny", x, y, o, 0);
  const auto r = run_regression(task, {}, acq_config(Method::EVR, 0), {}, 10);
  REQUIRE(r.size() == 4);
  CHECK(r.back().truncated);
  CHECK(r.back().round == 3);
  for (std::size_t i = 0; i + 1 < r.size(); ++i) CHECK(!r[i].truncated);
}

TEST_CASE("classification-only methods are rejected for regression") {
  const auto task = datasets::synth_1d(0);
  CHECK_THROWS(run_regression(task, {}, acq_config(Method::EPIG, 0), {}, 2));
  CHECK_THROWS(run_classification(small_blobs(0), {10, 1}, acq_config(Method::EVR, 0), 2));
}

TEST_CASE("unit-weight EPIG_w records equal EPIG records") {
  const auto task = small_blobs(3);
  const auto a = run_classification(task, {20, 1}, acq_config(Method::EPIG, 9), 5);
  const auto b = run_classification(task, {20, 1}, acq_config(Method::EPIGw, 9), 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].chosen == b[i].chosen);
    CHECK(a[i].class_counts == b[i].class_counts);
    REQUIRE(a[i].metrics.size() == b[i].metrics.size());
    for (std::size_t k = 0; k < a[i].metrics.size(); ++k) CHECK(a[i].metrics[k].value == b[i].metrics[k].value);
  }
}

TEST_CASE("classification bookkeeping") {
  const auto task = small_blobs(4, Vec{{50.0, 1.0}});
  const auto r = run_classification(task, {15, 1}, acq_config(Method::EPIGw, 1), 8);
  REQUIRE(r.size() == 9);
  std::set<std::size_t> seen(task.initial.begin(), task.initial.end());
  for (const auto& rec : r) {
    std::size_t total = 0;
    for (auto c : rec.class_counts) total += c;
    CHECK(total == task.initial.size() + rec.round);
    if (rec.round > 0) {
      CHECK(seen.insert(*rec.chosen).second);
      const double s0 = rec.metric("acq_share_class_0"), s1 = rec.metric("acq_share_class_1");
      CHECK(s0 + s1 == doctest::Approx(1.0));
      CHECK(rec.metric("acq_share_upweighted") == s0);
    }
  }
}

namespace {

double mean_final_share(int n_classes, const Vec& weights, Method method, const char* metric) {
  double share = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    datasets::BlobOptions o;
    o.n_classes = n_classes;
    o.per_class = 60;
    o.dim = 3;
    o.separation = 0.7;
    o.split.per_class_test = 15;
    o.split.per_class_context = 15;
    o.split.n_initial_per_class = 5;
    o.split.class_weights = weights;
    o.data_seed = 0;
    const auto task = datasets::synth_blobs(o, static_cast<std::uint64_t>(100 + s));
    const auto r = run_classification(task, {50, 1}, acq_config(method, static_cast<std::uint64_t>(s)), 20);
    share += r.back().metric(metric) / seeds;
  }
  return share;
}

}  // namespace

TEST_CASE("upweighted classes receive a larger share of acquisitions") {
  const Vec w = Vec{{50.0, 1.0, 1.0, 50.0}};
  const double share_w = mean_final_share(4, w, Method::EPIGw, "acq_share_upweighted");
  const double share_u = mean_final_share(4, w, Method::EPIG, "acq_share_upweighted");
  MESSAGE("upweighted share EPIG_w " << share_w << " vs EPIG " << share_u);
  CHECK(share_w > share_u);
}

TEST_CASE("two-class upweighting shifts acquisitions towards class 0") {
  const Vec w = Vec{{50.0, 1.0}};
  const double share_w = mean_final_share(2, w, Method::EPIGw, "acq_share_class_0");
  const double share_u = mean_final_share(2, w, Method::EPIG, "acq_share_class_0");
  MESSAGE("class-0 share EPIG_w " << share_w << " vs EPIG " << share_u);
  CHECK(share_w > share_u);
}

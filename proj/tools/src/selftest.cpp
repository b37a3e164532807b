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

// Quick invariant checks that run against the installed library without
// the test framework.

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "bal/acquisition.hpp"
#include "bal/beliefs.hpp"
#include "bal/datasets.hpp"
#include "bal/ensemble.hpp"
#include "bal/gp.hpp"
#include "bal/losses.hpp"
#include "bal/random.hpp"
#include "commands.hpp"

namespace bal::cli {

namespace {

using losses::DiscreteBelief;
using losses::WeightedBregmanLoss;
using losses::WeightFunction;

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

Mat random_inputs(Rng rng, Eigen::Index n, Eigen::Index d) {
  Mat x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = 4.0 * rng.split(static_cast<std::uint64_t>(i * d + j)).uniform() - 2.0;
  return x;
}

bool shannon_reduction() {
  const std::vector<Vec> support = {Vec::Constant(1, 0), Vec::Constant(1, 1), Vec::Constant(1, 2)};
  const Vec p = Vec{{0.2, 0.5, 0.3}};
  const double h = losses::generalised_entropy(WeightedBregmanLoss::log_loss(3), DiscreteBelief(support, p));
  double ref = 0.0;
  for (double q : p) ref -= q * std::log(q);
  return close(h, ref, 1e-12);
}

bool weighted_bayes_act() {
  const auto loss = WeightedBregmanLoss::squared_error(WeightFunction::exp_pos(1.0));
  const auto act = losses::bayes_act(loss, DiscreteBelief::uniform({0.0, 1.0}));
  return close(act.transformed[0], std::exp(1.0) / (1.0 + std::exp(1.0)), 1e-12);
}

/// Posterior variances at the contexts after adding (x+, anything) by refit.
Vec refit_variances(const gp::GpPosterior& post, const Vec& x_plus, const Mat& contexts) {
  Mat x(post.size() + 1, post.dim());
  x.topRows(post.size()) = post.inputs();
  x.row(post.size()) = x_plus.transpose();
  Vec y(post.size() + 1);
  y.head(post.size()) = post.targets();
  y[post.size()] = 0.3;
  return gp::fit(post.kernel(), post.mean_const(), post.noise_var(), x, y).predict(contexts).var;
}

bool one_step_matches_refit() {
  Rng rng(11);
  const Mat x = random_inputs(rng.split("x"), 6, 2);
  const Vec y = random_inputs(rng.split("y"), 6, 1).col(0);
  const Mat ctx = random_inputs(rng.split("c"), 5, 2);
  const Vec xp = random_inputs(rng.split("p"), 1, 2).row(0).transpose();
  const auto post = gp::fit(gp::Kernel::rbf(0.8, 1.3), 0.1, 0.05, x, y);
  const auto upd = gp::one_step_update(post, xp, ctx);
  return (upd.v_next - refit_variances(post, xp, ctx)).cwiseAbs().maxCoeff() < 1e-8;
}

bool evr_matches_refit() {
  Rng rng(12);
  const Mat x = random_inputs(rng.split("x"), 5, 1);
  const Vec y = random_inputs(rng.split("y"), 5, 1).col(0);
  const Mat ctx = random_inputs(rng.split("c"), 7, 1);
  const Mat cand = random_inputs(rng.split("p"), 4, 1);
  const auto post = gp::fit(gp::Kernel::rbf(1.0, 1.0), 0.0, 0.04, x, y);
  const auto report = acquisition::evr_scores(post, cand, ctx);
  const Vec v0 = post.predict(ctx).var;
  for (Eigen::Index p = 0; p < cand.rows(); ++p) {
    const double ref = (v0 - refit_variances(post, cand.row(p).transpose(), ctx)).mean();
    if (!close(report.scores[p], ref, 1e-8)) return false;
  }
  return true;
}

bool analytic_matches_quadrature() {
  const beliefs::GaussianBelief b{0.4, 0.7};
  const auto a = beliefs::weighted_gaussian_summary_analytic(b, 0.9);
  const auto q = beliefs::weighted_gaussian_summary_quadrature(b, WeightFunction::exp_pos(0.9));
  return close(a.w_bar, q.w_bar, 1e-6 * a.w_bar) && close(a.mu_w, q.mu_w, 1e-6) && close(a.u_w, q.u_w, 1e-6 * a.w_bar);
}

bool epig_unit_weights_reduce() {
  // Two members, two classes, one context and one candidate.
  const Mat ctx = Mat{{0.9, 0.1}, {0.3, 0.7}};
  const Mat cand = Mat{{0.2, 0.8}, {0.6, 0.4}};
  const double score = acquisition::epig_weighted_from_member_probs(ctx, cand, 2, Vec::Ones(2))[0];
  double ref = 0.0;
  for (int z = 0; z < 2; ++z) {
    for (int y = 0; y < 2; ++y) {
      const double pzy = 0.5 * (ctx(0, z) * cand(0, y) + ctx(1, z) * cand(1, y));
      const double pz = 0.5 * (ctx(0, z) + ctx(1, z));
      const double py = 0.5 * (cand(0, y) + cand(1, y));
      ref += pzy * std::log(pzy / (pz * py));
    }
  }
  return close(score, ref, 1e-12);
}

bool task_determinism() {
  const auto a = datasets::synth_1d(5);
  const auto b = datasets::synth_1d(5);
  return a.pool_y == b.pool_y && a.test_y == b.test_y && a.initial == b.initial;
}

bool result_formatting_round_trips() {
  for (double v : {0.1, 1.0 / 3.0, 72.06, 1e-300, -2.5e17}) {
    if (std::stod(format_double(v)) != v) return false;
  }
  return true;
}

}  // namespace

int cmd_selftest(std::ostream& out) {
  const std::vector<std::pair<std::string, std::function<bool()>>> checks = {
      {"shannon_reduction", shannon_reduction},
      {"weighted_bayes_act", weighted_bayes_act},
      {"one_step_matches_refit", one_step_matches_refit},
      {"evr_matches_refit", evr_matches_refit},
      {"analytic_matches_quadrature", analytic_matches_quadrature},
      {"epig_unit_weights_reduce", epig_unit_weights_reduce},
      {"task_determinism", task_determinism},
      {"result_formatting_round_trips", result_formatting_round_trips},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    bool ok = false;
    try {
      ok = check();
    } catch (const std::exception& e) {
      out << "error " << name << ": " << e.what() << '\n';
    }
    out << (ok ? "ok   " : "FAIL ") << name << '\n';
    failed += ok ? 0 : 1;
  }
  out << (checks.size() - static_cast<std::size_t>(failed)) << '/' << checks.size() << " checks passed\n";
  return failed == 0 ? kOk : kFailure;
}

}  // namespace bal::cli

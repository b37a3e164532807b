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

#include "bal/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bal/beliefs.hpp"
#include "bal/random.hpp"

namespace bal::acquisition {

using beliefs::GaussianBelief;

std::string to_string(Method m) {
  switch (m) {
    case Method::Random: return "Random";
    case Method::EVR: return "EVR";
    case Method::EVRw: return "EVRw";
    case Method::EPIG: return "EPIG";
    case Method::EPIGw: return "EPIGw";
    case Method::Linex: return "Linex";
  }
  return "?";
}

Method method_from_string(std::string_view name) {
  for (auto m : {Method::Random, Method::EVR, Method::EVRw, Method::EPIG, Method::EPIGw, Method::Linex}) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown acquisition method '" + std::string(name) + "'");
}

std::size_t argmax_lowest(const Vec& scores) {
  if (scores.size() == 0) throw InsufficientDataError("cannot select from an empty pool");
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

std::size_t select_next(const ScoreReport& report) { return argmax_lowest(report.scores); }

std::size_t random_select(std::size_t pool_size, std::uint64_t seed) {
  if (pool_size == 0) throw InsufficientDataError("cannot select from an empty pool");
  Rng rng(seed);
  return static_cast<std::size_t>(rng.uniform_index(pool_size));
}

namespace {

ScoreReport finish(Vec scores, Mat per_context, Vec std_errors = {}) {
  ScoreReport r;
  r.best = argmax_lowest(scores);
  r.scores = std::move(scores);
  r.per_context = std::move(per_context);
  r.std_errors = std::move(std_errors);
  return r;
}

void require_contexts(const Mat& contexts) {
  if (contexts.rows() == 0) throw InsufficientDataError("acquisition needs at least one context");
}

/// Quantities shared by the regression scorers for one round.
struct GpRoundCache {
  gp::Prediction at_contexts;
  gp::Prediction at_candidates;
  Mat s;  ///< contexts x candidates
};

GpRoundCache cache_round(const gp::GpPosterior& post, const Mat& candidates, const Mat& contexts) {
  require_contexts(contexts);
  if (candidates.rows() == 0) throw InsufficientDataError("cannot score an empty pool");
  return {post.predict(contexts), post.predict(candidates), post.cross_cov(contexts, candidates)};
}

double next_variance(double v_now, double s, double tau_sq) {
  const double v = v_now - s * s / tau_sq;
  if (v < -1e-10) throw NumericalError("one-step posterior variance is negative (" + std::to_string(v) + ")");
  return std::max(v, 0.0);
}

struct Draws {
  std::vector<double> eta;  ///< label noise, J
  std::vector<double> eps;  ///< output noise, S
};

Draws make_draws(const McOptions& o, std::uint64_t stream) {
  if (o.n_y_draws == 0 || o.n_z_draws == 0) throw DomainError("Monte Carlo draw counts must be positive");
  Rng rng = Rng(o.seed).split(stream);
  Draws d;
  d.eta = rng.split("eta").normals(o.n_y_draws);
  d.eps = rng.split("eps").normals(o.n_z_draws);
  return d;
}

/// Mean over y-draws of the self-normalised weighted dispersion of
/// z_ij = a_j + b eps_i. Fills `per_draw` with each y-draw's value and
/// `per_eps` with each z-draw's term averaged over y-draws.
double weighted_post_term(const losses::WeightFunction& w, const std::vector<double>& a, double b,
                          const std::vector<double>& eps, std::vector<double>& per_draw,
                          std::vector<double>& per_eps) {
  const auto s_count = static_cast<double>(eps.size());
  const auto j_count = static_cast<double>(a.size());
  per_draw.resize(a.size());
  per_eps.assign(eps.size(), 0.0);
  if (b == 0.0) {
    std::fill(per_draw.begin(), per_draw.end(), 0.0);
    return 0.0;
  }
  if (const auto beta = w.exponent()) {
    // w(a + b e) = scale exp(beta a) exp(beta b e): the inner sum depends on
    // the draw only through a multiplicative factor.
    double shift = -std::numeric_limits<double>::infinity();
    for (double e : eps) shift = std::max(shift, *beta * b * e);
    double sum_e = 0.0, sum_ee = 0.0;
    std::vector<double> ex(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
      ex[i] = std::exp(*beta * b * eps[i] - shift);
      sum_e += ex[i];
      sum_ee += ex[i] * eps[i];
    }
    const double eps_bar = sum_ee / sum_e;
    double disp = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) disp += ex[i] * (eps[i] - eps_bar) * (eps[i] - eps_bar);
    disp *= b * b / s_count;
    double total = 0.0, factor = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double f = w.scale() * std::exp(*beta * a[j] + shift);
      per_draw[j] = f * disp;
      total += per_draw[j];
      factor += f;
    }
    for (std::size_t i = 0; i < eps.size(); ++i) {
      per_eps[i] = factor / j_count * ex[i] * (eps[i] - eps_bar) * (eps[i] - eps_bar) * b * b;
    }
    return total / j_count;
  }
  double total = 0.0;
  std::vector<double> wz(eps.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    double sw = 0.0, swz = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
      const double z = a[j] + b * eps[i];
      wz[i] = w(z);
      sw += wz[i];
      swz += wz[i] * z;
    }
    double val = 0.0;
    if (sw > 0.0) {
      const double mu = swz / sw;
      for (std::size_t i = 0; i < eps.size(); ++i) {
        const double d = a[j] + b * eps[i] - mu;
        val += wz[i] * d * d;
        per_eps[i] += wz[i] * d * d / j_count;
      }
      val /= s_count;
    }
    per_draw[j] = val;
    total += val;
  }
  return total / j_count;
}

/// Squared standard error of the mean of `v`.
double mean_variance(const Vec& v) {
  const auto n = static_cast<double>(v.size());
  if (n < 2) return 0.0;
  return (v.array() - v.mean()).square().sum() / (n - 1.0) / n;
}

}  // namespace

ScoreReport evr_scores(const gp::GpPosterior& post, const Mat& candidates, const Mat& contexts) {
  const auto cache = cache_round(post, candidates, contexts);
  const auto m = static_cast<double>(contexts.rows());
  Mat contrib(contexts.rows(), candidates.rows());
  for (Eigen::Index p = 0; p < candidates.rows(); ++p) {
    const double tau_sq = cache.at_candidates.var[p] + post.noise_var();
    contrib.col(p) = cache.s.col(p).array().square() / tau_sq;
  }
  Vec scores = contrib.colwise().sum().transpose() / m;
  return finish(std::move(scores), std::move(contrib));
}

ScoreReport evr_weighted_scores(const gp::GpPosterior& post, const Mat& candidates, const Mat& contexts,
                                const losses::WeightFunction& weight, const McOptions& options) {
  if (weight.kind() == losses::WeightFunction::Kind::Constant) {
    ScoreReport r = evr_scores(post, candidates, contexts);
    r.scores *= weight.scale();
    r.per_context *= weight.scale();
    r.std_errors = Vec::Zero(r.scores.size());
    return r;
  }
  const auto cache = cache_round(post, candidates, contexts);
  const Eigen::Index n_ctx = contexts.rows();
  const auto m = static_cast<double>(n_ctx);

  Vec pre(n_ctx);
  for (Eigen::Index c = 0; c < n_ctx; ++c) {
    pre[c] = beliefs::weighted_gaussian_summary({cache.at_contexts.mean[c], cache.at_contexts.var[c]}, weight).u_w;
  }

  const Draws shared = make_draws(options, 0);
  Mat contrib(n_ctx, candidates.rows());
  Vec scores(candidates.rows()), se(candidates.rows());
  std::vector<double> a(options.n_y_draws), per_draw, per_eps;
  Vec draw_total(static_cast<Eigen::Index>(options.n_y_draws));
  Vec eps_total(static_cast<Eigen::Index>(options.n_z_draws));

  for (Eigen::Index p = 0; p < candidates.rows(); ++p) {
    const Draws own = options.common_random_numbers ? Draws{} : make_draws(options, static_cast<std::uint64_t>(p) + 1);
    const Draws& d = options.common_random_numbers ? shared : own;
    const double tau_sq = cache.at_candidates.var[p] + post.noise_var();
    const double tau = std::sqrt(tau_sq);
    draw_total.setZero();
    eps_total.setZero();
    for (Eigen::Index c = 0; c < n_ctx; ++c) {
      const double s = cache.s(c, p);
      const double beta = s / tau_sq;
      const double b = std::sqrt(next_variance(cache.at_contexts.var[c], s, tau_sq));
      for (std::size_t j = 0; j < a.size(); ++j) a[j] = cache.at_contexts.mean[c] + beta * tau * d.eta[j];
      const double post_term = weighted_post_term(weight, a, b, d.eps, per_draw, per_eps);
      contrib(c, p) = pre[c] - post_term;
      for (std::size_t j = 0; j < a.size(); ++j) draw_total[static_cast<Eigen::Index>(j)] += pre[c] - per_draw[j];
      for (std::size_t i = 0; i < per_eps.size(); ++i) eps_total[static_cast<Eigen::Index>(i)] -= per_eps[i];
    }
    draw_total /= m;
    eps_total /= m;
    scores[p] = draw_total.mean();
    // Crossed design: y-draws and z-draws are shared, so both margins contribute.
    se[p] = std::sqrt(mean_variance(draw_total) + mean_variance(eps_total));
  }
  return finish(std::move(scores), std::move(contrib), std::move(se));
}

ScoreReport eur_scores(const gp::GpPosterior& post, const Mat& candidates, const Mat& contexts,
                       const losses::WeightedBregmanLoss& loss, const McOptions& options) {
  const auto cache = cache_round(post, candidates, contexts);
  const Eigen::Index n_ctx = contexts.rows();
  Vec pre(n_ctx);
  for (Eigen::Index c = 0; c < n_ctx; ++c) {
    pre[c] = beliefs::gaussian_generalised_entropy(loss, {cache.at_contexts.mean[c], cache.at_contexts.var[c]});
  }
  const Draws d = make_draws(options, 0);
  Mat contrib(n_ctx, candidates.rows());
  for (Eigen::Index p = 0; p < candidates.rows(); ++p) {
    const double tau_sq = cache.at_candidates.var[p] + post.noise_var();
    const double tau = std::sqrt(tau_sq);
    for (Eigen::Index c = 0; c < n_ctx; ++c) {
      const double s = cache.s(c, p);
      const double v_next = next_variance(cache.at_contexts.var[c], s, tau_sq);
      double post_term = 0.0;
      if (v_next > 0.0) {
        for (double eta : d.eta) {
          const double mean = cache.at_contexts.mean[c] + s / tau_sq * tau * eta;
          post_term += beliefs::gaussian_generalised_entropy(loss, {mean, v_next});
        }
        post_term /= static_cast<double>(d.eta.size());
      }
      contrib(c, p) = pre[c] - post_term;
    }
  }
  Vec scores = contrib.colwise().sum().transpose() / static_cast<double>(n_ctx);
  return finish(std::move(scores), std::move(contrib));
}

Vec epig_weighted_from_member_probs(const Mat& context_probs, const Mat& candidate_probs, int n_classes,
                                    const Vec& class_weights, Mat* per_context) {
  const Eigen::Index k = n_classes;
  if (context_probs.rows() != candidate_probs.rows() || context_probs.rows() == 0) {
    throw ShapeError("context and candidate member tables need the same positive member count");
  }
  if (context_probs.cols() % k != 0 || candidate_probs.cols() % k != 0 || class_weights.size() != k) {
    throw ShapeError("member tables or class weights do not match the class count");
  }
  if (!(class_weights.minCoeff() > 0.0)) throw InvalidWeightError("class weights must be positive");
  const Eigen::Index n_ctx = context_probs.cols() / k;
  const Eigen::Index n_cand = candidate_probs.cols() / k;
  if (n_ctx == 0) throw InsufficientDataError("weighted EPIG needs at least one context");
  const auto n_members = static_cast<double>(context_probs.rows());

  // p_w(z | c) for every context.
  const Vec marginal = context_probs.colwise().mean().transpose();
  Mat pw(k, n_ctx);
  for (Eigen::Index c = 0; c < n_ctx; ++c) {
    pw.col(c) = marginal.segment(c * k, k).cwiseProduct(class_weights);
    pw.col(c) /= pw.col(c).sum();
  }

  Vec scores = Vec::Zero(n_cand);
  if (per_context) per_context->resize(n_ctx, n_cand);
  constexpr Eigen::Index kChunk = 256;
  for (Eigen::Index start = 0; start < n_cand; start += kChunk) {
    const Eigen::Index len = std::min(kChunk, n_cand - start);
    // Rows (c, z), columns (x, y): p_hat(z, y | c, x).
    const Mat joint = context_probs.transpose() * candidate_probs.middleCols(start * k, len * k) / n_members;
    for (Eigen::Index p = 0; p < len; ++p) {
      for (Eigen::Index c = 0; c < n_ctx; ++c) {
        const auto block = joint.block(c * k, p * k, k, k);
        double total = 0.0;
        for (Eigen::Index y = 0; y < k; ++y) {
          double wy = 0.0;
          for (Eigen::Index z = 0; z < k; ++z) wy += class_weights[z] * block(z, y);
          for (Eigen::Index z = 0; z < k; ++z) {
            const double wj = class_weights[z] * block(z, y);
            if (wj == 0.0) continue;
            const double denom = pw(z, c) * wy;
            if (!(wj > 0.0) || !(denom > 0.0)) throw NumericalError("weighted EPIG log argument is not positive");
            total += wj * std::log(wj / denom);
          }
        }
        if (per_context) (*per_context)(c, start + p) = total;
        scores[start + p] += total;
      }
    }
  }
  return scores / static_cast<double>(n_ctx);
}

ScoreReport epig_weighted_scores(const ensemble::TreeEnsemble& ens, const Mat& candidates, const Mat& contexts,
                                 const Vec& class_weights) {
  require_contexts(contexts);
  if (candidates.rows() == 0) throw InsufficientDataError("cannot score an empty pool");
  Mat per_context;
  Vec scores = epig_weighted_from_member_probs(ens.member_probs_batch(contexts), ens.member_probs_batch(candidates),
                                               ens.n_classes(), class_weights, &per_context);
  return finish(std::move(scores), std::move(per_context));
}

ScoreReport epig_scores(const ensemble::TreeEnsemble& ens, const Mat& candidates, const Mat& contexts) {
  return epig_weighted_scores(ens, candidates, contexts, Vec::Ones(ens.n_classes()));
}

namespace {

void check_model(const DiscreteJointModel& m) {
  const auto n_c = m.p_c.size();
  if (m.p_z_given_c.rows() != n_c || static_cast<Eigen::Index>(m.p_y_given_zc.size()) != n_c) {
    throw ShapeError("discrete model tables disagree on the number of contexts");
  }
  if (static_cast<Eigen::Index>(m.z_support.size()) != m.p_z_given_c.cols()) {
    throw ShapeError("world-state support does not match p(z | c)");
  }
  for (const auto& t : m.p_y_given_zc) {
    if (t.rows() != m.p_z_given_c.cols()) throw ShapeError("p(y | z, c) has the wrong number of rows");
  }
}

}  // namespace

double discrete_epu(const DiscreteJointModel& model, const losses::WeightedBregmanLoss& loss) {
  check_model(model);
  double epu = 0.0;
  for (Eigen::Index c = 0; c < model.p_c.size(); ++c) {
    if (model.p_c[c] == 0.0) continue;
    const Vec pz = model.p_z_given_c.row(c).transpose();
    const Mat& py = model.p_y_given_zc[static_cast<std::size_t>(c)];
    for (Eigen::Index y = 0; y < py.cols(); ++y) {
      const Vec joint = pz.cwiseProduct(py.col(y));
      const double p_y = joint.sum();
      if (p_y <= 0.0) continue;
      const auto posterior = losses::DiscreteBelief::from_masses(model.z_support, joint);
      epu += model.p_c[c] * p_y * losses::generalised_entropy(loss, posterior);
    }
  }
  return epu;
}

double discrete_eur(const DiscreteJointModel& model, const losses::WeightedBregmanLoss& loss) {
  check_model(model);
  double prior = 0.0;
  for (Eigen::Index c = 0; c < model.p_c.size(); ++c) {
    if (model.p_c[c] == 0.0) continue;
    const Vec pz = model.p_z_given_c.row(c).transpose();
    prior += model.p_c[c] * losses::generalised_entropy(loss, losses::DiscreteBelief::from_masses(model.z_support, pz));
  }
  return prior - discrete_epu(model, loss);
}

}  // namespace bal::acquisition

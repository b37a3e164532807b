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

#include "bal/beliefs.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "bal/random.hpp"

namespace bal::beliefs {

using losses::Potential;
using losses::Transform;
using losses::WeightFunction;

namespace {

void require_valid(const GaussianBelief& b) {
  if (!std::isfinite(b.mean) || !(b.var > 0.0) || !std::isfinite(b.var)) {
    throw DomainError("Gaussian belief needs a finite mean and positive finite variance");
  }
}

}  // namespace

WeightedGaussianSummary weighted_gaussian_summary_analytic(const GaussianBelief& belief, double alpha) {
  require_valid(belief);
  const double w_bar = std::exp(alpha * belief.mean + 0.5 * alpha * alpha * belief.var);
  return {w_bar, belief.mean + alpha * belief.var, w_bar * belief.var};
}

WeightedGaussianSummary weighted_gaussian_summary_analytic(const GaussianBelief& belief,
                                                           const WeightFunction& weight) {
  const auto beta = weight.exponent();
  if (!beta) throw UnsupportedWeightError("no closed form for weight " + weight.name() + "; use the MC path");
  auto s = weighted_gaussian_summary_analytic(belief, *beta);
  s.w_bar *= weight.scale();
  s.u_w *= weight.scale();
  return s;
}

McWeightedGaussianSummary weighted_gaussian_summary_mc(const GaussianBelief& belief, const WeightFunction& weight,
                                                       std::size_t n_samples, std::uint64_t seed) {
  require_valid(belief);
  if (n_samples < 2) throw DomainError("MC summary needs at least two samples");
  Rng rng(seed);
  const double sd = std::sqrt(belief.var);
  std::vector<double> z(n_samples), w(n_samples);
  double sum_w = 0.0, sum_wz = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    z[i] = belief.mean + sd * rng.normal();
    w[i] = weight(z[i]);
    if (w[i] < 0.0 || !std::isfinite(w[i])) throw InvalidWeightError("weight must be nonnegative and finite");
    sum_w += w[i];
    sum_wz += w[i] * z[i];
  }
  if (!(sum_w > 0.0)) throw DegenerateBeliefError("all MC weights are zero");
  const auto s = static_cast<double>(n_samples);
  McWeightedGaussianSummary out;
  out.n_samples = n_samples;
  out.w_bar = sum_w / s;
  out.mu_w = sum_wz / sum_w;
  double sum_g = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) sum_g += w[i] * (z[i] - out.mu_w) * (z[i] - out.mu_w);
  out.u_w = sum_g / s;

  // Standard errors: plain means for w_bar and u_w (the derivative of u_w in
  // mu vanishes at mu_w), ratio delta method for mu_w.
  double ss_w = 0.0, ss_g = 0.0, ss_ratio = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double dw = w[i] - out.w_bar;
    const double g = w[i] * (z[i] - out.mu_w) * (z[i] - out.mu_w);
    const double r = w[i] * (z[i] - out.mu_w);
    ss_w += dw * dw;
    ss_g += (g - out.u_w) * (g - out.u_w);
    ss_ratio += r * r;
  }
  out.se_w_bar = std::sqrt(ss_w / (s - 1.0) / s);
  out.se_u_w = std::sqrt(ss_g / (s - 1.0) / s);
  out.se_mu_w = std::sqrt(ss_ratio / (s - 1.0) / s) / out.w_bar;
  return out;
}

losses::DiscreteBelief discretise(const GaussianBelief& belief, std::size_t n_atoms, double half_width) {
  require_valid(belief);
  if (n_atoms < 3) throw DomainError("discretisation needs at least three atoms");
  const double sd = std::sqrt(belief.var);
  const double lo = belief.mean - half_width * sd;
  const double step = 2.0 * half_width * sd / static_cast<double>(n_atoms - 1);
  std::vector<Vec> support(n_atoms);
  Vec mass(static_cast<Eigen::Index>(n_atoms));
  for (std::size_t k = 0; k < n_atoms; ++k) {
    const double z = lo + step * static_cast<double>(k);
    const double u = (z - belief.mean) / sd;
    support[k] = Vec::Constant(1, z);
    const double trap = (k == 0 || k + 1 == n_atoms) ? 0.5 : 1.0;
    mass[static_cast<Eigen::Index>(k)] = trap * std::exp(-0.5 * u * u);
  }
  return losses::DiscreteBelief::from_masses(std::move(support), mass);
}

WeightedGaussianSummary weighted_gaussian_summary_quadrature(const GaussianBelief& belief,
                                                             const WeightFunction& weight, std::size_t n_atoms) {
  const auto grid = discretise(belief, n_atoms);
  const auto m = losses::reweight(weight, grid);
  double mu = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) mu += m.q_w[static_cast<Eigen::Index>(k)] * grid.support()[k][0];
  double var = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double d = grid.support()[k][0] - mu;
    var += m.q_w[static_cast<Eigen::Index>(k)] * d * d;
  }
  return {m.w_bar, mu, m.w_bar * var};
}

WeightedGaussianSummary weighted_gaussian_summary(const GaussianBelief& belief, const WeightFunction& weight) {
  if (weight.exponent()) return weighted_gaussian_summary_analytic(belief, weight);
  return weighted_gaussian_summary_quadrature(belief, weight);
}

double gaussian_generalised_entropy(const losses::WeightedBregmanLoss& loss, const GaussianBelief& belief) {
  require_valid(belief);
  const auto beta = loss.weight.exponent();
  if (beta) {
    // Exponential tilting keeps the belief Gaussian: p_w = N(m + beta v, v).
    const auto s = weighted_gaussian_summary_analytic(belief, loss.weight);
    const bool scalar_quadratic =
        loss.potential.kind() == Potential::Kind::Quadratic && loss.transform.kind() == Transform::Kind::Identity;
    if (scalar_quadratic) return s.u_w;
    const bool linex =
        loss.potential.kind() == Potential::Kind::NegLog && loss.transform.kind() == Transform::Kind::NegExp;
    if (linex) {
      const double a = loss.transform.parameter();
      return s.w_bar * 0.5 * a * a * belief.var;
    }
  }
  return losses::generalised_entropy(loss, discretise(belief));
}

double gaussian_bayes_act(const losses::WeightedBregmanLoss& loss, const GaussianBelief& belief) {
  require_valid(belief);
  const auto beta = loss.weight.exponent();
  if (beta && loss.transform.kind() == Transform::Kind::Identity) return belief.mean + *beta * belief.var;
  if (beta && loss.transform.kind() == Transform::Kind::NegExp) {
    // b* = -(1/a) log E_{p_w}[exp(-a z)] with p_w = N(m + beta v, v).
    const double a = loss.transform.parameter();
    return belief.mean + *beta * belief.var - 0.5 * a * belief.var;
  }
  const auto act = losses::bayes_act(loss, discretise(belief));
  if (!act.in_space) throw DomainError("loss transform has no in-space Bayes act");
  return (*act.in_space)[0];
}

}  // namespace bal::beliefs

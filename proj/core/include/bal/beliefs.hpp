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

#include <cstddef>
#include <cstdint>

#include "bal/losses.hpp"

namespace bal::beliefs {

struct GaussianBelief {
  double mean = 0.0;
  double var = 1.0;
};

/// Weighted moments of a scalar belief p under weight w:
///   w_bar = E_p[w(z)],  mu_w = E_{p_w}[z],  u_w = E_p[w(z) (z - mu_w)^2].
struct WeightedGaussianSummary {
  double w_bar = 1.0;
  double mu_w = 0.0;
  double u_w = 0.0;
};

/// Monte Carlo summary with delta-method standard errors.
struct McWeightedGaussianSummary : WeightedGaussianSummary {
  double se_w_bar = 0.0;
  double se_mu_w = 0.0;
  double se_u_w = 0.0;
  std::size_t n_samples = 0;
};

/// Closed form for w(z) = exp(alpha z): p_w = N(m + alpha v, v),
/// w_bar = exp(alpha m + alpha^2 v / 2), u_w = w_bar v.
WeightedGaussianSummary weighted_gaussian_summary_analytic(const GaussianBelief& belief, double alpha);

/// As above for any weight of the form scale * exp(beta z); other kinds
/// throw UnsupportedWeightError.
WeightedGaussianSummary weighted_gaussian_summary_analytic(const GaussianBelief& belief,
                                                           const losses::WeightFunction& weight);

/// Self-normalised estimator from n_samples draws of N(m, v).
McWeightedGaussianSummary weighted_gaussian_summary_mc(const GaussianBelief& belief,
                                                       const losses::WeightFunction& weight,
                                                       std::size_t n_samples, std::uint64_t seed);

constexpr std::size_t kQuadratureAtoms = 2001;
constexpr double kQuadratureHalfWidth = 8.0;

/// Trapezoid discretisation of N(m, v) on m +/- half_width sqrt(v).
losses::DiscreteBelief discretise(const GaussianBelief& belief, std::size_t n_atoms = kQuadratureAtoms,
                                  double half_width = kQuadratureHalfWidth);

WeightedGaussianSummary weighted_gaussian_summary_quadrature(const GaussianBelief& belief,
                                                             const losses::WeightFunction& weight,
                                                             std::size_t n_atoms = kQuadratureAtoms);

/// Analytic where the weight is exponential-family, quadrature otherwise.
WeightedGaussianSummary weighted_gaussian_summary(const GaussianBelief& belief, const losses::WeightFunction& weight);

/// Generalised entropy of a scalar Gaussian belief. Closed forms cover
/// squared error and Linex under exponential-family weights; anything else
/// goes through the quadrature discretisation.
double gaussian_generalised_entropy(const losses::WeightedBregmanLoss& loss, const GaussianBelief& belief);

/// In-space Bayes act T^{-1}(E_{p_w}[T z]) for a scalar Gaussian belief.
double gaussian_bayes_act(const losses::WeightedBregmanLoss& loss, const GaussianBelief& belief);

}  // namespace bal::beliefs

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

// Reference computations for tests. Everything here is written directly
// from the defining formulas and deliberately avoids the library's code
// paths (no shared helpers, a different RNG, dense inverses instead of
// Cholesky solves).

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Phi { Quadratic, NegEntropy, NegLog };

double phi(Phi kind, const Vec& u);
Vec grad_phi(Phi kind, const Vec& u);
/// phi(u) - phi(v) - <grad phi(v), u - v>, with 0 log 0 = 0.
double bregman(Phi kind, const Vec& u, const Vec& v);

/// Minimum of a convex function on [lo, hi]: dense scan then golden section.
struct Min1d {
  double x;
  double f;
};
Min1d minimise_1d(const std::function<double(double)>& f, double lo, double hi, int grid = 2001);

/// Minimum of a convex function over the open 2- or 3-simplex, by nested
/// golden sections on the free coordinates.
struct MinSimplex {
  Vec x;
  double f;
};
MinSimplex minimise_simplex(const std::function<double(const Vec&)>& f, int k);

/// Weighted Jensen gap sum_i q_i w_i phi(t_i) - W phi(sum_i q_i w_i t_i / W)
/// with W = sum_i q_i w_i, written as a plain loop.
double weighted_jensen_gap(Phi kind, const std::vector<Vec>& t, const Vec& q, const Vec& w);

/// Squared-exponential kernel exp(-|a-b|^2 / (2 l^2)) * s2.
double rbf(const Vec& a, const Vec& b, double l, double s2);

/// GP posterior from a dense inverse of K + noise I.
struct DenseGp {
  Mat x;
  Vec y;
  double l, s2, noise, c;
  Mat a_inv;

  DenseGp(Mat x, Vec y, double l, double s2, double noise, double c);
  double mean(const Vec& t) const;
  double cov(const Vec& a, const Vec& b) const;
  /// Same data with (x+, y+) appended.
  DenseGp with(const Vec& x_plus, double y_plus) const;
};

/// Mutual-information form of weighted EPIG for one (context, candidate)
/// pair, enumerated term by term. Member tables are n_members x K.
double epig_pair(const Mat& ctx_members, const Mat& cand_members, const Vec& w);

/// Nested Monte Carlo EVR_w for one candidate and a set of contexts with
/// fresh independent draws. Inputs are the GP moments: m_c, v_c, s_c per
/// context, and m_plus, v_plus, noise for the candidate. Weight is
/// exp(alpha z). Returns the estimate and its standard error.
struct McEstimate {
  double value;
  double se;
};
McEstimate nested_mc_evr_w(const Vec& m_c, const Vec& v_c, const Vec& s_c, double m_plus, double v_plus,
                           double noise, double alpha, std::size_t n_outer, std::size_t n_inner, std::uint64_t seed);

/// 2 sin(2x) + 8 N(x; 2.5, 0.5^2) + 10 N(x; 7.5, 0.25^2) - 6 N(x; -4.5, 0.5^2).
double synth_function(double x);

}  // namespace oracle

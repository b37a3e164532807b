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

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "bal/common.hpp"

namespace bal::gp {

/// Matern correlation kappa_nu(r) for nu in {1.5, 2.5}, r = distance / lengthscale.
double matern_correlation(double nu, double r);

/// Covariance function. Inputs are rows of a matrix; white noise lives on
/// the posterior, not here.
class Kernel {
 public:
  enum class Kind { Rbf, Linear, Matern, Sum };

  static Kernel rbf(double lengthscale, double signal_var);
  static Kernel linear(double var);
  static Kernel matern(double nu, double lengthscale, double signal_var);
  static Kernel sum(std::vector<Kernel> terms);

  Kind kind() const { return kind_; }
  double lengthscale() const { return lengthscale_; }
  double signal_var() const { return signal_var_; }
  double nu() const { return nu_; }
  const std::vector<Kernel>& terms() const { return terms_; }
  std::string describe() const;

  double operator()(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) const;
  Mat gram(const Mat& a, const Mat& b) const;
  Vec diag(const Mat& a) const;

 private:
  Kernel() = default;
  Kind kind_ = Kind::Rbf;
  double lengthscale_ = 1.0;
  double signal_var_ = 1.0;
  double nu_ = 1.5;
  std::vector<Kernel> terms_;
};

struct Prediction {
  Vec mean;
  Vec var;  ///< latent variance v_n(x), noise excluded
};

/// Exact GP posterior given (X, y) under k, a constant mean and Gaussian
/// noise. Immutable once built; all queries are const.
class GpPosterior {
 public:
  /// Posterior with no observations (the prior).
  static GpPosterior prior(Kernel kernel, double mean_const, double noise_var, Eigen::Index dim);

  const Kernel& kernel() const { return kernel_; }
  double mean_const() const { return mean_const_; }
  double noise_var() const { return noise_var_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return x_.rows(); }
  Eigen::Index dim() const { return x_.cols(); }
  const Mat& inputs() const { return x_; }
  const Vec& targets() const { return y_; }
  /// Lower Cholesky factor of K + (noise + jitter) I.
  Mat chol() const;
  const Vec& alpha() const { return alpha_; }

  Prediction predict(const Mat& xs) const;
  double mean(const Eigen::Ref<const Vec>& x) const;
  /// Posterior covariance v_n(a, b).
  double covariance(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) const;
  /// s_n(C, P): posterior covariance between every context row and every
  /// candidate row, contexts x candidates.
  Mat cross_cov(const Mat& contexts, const Mat& candidates) const;
  Vec cross_cov_point(const Mat& contexts, const Eigen::Ref<const Vec>& candidate) const;

 private:
  friend GpPosterior fit(Kernel, double, double, const Mat&, const Vec&);
  GpPosterior(Kernel k, double c, double noise) : kernel_(std::move(k)), mean_const_(c), noise_var_(noise) {}
  void check_dim(const Mat& xs) const;
  /// L^{-1} K(X, xs)
  Mat whitened(const Mat& xs) const;

  Kernel kernel_;
  double mean_const_;
  double noise_var_;
  double jitter_ = 0.0;
  Mat x_;
  Vec y_;
  Eigen::LLT<Mat> llt_;
  Vec alpha_;
};

/// Factorises K + noise I with adaptive jitter (1e-10 relative to the mean
/// diagonal, doubling up to 1e-4) and caches alpha = A^{-1}(y - c).
GpPosterior fit(Kernel kernel, double mean_const, double noise_var, const Mat& x, const Vec& y);

/// Effect on a context set of hypothetically observing y+ at x+. Variances
/// do not depend on the realised y+.
struct OneStepUpdate {
  Vec s;          ///< s_n(c, x+)
  Vec beta;       ///< s / tau_sq
  double tau_sq;  ///< v_n(x+) + noise
  Vec v_now;      ///< v_n(c)
  Vec v_next;     ///< v_{n+1}(c)
  Vec m_now;      ///< m_n(c)
  double m_plus;  ///< m_n(x+)

  /// m_{n+1}(c) after observing y_plus.
  Vec mean_next(double y_plus) const;
};

OneStepUpdate one_step_update(const GpPosterior& post, const Eigen::Ref<const Vec>& x_plus, const Mat& contexts);

struct Hyperparameters {
  double mean_const = 0.0;
  double noise_var = 1.0;
  double linear_var = 0.0;
  double signal_var = 1.0;
  double lengthscale = 1.0;
  double nu = 1.5;

  /// linear + Matern(nu) sum kernel.
  Kernel kernel() const;
};

/// Lengthscale solving kappa_nu(r0 / l) = 0.5.
double half_correlation_lengthscale(double nu, double r0);

/// Plug-in estimates: median location, nearest-neighbour difference noise,
/// ridge split of linear vs residual signal, and half-correlation
/// lengthscale at the median nearest-neighbour distance.
Hyperparameters robust_hyperparameters(const Mat& x_std, const Vec& y, double nu);

/// Recomputes the robust estimates on rounds divisible by three and reuses
/// the cached values otherwise.
class HyperparameterSchedule {
 public:
  explicit HyperparameterSchedule(double nu, std::size_t period = 3) : nu_(nu), period_(period) {}
  const Hyperparameters& at_round(std::size_t round_index, const Mat& x_std, const Vec& y);
  bool refreshed_last() const { return refreshed_; }

 private:
  double nu_;
  std::size_t period_;
  std::optional<Hyperparameters> cached_;
  bool refreshed_ = false;
};

}  // namespace bal::gp

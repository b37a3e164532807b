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

#include "bal/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bal::gp {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

double median(std::vector<double> v) {
  const auto n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}

}  // namespace

double matern_correlation(double nu, double r) {
  r = std::abs(r);
  if (nu == 1.5) {
    const double t = std::sqrt(3.0) * r;
    return (1.0 + t) * std::exp(-t);
  }
  if (nu == 2.5) {
    const double t = std::sqrt(5.0) * r;
    return (1.0 + t + t * t / 3.0) * std::exp(-t);
  }
  throw DomainError("Matern smoothness must be 1.5 or 2.5");
}

Kernel Kernel::rbf(double lengthscale, double signal_var) {
  require_positive(lengthscale, "RBF lengthscale");
  require_positive(signal_var, "RBF signal variance");
  Kernel k;
  k.kind_ = Kind::Rbf;
  k.lengthscale_ = lengthscale;
  k.signal_var_ = signal_var;
  return k;
}

Kernel Kernel::linear(double var) {
  require_positive(var, "linear kernel variance");
  Kernel k;
  k.kind_ = Kind::Linear;
  k.signal_var_ = var;
  return k;
}

Kernel Kernel::matern(double nu, double lengthscale, double signal_var) {
  if (nu != 1.5 && nu != 2.5) throw DomainError("Matern smoothness must be 1.5 or 2.5");
  require_positive(lengthscale, "Matern lengthscale");
  require_positive(signal_var, "Matern signal variance");
  Kernel k;
  k.kind_ = Kind::Matern;
  k.nu_ = nu;
  k.lengthscale_ = lengthscale;
  k.signal_var_ = signal_var;
  return k;
}

Kernel Kernel::sum(std::vector<Kernel> terms) {
  if (terms.empty()) throw DomainError("sum kernel needs at least one term");
  Kernel k;
  k.kind_ = Kind::Sum;
  k.terms_ = std::move(terms);
  return k;
}

std::string Kernel::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Rbf: os << "rbf(l=" << lengthscale_ << ", s2=" << signal_var_ << ")"; break;
    case Kind::Linear: os << "linear(s2=" << signal_var_ << ")"; break;
    case Kind::Matern: os << "matern(nu=" << nu_ << ", l=" << lengthscale_ << ", s2=" << signal_var_ << ")"; break;
    case Kind::Sum:
      for (std::size_t i = 0; i < terms_.size(); ++i) os << (i ? " + " : "") << terms_[i].describe();
      break;
  }
  return os.str();
}

double Kernel::operator()(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) const {
  switch (kind_) {
    case Kind::Rbf: return signal_var_ * std::exp(-0.5 * (a - b).squaredNorm() / (lengthscale_ * lengthscale_));
    case Kind::Linear: return signal_var_ * a.dot(b);
    case Kind::Matern: return signal_var_ * matern_correlation(nu_, (a - b).norm() / lengthscale_);
    case Kind::Sum: {
      double s = 0.0;
      for (const auto& t : terms_) s += t(a, b);
      return s;
    }
  }
  return 0.0;
}

Mat Kernel::gram(const Mat& a, const Mat& b) const {
  if (a.cols() != b.cols()) throw ShapeError("kernel inputs have different dimensions");
  Mat k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = (*this)(a.row(i).transpose(), b.row(j).transpose());
  }
  return k;
}

Vec Kernel::diag(const Mat& a) const {
  Vec d(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) d[i] = (*this)(a.row(i).transpose(), a.row(i).transpose());
  return d;
}

GpPosterior GpPosterior::prior(Kernel kernel, double mean_const, double noise_var, Eigen::Index dim) {
  require_positive(noise_var, "noise variance");
  GpPosterior p(std::move(kernel), mean_const, noise_var);
  p.x_ = Mat(0, dim);
  p.y_ = Vec(0);
  p.alpha_ = Vec(0);
  return p;
}

GpPosterior fit(Kernel kernel, double mean_const, double noise_var, const Mat& x, const Vec& y) {
  require_positive(noise_var, "noise variance");
  if (x.rows() < 1) throw InsufficientDataError("GP fit needs at least one observation");
  if (x.rows() != y.size()) throw ShapeError("GP fit: inputs and targets differ in length");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("GP fit: non-finite training data");

  GpPosterior p(std::move(kernel), mean_const, noise_var);
  p.x_ = x;
  p.y_ = y;
  Mat a = p.kernel_.gram(x, x);
  a.diagonal().array() += noise_var;
  const double mean_diag = a.diagonal().mean();
  for (double rel = 1e-10; rel <= 1e-4 * (1.0 + 1e-9); rel *= 2.0) {
    Mat aj = a;
    aj.diagonal().array() += rel * mean_diag;
    p.llt_.compute(aj);
    if (p.llt_.info() == Eigen::Success) {
      p.jitter_ = rel * mean_diag;
      p.alpha_ = p.llt_.solve((y.array() - mean_const).matrix());
      return p;
    }
  }
  throw IllConditionedError("Cholesky factorisation failed at the maximum jitter");
}

Mat GpPosterior::chol() const {
  if (size() == 0) return Mat(0, 0);
  return llt_.matrixL();
}

void GpPosterior::check_dim(const Mat& xs) const {
  if (xs.cols() != dim()) {
    throw ShapeError("query dimension " + std::to_string(xs.cols()) + " does not match model dimension " +
                     std::to_string(dim()));
  }
}

Mat GpPosterior::whitened(const Mat& xs) const {
  Mat k = kernel_.gram(x_, xs);
  llt_.matrixL().solveInPlace(k);
  return k;
}

Prediction GpPosterior::predict(const Mat& xs) const {
  check_dim(xs);
  Prediction out;
  const Vec prior_var = kernel_.diag(xs);
  if (size() == 0) {
    out.mean = Vec::Constant(xs.rows(), mean_const_);
    out.var = prior_var;
    return out;
  }
  const Mat kxs = kernel_.gram(x_, xs);
  out.mean = (kxs.transpose() * alpha_).array() + mean_const_;
  Mat v = kxs;
  llt_.matrixL().solveInPlace(v);
  out.var = prior_var - v.colwise().squaredNorm().transpose();
  for (Eigen::Index i = 0; i < out.var.size(); ++i) {
    out.var[i] = std::max(out.var[i], 1e-14 * std::max(prior_var[i], std::numeric_limits<double>::min()));
  }
  return out;
}

double GpPosterior::mean(const Eigen::Ref<const Vec>& x) const {
  Mat xs = x.transpose();
  return predict(xs).mean[0];
}

double GpPosterior::covariance(const Eigen::Ref<const Vec>& a, const Eigen::Ref<const Vec>& b) const {
  Mat am = a.transpose();
  Mat bm = b.transpose();
  return cross_cov(am, bm)(0, 0);
}

Mat GpPosterior::cross_cov(const Mat& contexts, const Mat& candidates) const {
  check_dim(contexts);
  check_dim(candidates);
  Mat s = kernel_.gram(contexts, candidates);
  if (size() == 0) return s;
  s.noalias() -= whitened(contexts).transpose() * whitened(candidates);
  return s;
}

Vec GpPosterior::cross_cov_point(const Mat& contexts, const Eigen::Ref<const Vec>& candidate) const {
  Mat c = candidate.transpose();
  return cross_cov(contexts, c).col(0);
}

Vec OneStepUpdate::mean_next(double y_plus) const { return m_now + beta * (y_plus - m_plus); }

OneStepUpdate one_step_update(const GpPosterior& post, const Eigen::Ref<const Vec>& x_plus, const Mat& contexts) {
  Mat xp = x_plus.transpose();
  const auto at_plus = post.predict(xp);
  const auto at_ctx = post.predict(contexts);
  OneStepUpdate u;
  u.s = post.cross_cov(contexts, xp).col(0);
  u.tau_sq = at_plus.var[0] + post.noise_var();
  u.beta = u.s / u.tau_sq;
  u.v_now = at_ctx.var;
  u.v_next = u.v_now - (u.s.array().square() / u.tau_sq).matrix();
  u.m_now = at_ctx.mean;
  u.m_plus = at_plus.mean[0];
  return u;
}

Kernel Hyperparameters::kernel() const {
  return Kernel::sum({Kernel::linear(linear_var), Kernel::matern(nu, lengthscale, signal_var)});
}

double half_correlation_lengthscale(double nu, double r0) {
  require_positive(r0, "characteristic spacing r0");
  // kappa is strictly decreasing in u = r0 / l, so bisect on u.
  double lo = 1e-3, hi = 1e3;
  while ((hi - lo) > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (matern_correlation(nu, mid) > 0.5) lo = mid;
    else hi = mid;
  }
  return r0 / (0.5 * (lo + hi));
}

Hyperparameters robust_hyperparameters(const Mat& x_std, const Vec& y, double nu) {
  const auto n = x_std.rows();
  if (n < 3) throw InsufficientDataError("robust hyperparameters need at least three observations");
  if (y.size() != n) throw ShapeError("robust hyperparameters: inputs and targets differ in length");

  Hyperparameters h;
  h.nu = nu;
  h.mean_const = median(std::vector<double>(y.begin(), y.end()));

  // Nearest neighbours in standardized space; ties go to the lowest index.
  std::vector<double> nn_dist(static_cast<std::size_t>(n)), nn_diff(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = (x_std.row(i) - x_std.row(j)).norm();
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    nn_dist[static_cast<std::size_t>(i)] = best;
    nn_diff[static_cast<std::size_t>(i)] = std::abs(y[i] - y[arg]);
  }
  const double noise_floor = 1e-6 * (1.0 + std::abs(h.mean_const));
  const double noise_sd = std::max(1.4826 / std::sqrt(2.0) * median(nn_diff), noise_floor);
  h.noise_var = noise_sd * noise_sd;

  const Vec centred = (y.array() - h.mean_const).matrix();
  Mat gram = x_std.transpose() * x_std;
  gram.diagonal().array() += 1e-6 * static_cast<double>(n);
  const Vec coef = gram.ldlt().solve(x_std.transpose() * centred);
  const Vec fitted = x_std * coef;
  const double fitted_var = (fitted.array() - fitted.mean()).square().mean();
  h.linear_var = std::max(fitted_var, 1e-12);

  std::vector<double> abs_resid(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) abs_resid[static_cast<std::size_t>(i)] = std::abs(centred[i] - fitted[i]);
  const double mad = 1.4826 * median(abs_resid);
  h.signal_var = std::max(mad * mad - h.noise_var, 1e-12);

  const double r0 = median(nn_dist);
  h.lengthscale = r0 > 0.0 ? half_correlation_lengthscale(nu, r0) : 1.0;
  return h;
}

const Hyperparameters& HyperparameterSchedule::at_round(std::size_t round_index, const Mat& x_std, const Vec& y) {
  refreshed_ = !cached_ || round_index % period_ == 0;
  if (refreshed_) cached_ = robust_hyperparameters(x_std, y, nu_);
  return *cached_;
}

}  // namespace bal::gp

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

#include "bal/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bal::losses {

namespace {

constexpr double kSimplexFloor = 1e-12;
constexpr double kSimplexSumTol = 1e-9;

std::string describe(const Vec& u) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < u.size(); ++i) os << (i ? ", " : "") << u[i];
  os << ")";
  return os.str();
}

}  // namespace

std::string Potential::name() const {
  switch (kind_) {
    case Kind::Quadratic: return "quadratic";
    case Kind::NegEntropy: return "neg_entropy";
    case Kind::NegLog: return "neg_log";
  }
  return "?";
}

bool Potential::in_domain(const Vec& u) const {
  if (u.size() == 0 || !u.allFinite()) return false;
  switch (kind_) {
    case Kind::Quadratic: return true;
    case Kind::NegEntropy:
      return u.minCoeff() >= -kSimplexFloor && std::abs(u.sum() - 1.0) <= kSimplexSumTol;
    case Kind::NegLog: return u.minCoeff() > 0.0;
  }
  return false;
}

void Potential::require_domain(const Vec& u, const char* what) const {
  if (!in_domain(u)) {
    throw DomainError(std::string(what) + " " + describe(u) + " is outside the domain of the " + name() +
                      " potential");
  }
}

Vec Potential::interior(const Vec& v) const {
  if (kind_ != Kind::NegEntropy) return v;
  Vec c = v.cwiseMax(kSimplexFloor).cwiseMin(1.0);
  return c / c.sum();
}

double Potential::value(const Vec& u) const {
  require_domain(u, "argument");
  switch (kind_) {
    case Kind::Quadratic: return u.squaredNorm();
    case Kind::NegEntropy: {
      double s = 0.0;
      for (double x : u) {
        if (x > 0.0) s += x * std::log(x);
      }
      return s;
    }
    case Kind::NegLog: return -u.array().log().sum();
  }
  return 0.0;
}

Vec Potential::gradient(const Vec& v) const {
  require_domain(v, "argument");
  switch (kind_) {
    case Kind::Quadratic: return 2.0 * v;
    case Kind::NegEntropy: return (interior(v).array().log() + 1.0).matrix();
    case Kind::NegLog: return (-v.array().inverse()).matrix();
  }
  return v;
}

double bregman_divergence(const Potential& phi, const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw ShapeError("bregman_divergence: argument sizes differ");
  phi.require_domain(u, "first argument");
  phi.require_domain(v, "second argument");
  switch (phi.kind()) {
    case Potential::Kind::Quadratic: return (u - v).squaredNorm();
    case Potential::Kind::NegEntropy: {
      // On the simplex the generic formula reduces to sum u log(u / v).
      const Vec vi = phi.interior(v);
      double d = 0.0;
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (u[i] > 0.0) d += u[i] * std::log(u[i] / vi[i]);
      }
      return std::max(d, 0.0);
    }
    case Potential::Kind::NegLog: {
      double d = 0.0;
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double r = u[i] / v[i];
        d += r - std::log(r) - 1.0;
      }
      return d;
    }
  }
  return 0.0;
}

Transform Transform::one_hot(int n_classes) {
  if (n_classes < 1) throw DomainError("one_hot: need at least one class");
  return Transform(Kind::OneHot, 0.0, n_classes);
}

Transform Transform::box_cox(double lambda) {
  if (lambda == 0.0 || !std::isfinite(lambda)) throw DomainError("box_cox: lambda must be finite and nonzero");
  return Transform(Kind::BoxCox, lambda, 0);
}

Transform Transform::neg_exp(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("neg_exp: alpha must be positive");
  return Transform(Kind::NegExp, alpha, 0);
}

std::string Transform::name() const {
  switch (kind_) {
    case Kind::Identity: return "identity";
    case Kind::OneHot: return "one_hot(" + std::to_string(n_classes_) + ")";
    case Kind::BoxCox: return "box_cox(" + std::to_string(param_) + ")";
    case Kind::NegExp: return "neg_exp(" + std::to_string(param_) + ")";
  }
  return "?";
}

Vec Transform::apply(const Vec& z) const {
  switch (kind_) {
    case Kind::Identity: return z;
    case Kind::OneHot: {
      if (z.size() != 1) throw ShapeError("one_hot: world state must be a single class index");
      const double idx = z[0];
      if (idx != std::floor(idx) || idx < 0 || idx >= n_classes_) {
        throw DomainError("one_hot: class index " + std::to_string(idx) + " out of range");
      }
      Vec e = Vec::Zero(n_classes_);
      e[static_cast<Eigen::Index>(idx)] = 1.0;
      return e;
    }
    case Kind::BoxCox: {
      if (!(z.minCoeff() > 0.0)) throw DomainError("box_cox: world state must be positive");
      return ((z.array().pow(param_) - 1.0) / param_).matrix();
    }
    case Kind::NegExp: return (-param_ * z.array()).exp().matrix();
  }
  return z;
}

Vec Transform::inverse(const Vec& t) const {
  switch (kind_) {
    case Kind::Identity: return t;
    case Kind::OneHot: throw DomainError("one_hot transform has no inverse");
    case Kind::BoxCox: {
      const Eigen::ArrayXd base = param_ * t.array() + 1.0;
      if (!(base.minCoeff() > 0.0)) throw DomainError("box_cox inverse: point outside the image of T");
      return base.pow(1.0 / param_).matrix();
    }
    case Kind::NegExp: {
      if (!(t.minCoeff() > 0.0)) throw DomainError("neg_exp inverse: point outside the image of T");
      return (-t.array().log() / param_).matrix();
    }
  }
  return t;
}

WeightFunction WeightFunction::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidWeightError("constant weight must be positive");
  WeightFunction w;
  w.kind_ = Kind::Constant;
  w.scale_ = c;
  return w;
}

WeightFunction WeightFunction::exp_pos(double alpha) {
  WeightFunction w;
  w.kind_ = Kind::ExpPos;
  w.alpha_ = alpha;
  return w;
}

WeightFunction WeightFunction::exp_neg(double alpha) {
  WeightFunction w;
  w.kind_ = Kind::ExpNeg;
  w.alpha_ = alpha;
  return w;
}

WeightFunction WeightFunction::class_weights(Vec weights) {
  if (weights.size() == 0 || !(weights.minCoeff() > 0.0) || !weights.allFinite()) {
    throw InvalidWeightError("class weights must be a non-empty vector of positive values");
  }
  WeightFunction w;
  w.kind_ = Kind::ClassWeights;
  w.class_weights_ = std::move(weights);
  return w;
}

WeightFunction WeightFunction::custom(std::function<double(double)> fn, std::string label) {
  WeightFunction w;
  w.kind_ = Kind::Custom;
  w.fn_ = std::move(fn);
  w.label_ = std::move(label);
  return w;
}

std::string WeightFunction::name() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Constant: os << "constant"; break;
    case Kind::ExpPos: os << "exp_pos(" << alpha_ << ")"; break;
    case Kind::ExpNeg: os << "exp_neg(" << alpha_ << ")"; break;
    case Kind::ClassWeights: os << "class_weights"; break;
    case Kind::Custom: os << label_; break;
  }
  if (scale_ != 1.0) os << "*" << scale_;
  return os.str();
}

WeightFunction WeightFunction::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidWeightError("weight scale must be positive");
  WeightFunction w = *this;
  w.scale_ *= c;
  return w;
}

std::optional<double> WeightFunction::exponent() const {
  switch (kind_) {
    case Kind::Constant: return 0.0;
    case Kind::ExpPos: return alpha_;
    case Kind::ExpNeg: return -alpha_;
    default: return std::nullopt;
  }
}

double WeightFunction::log_weight(double z) const {
  const double log_scale = std::log(scale_);
  switch (kind_) {
    case Kind::Constant: return log_scale;
    case Kind::ExpPos: return log_scale + alpha_ * z;
    case Kind::ExpNeg: return log_scale - alpha_ * z;
    case Kind::ClassWeights:
    case Kind::Custom: {
      const double w = (*this)(z);
      if (w < 0.0 || std::isnan(w)) throw InvalidWeightError("weight function returned a negative value");
      return w == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(w);
    }
  }
  return log_scale;
}

double WeightFunction::operator()(double z) const {
  switch (kind_) {
    case Kind::Constant: return scale_;
    case Kind::ExpPos: return scale_ * std::exp(alpha_ * z);
    case Kind::ExpNeg: return scale_ * std::exp(-alpha_ * z);
    case Kind::ClassWeights: {
      const auto idx = static_cast<Eigen::Index>(z);
      if (static_cast<double>(idx) != z || idx < 0 || idx >= class_weights_.size()) {
        throw DomainError("class weight requested for invalid class " + std::to_string(z));
      }
      return scale_ * class_weights_[idx];
    }
    case Kind::Custom: return scale_ * fn_(z);
  }
  return scale_;
}

WeightedBregmanLoss WeightedBregmanLoss::squared_error(WeightFunction w) {
  return {Potential::quadratic(), Transform::identity(), std::move(w)};
}

WeightedBregmanLoss WeightedBregmanLoss::log_loss(int n_classes, WeightFunction w) {
  return {Potential::neg_entropy(), Transform::one_hot(n_classes), std::move(w)};
}

WeightedBregmanLoss WeightedBregmanLoss::linex(double alpha, WeightFunction w) {
  return {Potential::neg_log(), Transform::neg_exp(alpha), std::move(w)};
}

WeightedBregmanLoss WeightedBregmanLoss::box_cox_squared(double lambda, WeightFunction w) {
  return {Potential::quadratic(), Transform::box_cox(lambda), std::move(w)};
}

double loss_eval(const WeightedBregmanLoss& loss, const Vec& z, const Vec& a) {
  const double w = loss.weight(z);
  if (!(w > 0.0) || !std::isfinite(w)) throw InvalidWeightError("loss weight must be positive and finite");
  return w * bregman_divergence(loss.potential, loss.transform.apply(z), a);
}

double pullback_loss(const WeightedBregmanLoss& loss, const Vec& z, const Vec& b) {
  return loss_eval(loss, z, loss.transform.apply(b));
}

DiscreteBelief::DiscreteBelief(std::vector<Vec> support, Vec probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  if (support_.empty()) throw DomainError("belief support is empty");
  if (static_cast<Eigen::Index>(support_.size()) != probs_.size()) {
    throw ShapeError("belief support and probability vector differ in length");
  }
  if (!probs_.allFinite() || probs_.minCoeff() < 0.0 || std::abs(probs_.sum() - 1.0) > 1e-12) {
    throw DomainError("belief probabilities must be nonnegative and sum to one");
  }
}

DiscreteBelief::DiscreteBelief(const std::vector<double>& support, const std::vector<double>& probs)
    : DiscreteBelief(
          [&] {
            std::vector<Vec> s;
            s.reserve(support.size());
            for (double z : support) s.push_back(Vec::Constant(1, z));
            return s;
          }(),
          Eigen::Map<const Vec>(probs.data(), static_cast<Eigen::Index>(probs.size()))) {}

DiscreteBelief DiscreteBelief::from_masses(std::vector<Vec> support, const Vec& masses) {
  const double total = masses.sum();
  if (!(total > 0.0) || masses.minCoeff() < 0.0) throw DomainError("belief masses must be nonnegative, not all zero");
  return DiscreteBelief(std::move(support), masses / total);
}

DiscreteBelief DiscreteBelief::uniform(const std::vector<double>& support) {
  std::vector<double> p(support.size(), 1.0 / static_cast<double>(support.size()));
  std::vector<Vec> s;
  for (double z : support) s.push_back(Vec::Constant(1, z));
  return from_masses(std::move(s), Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size())));
}

DiscreteBelief DiscreteBelief::point_mass(const Vec& z) { return DiscreteBelief({z}, Vec::Ones(1)); }

Vec DiscreteBelief::mean() const {
  Vec m = Vec::Zero(support_.front().size());
  for (std::size_t k = 0; k < support_.size(); ++k) m += probs_[static_cast<Eigen::Index>(k)] * support_[k];
  return m;
}

WeightedMoments reweight(const WeightFunction& w, const DiscreteBelief& belief) {
  const auto n = static_cast<Eigen::Index>(belief.size());
  Vec log_mass(n);
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double p = belief.probs()[k];
    log_mass[k] = p > 0.0 ? w.log_weight(belief.support()[static_cast<std::size_t>(k)][0]) + std::log(p)
                          : -std::numeric_limits<double>::infinity();
    top = std::max(top, log_mass[k]);
  }
  if (!std::isfinite(top)) throw DegenerateBeliefError("belief has zero effective weight");
  Vec q_w = (log_mass.array() - top).exp().matrix();
  const double s = q_w.sum();
  q_w /= s;
  const double log_w_bar = top + std::log(s);
  return {std::exp(log_w_bar), q_w, log_w_bar};
}

double expected_loss(const WeightedBregmanLoss& loss, const DiscreteBelief& belief, const Vec& a) {
  double total = 0.0;
  for (std::size_t k = 0; k < belief.size(); ++k) {
    const double p = belief.probs()[static_cast<Eigen::Index>(k)];
    if (p > 0.0) total += p * loss_eval(loss, belief.support()[k], a);
  }
  return total;
}

namespace {

Vec weighted_transform_mean(const WeightedBregmanLoss& loss, const DiscreteBelief& belief, const Vec& q_w) {
  Vec m;
  for (std::size_t k = 0; k < belief.size(); ++k) {
    const double q = q_w[static_cast<Eigen::Index>(k)];
    if (q == 0.0) continue;
    Vec t = loss.transform.apply(belief.support()[k]);
    if (m.size() == 0) m = Vec::Zero(t.size());
    m += q * t;
  }
  return m;
}

}  // namespace

BayesAct bayes_act(const WeightedBregmanLoss& loss, const DiscreteBelief& belief) {
  const auto moments = reweight(loss.weight, belief);
  BayesAct act;
  act.transformed = weighted_transform_mean(loss, belief, moments.q_w);
  loss.potential.require_domain(act.transformed, "Bayes act");
  if (loss.transform.invertible()) act.in_space = loss.transform.inverse(act.transformed);
  return act;
}

double generalised_entropy(const WeightedBregmanLoss& loss, const DiscreteBelief& belief) {
  const auto moments = reweight(loss.weight, belief);
  const Vec mean_t = weighted_transform_mean(loss, belief, moments.q_w);
  loss.potential.require_domain(mean_t, "weighted mean of T(z)");
  double mean_phi = 0.0;
  for (std::size_t k = 0; k < belief.size(); ++k) {
    const double q = moments.q_w[static_cast<Eigen::Index>(k)];
    if (q == 0.0) continue;
    mean_phi += q * loss.potential.value(loss.transform.apply(belief.support()[k]));
  }
  return moments.w_bar * (mean_phi - loss.potential.value(mean_t));
}

EvalDecomposition eval_discrepancy_decomposition(const Potential& phi, const DiscreteBelief& p_model,
                                                 const DiscreteBelief& p_eval) {
  const Vec model_mean = p_model.mean();
  const Vec eval_mean = p_eval.mean();
  EvalDecomposition out{0.0, bregman_divergence(phi, eval_mean, model_mean), 0.0};
  for (std::size_t k = 0; k < p_eval.size(); ++k) {
    const double p = p_eval.probs()[static_cast<Eigen::Index>(k)];
    if (p == 0.0) continue;
    out.total += p * bregman_divergence(phi, p_eval.support()[k], model_mean);
    out.irreducible += p * bregman_divergence(phi, p_eval.support()[k], eval_mean);
  }
  return out;
}

}  // namespace bal::losses

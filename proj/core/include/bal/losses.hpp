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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bal/common.hpp"

namespace bal::losses {

/// Strictly convex potential phi with its gradient and domain.
///
///   Quadratic   phi(x) = |x|^2            dom = R^K
///   NegEntropy  phi(x) = sum_i x_i log x_i dom = probability simplex
///   NegLog      phi(x) = -sum_i log x_i    dom = (0, inf)^K
///
/// NegEntropy arguments are validated against the closed simplex. The value
/// uses 0 log 0 = 0; the gradient clamps entries to [1e-12, 1] and
/// renormalises, so one-hot points are accepted as the second argument of a
/// divergence.
class Potential {
 public:
  enum class Kind { Quadratic, NegEntropy, NegLog };

  static Potential quadratic() { return Potential(Kind::Quadratic); }
  static Potential neg_entropy() { return Potential(Kind::NegEntropy); }
  static Potential neg_log() { return Potential(Kind::NegLog); }

  Kind kind() const { return kind_; }
  std::string name() const;

  double value(const Vec& u) const;
  Vec gradient(const Vec& v) const;

  bool in_domain(const Vec& u) const;
  /// Throws DomainError naming `what` when u is outside dom(phi).
  void require_domain(const Vec& u, const char* what) const;

  /// Projection used before gradient evaluation (identity except NegEntropy).
  Vec interior(const Vec& v) const;

 private:
  explicit Potential(Kind k) : kind_(k) {}
  Kind kind_;
};

/// D_phi(u, v) = phi(u) - phi(v) - <grad phi(v), u - v>.
double bregman_divergence(const Potential& phi, const Vec& u, const Vec& v);

/// Map from world states to dom(phi). World states are vectors; scalar states
/// have size 1 and class labels are stored as a size-1 vector {index}.
class Transform {
 public:
  enum class Kind { Identity, OneHot, BoxCox, NegExp };

  static Transform identity() { return Transform(Kind::Identity, 0.0, 0); }
  static Transform one_hot(int n_classes);
  static Transform box_cox(double lambda);
  static Transform neg_exp(double alpha);

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  int n_classes() const { return n_classes_; }
  std::string name() const;

  Vec apply(const Vec& z) const;
  bool invertible() const { return kind_ != Kind::OneHot; }
  Vec inverse(const Vec& t) const;

 private:
  Transform(Kind k, double p, int n) : kind_(k), param_(p), n_classes_(n) {}
  Kind kind_;
  double param_;
  int n_classes_;
};

/// Positive weight w(z) on the (first coordinate of the) world state.
/// Every kind carries a positive scale factor, so c*w is representable.
class WeightFunction {
 public:
  enum class Kind { Constant, ExpPos, ExpNeg, ClassWeights, Custom };

  WeightFunction() = default;
  static WeightFunction constant(double c = 1.0);
  /// w(z) = exp(alpha z)
  static WeightFunction exp_pos(double alpha);
  /// w(z) = exp(-alpha z)
  static WeightFunction exp_neg(double alpha);
  static WeightFunction class_weights(Vec weights);
  static WeightFunction custom(std::function<double(double)> fn, std::string label = "custom");

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  double alpha() const { return alpha_; }
  const Vec& class_weight_vector() const { return class_weights_; }
  std::string name() const;

  WeightFunction scaled(double c) const;

  /// Exponent beta with w(z) = scale * exp(beta z), if w has that form
  /// (Constant gives 0).
  std::optional<double> exponent() const;

  double operator()(double z) const;
  double operator()(const Vec& z) const { return (*this)(z[0]); }
  /// log w(z); -inf where w vanishes. Throws InvalidWeightError if w(z) < 0.
  double log_weight(double z) const;

 private:
  Kind kind_ = Kind::Constant;
  double scale_ = 1.0;
  double alpha_ = 0.0;
  Vec class_weights_;
  std::function<double(double)> fn_;
  std::string label_;
};

/// l(z, a) = w(z) D_phi(T(z), a).
struct WeightedBregmanLoss {
  Potential potential = Potential::quadratic();
  Transform transform = Transform::identity();
  WeightFunction weight = WeightFunction::constant();

  static WeightedBregmanLoss squared_error(WeightFunction w = WeightFunction::constant());
  static WeightedBregmanLoss log_loss(int n_classes, WeightFunction w = WeightFunction::constant());
  static WeightedBregmanLoss linex(double alpha, WeightFunction w = WeightFunction::constant());
  static WeightedBregmanLoss box_cox_squared(double lambda, WeightFunction w = WeightFunction::constant());
};

double loss_eval(const WeightedBregmanLoss& loss, const Vec& z, const Vec& a);
inline double loss_eval(const WeightedBregmanLoss& loss, double z, const Vec& a) {
  return loss_eval(loss, Vec::Constant(1, z), a);
}
/// Pullback loss D_phi(T(z), T(b)) for an in-space action b.
double pullback_loss(const WeightedBregmanLoss& loss, const Vec& z, const Vec& b);

/// Finite-support belief q over world states.
class DiscreteBelief {
 public:
  DiscreteBelief(std::vector<Vec> support, Vec probs);
  DiscreteBelief(const std::vector<double>& support, const std::vector<double>& probs);

  /// Normalises nonnegative masses onto the simplex.
  static DiscreteBelief from_masses(std::vector<Vec> support, const Vec& masses);
  static DiscreteBelief uniform(const std::vector<double>& support);
  static DiscreteBelief point_mass(const Vec& z);

  std::size_t size() const { return support_.size(); }
  const std::vector<Vec>& support() const { return support_; }
  const Vec& probs() const { return probs_; }
  Vec mean() const;

 private:
  std::vector<Vec> support_;
  Vec probs_;
};

/// w_bar = E_q[w] and the reweighted probabilities q_w, via log-sum-exp.
/// w_bar itself may overflow for extreme exponential weights; q_w and
/// log_w_bar stay finite.
struct WeightedMoments {
  double w_bar;
  Vec q_w;
  double log_w_bar;
};
WeightedMoments reweight(const WeightFunction& w, const DiscreteBelief& belief);

/// E_q[l(z, a)].
double expected_loss(const WeightedBregmanLoss& loss, const DiscreteBelief& belief, const Vec& a);

struct BayesAct {
  Vec transformed;             ///< E_{q_w}[T(z)], the minimiser in dom(phi)
  std::optional<Vec> in_space; ///< T^{-1}(transformed) when T is invertible
};

BayesAct bayes_act(const WeightedBregmanLoss& loss, const DiscreteBelief& belief);

/// Minimum expected loss, w_bar (E_{q_w}[phi(T z)] - phi(E_{q_w}[T z])).
double generalised_entropy(const WeightedBregmanLoss& loss, const DiscreteBelief& belief);

struct EvalDecomposition {
  double total;
  double estimation_error;
  double irreducible;
};

/// Expected Bregman loss of the model's mean action under p_eval, split
/// into the divergence between the two means and the Jensen gap of p_eval.
EvalDecomposition eval_discrepancy_decomposition(const Potential& phi, const DiscreteBelief& p_model,
                                                 const DiscreteBelief& p_eval);

}  // namespace bal::losses

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

// Acceptance checks. Each criterion prints one PASS/FAIL line followed by
// indented detail lines; the exit status is non-zero if any selected
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bal/acquisition.hpp"
#include "bal/beliefs.hpp"
#include "bal/ensemble.hpp"
#include "bal/gp.hpp"
#include "bal/losses.hpp"
#include "bal/loop.hpp"
#include "bal/random.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "oracles.hpp"

namespace {

using namespace bal;
using losses::DiscreteBelief;
using losses::Potential;
using losses::WeightedBregmanLoss;
using losses::WeightFunction;

// Pinned tolerances.
constexpr double kEntropyGridTol = 1e-5;
constexpr double kActBeatTol = 1e-9;
constexpr double kGpTol = 1e-8;
constexpr double kEvrTol = 1e-8;
constexpr double kMcSigmas = 4.0;
constexpr double kIdentityTol = 1e-10;
constexpr double kEpigTol = 1e-12;
constexpr double kOrderingSems = 2.0;
constexpr double kReferenceBand = 0.5;
constexpr double kReferenceSel = 0.3449;
constexpr double kReferenceSelW = 72.06;
constexpr double kShareMargin = 0.05;
constexpr double kSteeringSems = 1.0;
constexpr double kLinexSems = 1.0;

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void info(const std::string& what) { details.push_back("info " + what); }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Vec random_simplex(Rng& rng, int k) {
  Vec p(k);
  for (int i = 0; i < k; ++i) p[i] = 0.05 + rng.uniform();
  return p / p.sum();
}

Mat uniform_mat(Rng rng, Eigen::Index n, Eigen::Index d, double lo, double hi) {
  Mat x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = lo + (hi - lo) * rng.uniform();
  return x;
}

double between(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// --- 1 ---------------------------------------------------------------------

Outcome entropy_vs_grid() {
  Outcome out;
  Rng rng(101);
  double worst_gap = 0, worst_beat = -1e300;
  constexpr double kLinexAlpha = 0.8, kExpAlpha = 0.7;
  for (int t = 0; t < 200; ++t) {
    const int family = t % 3, weight_kind = (t / 3) % 3;
    const bool labels = family == 1 || weight_kind == 2;
    const int n = family == 1 ? 2 + static_cast<int>(rng.uniform_index(2)) : 2 + static_cast<int>(rng.uniform_index(7));
    std::vector<double> z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = labels ? i : between(rng, -2, 2);
    const Vec q = random_simplex(rng, n);

    Vec class_w(n);
    for (int i = 0; i < n; ++i) class_w[i] = between(rng, 0.5, 50);
    WeightFunction w = weight_kind == 0   ? WeightFunction::constant()
                       : weight_kind == 1 ? WeightFunction::exp_pos(kExpAlpha)
                                          : WeightFunction::class_weights(class_w);
    Vec wz(n);
    for (int i = 0; i < n; ++i) {
      const double zi = z[static_cast<std::size_t>(i)];
      wz[i] = weight_kind == 0 ? 1.0 : weight_kind == 1 ? std::exp(kExpAlpha * zi) : class_w[i];
    }

    const auto phi = family == 0 ? oracle::Phi::Quadratic : family == 1 ? oracle::Phi::NegEntropy : oracle::Phi::NegLog;
    std::vector<Vec> tz;
    for (int i = 0; i < n; ++i) {
      const double zi = z[static_cast<std::size_t>(i)];
      if (family == 1) {
        tz.push_back(Vec::Unit(n, i));
      } else {
        tz.push_back(Vec::Constant(1, family == 0 ? zi : std::exp(-kLinexAlpha * zi)));
      }
    }
    auto risk = [&](const Vec& a) {
      double r = 0;
      for (int i = 0; i < n; ++i) r += q[i] * wz[i] * oracle::bregman(phi, tz[static_cast<std::size_t>(i)], a);
      return r;
    };

    WeightedBregmanLoss loss = family == 0   ? WeightedBregmanLoss::squared_error(w)
                               : family == 1 ? WeightedBregmanLoss::log_loss(n, w)
                                             : WeightedBregmanLoss::linex(kLinexAlpha, w);
    const std::vector<double> probs(q.data(), q.data() + n);
    const DiscreteBelief belief(z, probs);

    double grid_min = 0;
    if (family == 1) {
      grid_min = oracle::minimise_simplex(risk, n).f;
    } else {
      double lo = 1e300, hi = -1e300;
      for (const auto& t_i : tz) {
        lo = std::min(lo, t_i[0]);
        hi = std::max(hi, t_i[0]);
      }
      const double a_lo = family == 0 ? lo - 1 : 0.5 * lo, a_hi = family == 0 ? hi + 1 : 1.5 * hi;
      grid_min = oracle::minimise_1d([&](double a) { return risk(Vec::Constant(1, a)); }, a_lo, a_hi).f;
    }
    const double h = losses::generalised_entropy(loss, belief);
    const double act_risk = risk(losses::bayes_act(loss, belief).transformed);
    worst_gap = std::max(worst_gap, std::abs(h - grid_min));
    worst_beat = std::max(worst_beat, act_risk - grid_min);
  }
  out.require(worst_gap <= kEntropyGridTol,
              "max |generalised entropy - grid minimum| = " + fmt(worst_gap) + " (tol " + fmt(kEntropyGridTol) + ")");
  out.require(worst_beat <= kActBeatTol,
              "max excess risk of the Bayes act over the grid = " + fmt(worst_beat) + " (tol " + fmt(kActBeatTol) + ")");
  return out;
}

// --- 2, 3 ------------------------------------------------------------------

struct RandomGp {
  Mat x;
  Vec y;
  double l, s2, noise, c;
};

RandomGp random_gp(Rng rng) {
  RandomGp g;
  const auto n = 1 + static_cast<Eigen::Index>(rng.uniform_index(7));
  g.x = uniform_mat(rng.split("x"), n, 2, -2, 2);
  g.y = uniform_mat(rng.split("y"), n, 1, -1.5, 1.5).col(0);
  g.l = between(rng, 0.5, 2.0);
  g.s2 = between(rng, 0.5, 2.0);
  g.noise = between(rng, 0.01, 0.2);
  g.c = between(rng, -1, 1);
  return g;
}

Outcome one_step_exactness() {
  Outcome out;
  double worst_v = 0, worst_m = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng = Rng(202).split(s);
    const auto g = random_gp(rng.split("gp"));
    const auto post = gp::fit(gp::Kernel::rbf(g.l, g.s2), g.c, g.noise, g.x, g.y);
    const Vec xp = uniform_mat(rng.split("p"), 1, 2, -2, 2).row(0).transpose();
    const Mat ctx = uniform_mat(rng.split("c"), 6, 2, -2.5, 2.5);
    const double y_plus = between(rng, -2, 2);
    const auto u = gp::one_step_update(post, xp, ctx);
    const auto refit = oracle::DenseGp(g.x, g.y, g.l, g.s2, g.noise, g.c).with(xp, y_plus);
    const Vec m_next = u.mean_next(y_plus);
    for (Eigen::Index j = 0; j < ctx.rows(); ++j) {
      const Vec t = ctx.row(j).transpose();
      worst_v = std::max(worst_v, std::abs(u.v_next[j] - refit.cov(t, t)));
      worst_m = std::max(worst_m, std::abs(m_next[j] - refit.mean(t)));
    }
  }
  out.require(worst_v <= kGpTol, "max variance error vs refit = " + fmt(worst_v) + " (tol " + fmt(kGpTol) + ")");
  out.require(worst_m <= kGpTol, "max mean error vs refit = " + fmt(worst_m) + " (tol " + fmt(kGpTol) + ")");
  return out;
}

Outcome evr_identity() {
  Outcome out;
  double worst = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng = Rng(303).split(s);
    const auto g = random_gp(rng.split("gp"));
    const auto post = gp::fit(gp::Kernel::rbf(g.l, g.s2), g.c, g.noise, g.x, g.y);
    const oracle::DenseGp ref(g.x, g.y, g.l, g.s2, g.noise, g.c);
    const Mat cand = uniform_mat(rng.split("p"), 5, 2, -2.5, 2.5), ctx = uniform_mat(rng.split("c"), 7, 2, -2.5, 2.5);
    const auto r = acquisition::evr_scores(post, cand, ctx);
    for (Eigen::Index p = 0; p < cand.rows(); ++p) {
      const auto upd = ref.with(cand.row(p).transpose(), 0.0);
      double red = 0;
      for (Eigen::Index c = 0; c < ctx.rows(); ++c) {
        const Vec t = ctx.row(c).transpose();
        red += ref.cov(t, t) - upd.cov(t, t);
      }
      worst = std::max(worst, std::abs(r.scores[p] - red / static_cast<double>(ctx.rows())));
    }
  }
  out.require(worst <= kEvrTol, "max |EVR - refit reduction| = " + fmt(worst) + " (tol " + fmt(kEvrTol) + ")");
  return out;
}

// --- 4 ---------------------------------------------------------------------

Outcome analytic_vs_mc() {
  Outcome out;
  Rng rng(404);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    const beliefs::GaussianBelief b{between(rng, -2, 2), between(rng, 0.1, 1.5)};
    const double alpha = (t % 2 ? 1 : -1) * between(rng, 0.2, 1.0);
    const auto w = alpha > 0 ? WeightFunction::exp_pos(alpha) : WeightFunction::exp_neg(-alpha);
    const auto an = beliefs::weighted_gaussian_summary_analytic(b, alpha);
    const auto mc = beliefs::weighted_gaussian_summary_mc(b, w, 1'000'000, 4000 + static_cast<std::uint64_t>(t));
    worst = std::max({worst, std::abs(mc.w_bar - an.w_bar) / mc.se_w_bar, std::abs(mc.mu_w - an.mu_w) / mc.se_mu_w,
                      std::abs(mc.u_w - an.u_w) / mc.se_u_w});
  }
  out.require(worst <= kMcSigmas, "max deviation of MC from the closed form = " + fmt(worst) +
                                      " standard errors over 20 cases x 3 moments (tol " + fmt(kMcSigmas) + ")");
  return out;
}

// --- 5 ---------------------------------------------------------------------

acquisition::DiscreteJointModel random_joint(Rng& rng, bool label_states) {
  const int nc = 1 + static_cast<int>(rng.uniform_index(3)), nz = 2 + static_cast<int>(rng.uniform_index(3)),
            ny = 2 + static_cast<int>(rng.uniform_index(3));
  acquisition::DiscreteJointModel m;
  m.p_c = random_simplex(rng, nc);
  m.p_z_given_c.resize(nc, nz);
  for (int c = 0; c < nc; ++c) {
    m.p_z_given_c.row(c) = random_simplex(rng, nz).transpose();
    Mat py(nz, ny);
    for (int z = 0; z < nz; ++z) py.row(z) = random_simplex(rng, ny).transpose();
    m.p_y_given_zc.push_back(py);
  }
  for (int z = 0; z < nz; ++z) m.z_support.push_back(Vec::Constant(1, label_states ? z : between(rng, -1, 2)));
  return m;
}

/// Model with prior p_w(c, z) proportional to w(z) p(c) p(z | c); returns w_bar.
double reweighted(const acquisition::DiscreteJointModel& m, const std::function<double(int)>& w,
                  acquisition::DiscreteJointModel& mw) {
  mw = m;
  const auto nc = m.p_c.size(), nz = m.p_z_given_c.cols();
  Vec pc(nc);
  for (Eigen::Index c = 0; c < nc; ++c) {
    Vec row(nz);
    for (Eigen::Index z = 0; z < nz; ++z) row[z] = w(static_cast<int>(z)) * m.p_z_given_c(c, z);
    pc[c] = m.p_c[c] * row.sum();
    mw.p_z_given_c.row(c) = (row / row.sum()).transpose();
  }
  const double w_bar = pc.sum();
  mw.p_c = pc / w_bar;
  return w_bar;
}

Outcome epu_reweighting() {
  Outcome out;
  Rng rng(505);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const bool classes = t % 2 == 1;
    const auto m = random_joint(rng, classes);
    const auto nz = static_cast<int>(m.z_support.size());
    acquisition::DiscreteJointModel mw;
    double lhs = 0, rhs = 0;
    if (classes) {
      Vec cw(nz);
      for (int z = 0; z < nz; ++z) cw[z] = between(rng, 0.5, 50);
      const double w_bar = reweighted(m, [&](int z) { return cw[z]; }, mw);
      lhs = acquisition::discrete_epu(m, WeightedBregmanLoss::log_loss(nz, WeightFunction::class_weights(cw)));
      rhs = w_bar * acquisition::discrete_epu(mw, WeightedBregmanLoss::log_loss(nz));
    } else {
      const double a = between(rng, -1, 1);
      const double w_bar = reweighted(m, [&](int z) { return std::exp(a * m.z_support[static_cast<std::size_t>(z)][0]); }, mw);
      lhs = acquisition::discrete_epu(m, WeightedBregmanLoss::squared_error(WeightFunction::exp_pos(a)));
      rhs = w_bar * acquisition::discrete_epu(mw, WeightedBregmanLoss::squared_error());
    }
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  out.require(worst <= kIdentityTol, "max |weighted EPU - w_bar x reweighted EPU| = " + fmt(worst) + " over 100 toys (tol " +
                                         fmt(kIdentityTol) + ")");
  return out;
}

// --- 6 ---------------------------------------------------------------------

Outcome decomposition() {
  Outcome out;
  Rng rng(606);
  double worst_sum = 0, worst_parts = 0;
  for (int t = 0; t < 100; ++t) {
    const int family = t % 3;
    const auto phi = family == 0 ? oracle::Phi::Quadratic : family == 1 ? oracle::Phi::NegEntropy : oracle::Phi::NegLog;
    const Potential pot = family == 0 ? Potential::quadratic() : family == 1 ? Potential::neg_entropy() : Potential::neg_log();
    auto point = [&]() -> Vec {
      if (family == 0) return Vec{{between(rng, -2, 2), between(rng, -2, 2)}};
      if (family == 1) return random_simplex(rng, 3);
      return Vec::Constant(1, between(rng, 0.2, 3));
    };
    const int nm = 2 + static_cast<int>(rng.uniform_index(4)), ne = 2 + static_cast<int>(rng.uniform_index(4));
    std::vector<Vec> sm, se;
    for (int i = 0; i < nm; ++i) sm.push_back(point());
    for (int i = 0; i < ne; ++i) se.push_back(point());
    const Vec qm = random_simplex(rng, nm), qe = random_simplex(rng, ne);
    const DiscreteBelief pm(sm, qm), pe(se, qe);
    const auto d = losses::eval_discrepancy_decomposition(pot, pm, pe);

    Vec mean_m = Vec::Zero(sm[0].size()), mean_e = Vec::Zero(se[0].size());
    for (int i = 0; i < nm; ++i) mean_m += qm[i] * sm[static_cast<std::size_t>(i)];
    for (int i = 0; i < ne; ++i) mean_e += qe[i] * se[static_cast<std::size_t>(i)];
    double total = 0;
    for (int i = 0; i < ne; ++i) total += qe[i] * oracle::bregman(phi, se[static_cast<std::size_t>(i)], mean_m);
    const double est = oracle::bregman(phi, mean_e, mean_m);
    const double irr = oracle::weighted_jensen_gap(phi, se, qe, Vec::Ones(ne));
    worst_sum = std::max(worst_sum, std::abs(total - est - irr));
    worst_parts = std::max({worst_parts, std::abs(d.total - total), std::abs(d.estimation_error - est),
                            std::abs(d.irreducible - irr)});
  }
  out.require(worst_sum <= kIdentityTol,
              "max |total - (estimation + irreducible)| = " + fmt(worst_sum) + " (tol " + fmt(kIdentityTol) + ")");
  out.require(worst_parts <= kIdentityTol,
              "max deviation of library terms from direct sums = " + fmt(worst_parts) + " (tol " + fmt(kIdentityTol) + ")");
  return out;
}

// --- 7, 9, 10: experiments -----------------------------------------------------

struct Finals {
  std::map<std::string, std::map<std::string, std::vector<double>>> values;

  loop::MeanSem at(const std::string& method, const std::string& metric) const {
    return loop::mean_sem(values.at(method).at(metric));
  }
};

Finals run_config(const nlohmann::json& cfg_json) {
  const auto cfg = cli::parse_config(cfg_json.dump());
  const auto result = cli::run_experiment(cfg);
  std::map<std::pair<std::uint64_t, std::string>, std::size_t> last;
  for (const auto& r : result.rows) {
    auto& l = last[{r.seed, r.method}];
    l = std::max(l, r.round);
  }
  Finals f;
  for (const auto& r : result.rows) {
    if (r.round == last.at({r.seed, r.method})) f.values[r.method][r.metric].push_back(r.value);
  }
  return f;
}

std::vector<int> seed_list(int n) {
  std::vector<int> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i;
  return s;
}

std::string show(const loop::MeanSem& m) { return fmt(m.mean) + " +/- " + fmt(m.sem); }

/// Requires `lower` below `upper` by at least `sems` combined standard errors.
void require_below(Outcome& out, const Finals& f, const std::string& metric, const std::string& lower,
                   const std::string& upper, double sems) {
  const auto a = f.at(lower, metric), b = f.at(upper, metric);
  const double combined = std::hypot(a.sem, b.sem);
  const double gap = b.mean - a.mean;
  out.require(gap > 0 && gap >= sems * combined, metric + ": " + lower + " " + show(a) + " < " + upper + " " + show(b) +
                                                     " (gap " + fmt(gap) + ", need >= " + fmt(sems) + " x " +
                                                     fmt(combined) + ")");
}

void reference_band(Outcome& out, const std::string& what, double value, double reference) {
  const bool inside = std::abs(value - reference) <= kReferenceBand * reference;
  out.info(what + " = " + fmt(value) + ", published " + fmt(reference) + ", band +/-50%: " +
           (inside ? "inside" : "outside"));
}

Outcome synthetic_ordering() {
  Outcome out;
  const nlohmann::json cfg = {{"task", {{"kind", "synth_1d"}}},
                              {"model", {{"kind", "gp"}, {"hyperparameters", "fixed"}}},
                              {"methods", {"Random", "EVR", "EVRw"}},
                              {"weight", {{"kind", "exp_pos"}, {"alpha", 1.0}}},
                              {"rounds", 25},
                              {"seeds", seed_list(25)}};
  const auto f = run_config(cfg);
  require_below(out, f, "SEL", "EVR", "Random", kOrderingSems);
  require_below(out, f, "SEL", "EVR", "EVRw", kOrderingSems);
  require_below(out, f, "SEL_w", "EVRw", "EVR", kOrderingSems);
  require_below(out, f, "SEL_w", "EVR", "Random", kOrderingSems);
  reference_band(out, "SEL(EVR)", f.at("EVR", "SEL").mean, kReferenceSel);
  reference_band(out, "SEL_w(EVRw)", f.at("EVRw", "SEL_w").mean, kReferenceSelW);
  out.info("SEL_w at the unweighted mean: EVRw " + show(f.at("EVRw", "SEL_w_mean")) + ", EVR " +
           show(f.at("EVR", "SEL_w_mean")) + ", Random " + show(f.at("Random", "SEL_w_mean")));
  return out;
}

Outcome class_steering() {
  Outcome out;
  const nlohmann::json cfg = {{"task",
                               {{"kind", "blobs"},
                                {"n_classes", 4},
                                {"per_class", 200},
                                {"dim", 18},
                                {"separation", 0.5},
                                {"per_class_test", 45},
                                {"per_class_context", 45},
                                {"n_initial_per_class", 5},
                                {"data_seed", 0}}},
                              {"model", {{"kind", "forest"}, {"n_trees", 100}}},
                              {"methods", {"EPIG", "EPIGw"}},
                              {"weight", {{"kind", "class_weights"}, {"values", {50, 1, 1, 50}}}},
                              {"rounds", 40},
                              {"seeds", seed_list(20)}};
  const auto f = run_config(cfg);
  const auto sw = f.at("EPIGw", "acq_share_upweighted"), su = f.at("EPIG", "acq_share_upweighted");
  out.require(sw.mean - su.mean >= kShareMargin, "upweighted share: EPIGw " + show(sw) + " vs EPIG " + show(su) +
                                                     " (need difference >= " + fmt(kShareMargin) + ")");
  require_below(out, f, "NLL_w", "EPIGw", "EPIG", kSteeringSems);
  out.info("NLL: EPIGw " + show(f.at("EPIGw", "NLL")) + ", EPIG " + show(f.at("EPIG", "NLL")));
  return out;
}

Outcome linex_matching() {
  Outcome out;
  const nlohmann::json cfg = {{"task", {{"kind", "synth_1d"}}},
                              {"model", {{"kind", "gp"}, {"hyperparameters", "fixed"}}},
                              {"methods", {"EVR", "Linex"}},
                              {"linex_alpha", 1.0},
                              {"rounds", 25},
                              {"seeds", seed_list(25)}};
  const auto f = run_config(cfg);
  require_below(out, f, "Linex", "Linex", "EVR", kLinexSems);
  return out;
}

// --- 8 ---------------------------------------------------------------------

Outcome epig_checks() {
  Outcome out;
  Rng rng(808);
  Mat x(90, 3);
  std::vector<int> y(90);
  for (int i = 0; i < 90; ++i) {
    y[static_cast<std::size_t>(i)] = i % 3;
    for (int d = 0; d < 3; ++d) x(i, d) = (d == i % 3 ? 1.5 : 0.0) + rng.normal();
  }
  const auto ens = ensemble::train_ensemble(x, y, 3, 30, 7);
  const auto a = acquisition::epig_scores(ens, x.topRows(60), x.bottomRows(30));
  const auto b = acquisition::epig_weighted_scores(ens, x.topRows(60), x.bottomRows(30), Vec::Ones(3));
  out.require(a.scores == b.scores && a.best == b.best, "unit-weight EPIG_w scores equal EPIG scores bit for bit");

  double worst = 0;
  for (int t = 0; t < 500; ++t) {
    Mat ctx(2, 2), cand(2, 2);
    for (int i = 0; i < 2; ++i) {
      ctx.row(i) = random_simplex(rng, 2).transpose();
      cand.row(i) = random_simplex(rng, 2).transpose();
    }
    const Vec w = Vec{{between(rng, 0.5, 50), between(rng, 0.5, 50)}};
    worst = std::max(worst, std::abs(acquisition::epig_weighted_from_member_probs(ctx, cand, 2, w)[0] -
                                     oracle::epig_pair(ctx, cand, w)));
  }
  out.require(worst <= kEpigTol,
              "max |EPIG_w - enumeration| on 2-member/2-class tables = " + fmt(worst) + " (tol " + fmt(kEpigTol) + ")");
  return out;
}

// --- 11 --------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome out;
  const auto dir = std::filesystem::temp_directory_path() / "bal_acceptance_determinism";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const nlohmann::json cfg = {{"task", {{"kind", "synth_1d"}}},
                              {"methods", {"Random", "EVR", "EVRw"}},
                              {"weight", {{"kind", "exp_pos"}, {"alpha", 1.0}}},
                              {"rounds", 4},
                              {"seeds", {0, 1, 2}},
                              {"threads", 2},
                              {"output_dir", (dir / "out").string()}};
  std::ofstream(dir / "config.json") << cfg.dump(2);
  std::ostringstream sink;
  const int first_code = cli::cmd_run(dir / "config.json", sink, sink);
  const std::string first = slurp(dir / "out" / "results.csv");
  const int second_code = cli::cmd_run(dir / "config.json", sink, sink);
  const std::string second = slurp(dir / "out" / "results.csv");
  out.require(first_code == 0 && second_code == 0, "both runs exit 0");
  out.require(!first.empty() && first == second,
              "results.csv identical across runs (" + std::to_string(first.size()) + " bytes)");
  return out;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-11); default runs all");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "generalised entropy and Bayes act vs grid minimisation", entropy_vs_grid},
      {2, "GP one-step update vs full refit", one_step_exactness},
      {3, "closed-form EVR vs refit", evr_identity},
      {4, "exponential-weight summary: closed form vs Monte Carlo", analytic_vs_mc},
      {5, "weighted EPU equals w_bar x EPU under the reweighted prior", epu_reweighting},
      {6, "evaluation-discrepancy decomposition", decomposition},
      {7, "synthetic 1-D ordering of Random, EVR and EVR_w", synthetic_ordering},
      {8, "weighted EPIG reduction and enumeration oracle", epig_checks},
      {9, "class steering with w = (50, 1, 1, 50)", class_steering},
      {10, "Linex-targeted acquisition vs EVR under Linex loss", linex_matching},
      {11, "byte-identical reruns", determinism},
  };

  bool all_pass = true, ran = false;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    ran = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << " (" << fmt(secs) << " s)\n";
    for (const auto& d : o.details) std::cout << "        " << d << '\n';
    std::cout.flush();
    all_pass = all_pass && o.pass;
  }
  if (!ran) {
    std::cerr << "no criterion " << only << '\n';
    return 2;
  }
  return all_pass ? 0 : 1;
}

// Copyright 2026 The halypo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runnable property checks, grouped into suites. Each check reports the
// worst measured deviation next to the tolerance it was held to.

#pragma once

#include "halypo/fixtures.hpp"
#include "halypo/io.hpp"
#include "halypo/lyapunov.hpp"
#include "halypo/metrics.hpp"
#include "halypo/optimizers.hpp"
#include "halypo/projection.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace halypo::validate {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"projection", "gradients", "descent",
                                                 "convergence", "metrics", "all"};
  return names;
}

// ---------------------------------------------------------------------------
// Shared generators

struct ProjectionInstance {
  Vector u, h;
  double V = 0.0, sigma = 1.0;
};

// D ∈ [2, 64], Gaussian u and h (‖h‖ ≥ 1e−6), V ∈ [0, 10], σ ∈ [0.1, 10].
inline ProjectionInstance random_projection_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> dim(2, 64);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> vdist(0.0, 10.0), sdist(0.1, 10.0);
  ProjectionInstance p;
  const Index D = dim(rng);
  p.u.resize(D);
  p.h.resize(D);
  do {
    for (Index j = 0; j < D; ++j) {
      p.u[j] = g(rng);
      p.h[j] = g(rng);
    }
  } while (p.h.norm() < 1e-6);
  p.V = vdist(rng);
  p.sigma = sdist(rng);
  return p;
}

inline Vector random_vector(std::mt19937_64& rng, Index n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (Index j = 0; j < n; ++j) v[j] = g(rng);
  return v;
}

// Value iteration with its own joint-policy arithmetic; shares nothing with
// the linear-solve evaluator beyond the game tables.
inline Vector value_iteration(const TabularMarkovGame& mg, const Vector& theta,
                              double tol = 1e-14, int max_iter = 100000) {
  const Index S = mg.n_states(), nA = mg.n_joint_actions();
  Matrix pi(S, nA);
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < nA; ++a) {
      double p = 1.0;
      Index off = 0;
      for (Index i = 0; i < mg.n_agents(); ++i) {
        const Index Ai = mg.action_count(i);
        double z = 0.0;
        for (Index b = 0; b < Ai; ++b) z += std::exp(theta[off + s * Ai + b]);
        p *= std::exp(theta[off + s * Ai + mg.agent_action(a, i)]) / z;
        off += S * Ai;
      }
      pi(s, a) = p;
    }
  }
  Vector v = Vector::Zero(S);
  for (int it = 0; it < max_iter; ++it) {
    Vector next = Vector::Zero(S);
    for (Index s = 0; s < S; ++s) {
      for (Index a = 0; a < nA; ++a) {
        double cont = 0.0;
        for (Index t = 0; t < S; ++t) cont += mg.transition(s, a, t) * v[t];
        next[s] += pi(s, a) * (mg.rewards()(s, a) + mg.gamma() * cont);
      }
    }
    const double delta = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (delta < tol) break;
  }
  return v;
}

// h through the chain rule with finite-difference field Jacobians, for games
// without analytic ones. Independent of the finite-difference gradient of V.
inline Vector stability_normal_chain_fd(const Game& game, const Vector& theta) {
  const FieldSample fs = sample_fields(game, theta);
  const double s = default_fd_step(theta);
  const Matrix jac = fd_jacobian(
      [&](const Vector& t) { return Vector(game.independent_field(t) - game.team_field(t)); },
      theta, s);
  return jac.transpose() * fs.e;
}

// ---------------------------------------------------------------------------
// Check construction

namespace detail {

inline CheckResult at_most(std::string suite, std::string name, double measured, double tol,
                           std::string detail = {}) {
  CheckResult c;
  c.suite = std::move(suite);
  c.name = std::move(name);
  c.measured = measured;
  c.tolerance = tol;
  c.passed = std::isfinite(measured) && measured <= tol;
  c.detail = std::move(detail);
  return c;
}

inline CheckResult boolean(std::string suite, std::string name, bool ok, std::string detail = {}) {
  return at_most(std::move(suite), std::move(name), ok ? 0.0 : 1.0, 0.0, std::move(detail));
}

inline double rel(const Vector& a, const Vector& b) {
  const double scale = b.norm();
  return scale > 0.0 ? (a - b).norm() / scale : (a - b).norm();
}

// Runs `fn`; an escaping exception fails the check with its message.
inline CheckResult guarded(const std::string& suite, const std::string& name,
                           const std::function<CheckResult()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    CheckResult c;
    c.suite = suite;
    c.name = name;
    c.measured = std::numeric_limits<double>::infinity();
    c.detail = std::string("exception: ") + e.what();
    return c;
  }
}

inline std::vector<std::shared_ptr<const Game>> analytic_games() {
  return {fixtures::make("bilinear"), fixtures::make("bilinear_quadratic"),
          fixtures::make("q_example")};
}

// Markov fixtures with a critic captured at a different point, so the
// independent field is genuinely stale.
inline std::shared_ptr<const Game> stale_markov(const std::string& name, std::mt19937_64& rng) {
  auto tables = fixtures::markov_tables(name);
  const Vector at = random_vector(rng, tables->layout().total_dim());
  return std::make_shared<const MarkovGame>(tables, refresh_snapshot(*tables, at, 0, 10));
}

inline std::string fmt(double x) { return io::format_double(x); }

}  // namespace detail

// ---------------------------------------------------------------------------
// projection

inline std::vector<CheckResult> projection_checks(std::uint64_t seed) {
  using detail::at_most;
  using detail::guarded;
  const std::string S = "projection";
  std::vector<CheckResult> out;

  out.push_back(guarded(S, "closed_form_examples", [&] {
    double worst = 0.0;
    auto r1 = halypo_project(Vector{{1.0, 0.0}}, Vector{{1.0, 0.0}}, 1.0, 1.0, 0.0);
    worst = std::max({worst, std::abs(r1.lambda_star - 2.0), detail::rel(r1.d_star, Vector{{-1.0, 0.0}})});
    auto r2 = halypo_project(Vector{{-1.0, -2.0}}, Vector{{4.0, 0.0}}, 2.0, 1.0, 0.0);
    worst = std::max({worst, std::abs(r2.lambda_star), detail::rel(r2.d_star, Vector{{-1.0, -2.0}}),
                      r2.regime == Regime::kInactive ? 0.0 : 1.0});
    auto r3 = halypo_project(Vector{{0.0, -1.0}}, Vector{{2.0, 0.0}}, 1.0, 1.0, 0.0);
    worst = std::max({worst, std::abs(r3.lambda_star - 0.25),
                      detail::rel(r3.d_star, Vector{{-0.5, -1.0}}), std::abs(r3.constraint_residual)});
    return at_most(S, "closed_form_examples", worst, 1e-15);
  }));

  out.push_back(guarded(S, "oracle_equivalence", [&] {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const auto p = random_projection_instance(rng);
      const auto r = halypo_project(p.u, p.h, p.V, p.sigma, 0.0);
      worst = std::max(worst, detail::rel(r.d_star, halfspace_oracle(p.u, p.h, -p.sigma * p.V)));
    }
    return at_most(S, "oracle_equivalence", worst, 1e-9, "1000 instances, relative error");
  }));

  out.push_back(guarded(S, "kkt_residuals", [&] {
    std::mt19937_64 rng(seed + 1);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const auto p = random_projection_instance(rng);
      const auto r = halypo_project(p.u, p.h, p.V, p.sigma, 0.0);
      const auto k = kkt_residuals(p.u, p.h, p.V, p.sigma, 0.0, r);
      const double scale = 1.0 + p.u.norm() + p.sigma * p.V;
      worst = std::max({worst, k.stationarity / scale, k.feasibility / scale, k.slackness / scale});
    }
    return at_most(S, "kkt_residuals", worst, 1e-10, "max residual / (1 + |u| + sigma V)");
  }));

  out.push_back(guarded(S, "dissipativity", [&] {
    std::mt19937_64 rng(seed + 2);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const auto p = random_projection_instance(rng);
      const auto r = halypo_project(p.u, p.h, p.V, p.sigma, 0.0);
      worst = std::max(worst, (p.h.dot(r.d_star) + p.sigma * p.V) / (1.0 + p.sigma * p.V));
    }
    return at_most(S, "dissipativity", worst, 1e-10, "(<h,d> + sigma V) / (1 + sigma V)");
  }));

  out.push_back(guarded(S, "damped_residual", [&] {
    std::mt19937_64 rng(seed + 3);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const auto p = random_projection_instance(rng);
      const double eps = 1e-3;
      const auto r = halypo_project(p.u, p.h, p.V, p.sigma, eps);
      const double lhs = p.h.dot(r.d_star) + p.sigma * p.V;
      const double scale =
          p.h.norm() * p.u.norm() + p.sigma * p.V + r.lambda_star * p.h.squaredNorm();
      const double target = r.regime == Regime::kActive ? eps * r.lambda_star : lhs;
      worst = std::max(worst, std::abs(lhs - target) / scale);
    }
    return at_most(S, "damped_residual", worst, 1e-12, "eps = 1e-3: <h,d> + sigma V = eps lambda");
  }));

  out.push_back(guarded(S, "minimality_audit", [&] {
    std::mt19937_64 rng(seed + 4);
    std::size_t violations = 0;
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const auto p = random_projection_instance(rng);
      const auto r = halypo_project(p.u, p.h, p.V, p.sigma, 0.0);
      const auto audit = audit_halfspace_optimality(p.u, p.h, -p.sigma * p.V, r.d_star, rng);
      violations += audit.violations;
      worst = std::min(worst, audit.worst_margin);
    }
    return at_most(S, "minimality_audit", static_cast<double>(violations), 0.0,
                   "50 instances x 200 feasible perturbations; worst margin " +
                       detail::fmt(worst));
  }));

  out.push_back(guarded(S, "idempotence", [&] {
    std::mt19937_64 rng(seed + 5);
    double worst = 0.0;
    int used = 0;
    for (int t = 0; t < 1000; ++t) {
      const auto p = random_projection_instance(rng);
      const auto r = halypo_project(p.u, p.h, p.V, p.sigma, 0.0);
      const double Vb = -p.h.dot(r.d_star) / p.sigma;
      if (Vb < 0.0) continue;  // boundary value must be a valid gap
      ++used;
      const auto again = halypo_project(r.d_star, p.h, Vb, p.sigma, 0.0);
      worst = std::max(worst, detail::rel(again.d_star, r.d_star));
    }
    return at_most(S, "idempotence", worst, 1e-12, std::to_string(used) + " boundary re-projections");
  }));

  out.push_back(guarded(S, "regime_sign", [&] {
    std::mt19937_64 rng(seed + 6);
    std::uniform_real_distribution<double> alpha(0.01, 10.0);
    int mismatches = 0;
    for (int t = 0; t < 500; ++t) {
      const auto p = random_projection_instance(rng);
      const double a = alpha(rng);
      const Vector u = a * p.u;
      const auto r = halypo_project(u, p.h, p.V, p.sigma, 0.0);
      const bool active = p.h.dot(u) + p.sigma * p.V > 0.0;
      if (active != (r.regime == Regime::kActive)) ++mismatches;
      if ((r.regime == Regime::kInactive) != (r.lambda_star == 0.0)) ++mismatches;
      if (r.regime == Regime::kInactive && r.d_star != u) ++mismatches;
    }
    return at_most(S, "regime_sign", mismatches, 0.0, "regime follows the numerator sign");
  }));

  out.push_back(guarded(S, "degenerate_normal", [&] {
    bool threw = false;
    try {
      (void)halypo_project(Vector{{1.0, 0.0}}, Vector::Zero(2), 1.0, 1.0, 0.0);
    } catch (const InfeasibleError&) {
      threw = true;
    }
    const auto damped = halypo_project(Vector{{1.0, 0.0}}, Vector::Zero(2), 1.0, 1.0, 1e-8);
    const double err = std::abs(damped.lambda_star - 1.0 / 1e-8) * 1e-8;
    return at_most(S, "degenerate_normal", threw ? err : 1.0, 1e-12,
                   "eps = 0 raises; eps > 0 gives lambda = numerator / eps");
  }));
  return out;
}

// ---------------------------------------------------------------------------
// gradients

inline std::vector<CheckResult> gradient_checks(std::uint64_t seed) {
  using detail::at_most;
  using detail::guarded;
  const std::string S = "gradients";
  std::vector<CheckResult> out;

  // every registered game plus stale-critic variants of the Markov ones
  auto all_games = [&](std::mt19937_64& rng) {
    std::vector<std::shared_ptr<const Game>> gs;
    for (const auto& name : fixtures::names()) gs.push_back(fixtures::make(name));
    gs.push_back(detail::stale_markov("two_state", rng));
    gs.push_back(detail::stale_markov("bandit", rng));
    return gs;
  };

  out.push_back(guarded(S, "team_field_fd", [&] {
    std::mt19937_64 rng(seed + 10);
    double worst = 0.0;
    for (const auto& g : all_games(rng)) {
      for (int t = 0; t < 100; ++t) {
        const Vector th = random_vector(rng, g->layout().total_dim());
        const Vector u = eval_team_field(*g, JointParams(th, g->layout()));
        const Vector fd = fd_gradient([&](const Vector& x) { return g->team_payoff(x); }, th,
                                      default_fd_step(th));
        worst = std::max(worst, (u - fd).norm() / (1.0 + u.norm()));
      }
    }
    return at_most(S, "team_field_fd", worst, 1e-5, "|u_team - fd(J)| / (1 + |u_team|)");
  }));

  out.push_back(guarded(S, "independent_field_fd", [&] {
    std::mt19937_64 rng(seed + 11);
    double worst = 0.0;
    for (const auto& g : all_games(rng)) {
      const auto& L = g->layout();
      for (int t = 0; t < 100; ++t) {
        const Vector th = random_vector(rng, L.total_dim());
        const Vector u = eval_independent_field(*g, JointParams(th, L));
        Vector fd(L.total_dim());
        for (Index i = 0; i < L.n_agents(); ++i) {
          const Vector gi = fd_gradient(
              [&](const Vector& x) { return g->agent_surrogate(i, th, x); }, th,
              default_fd_step(th));
          L.block(fd, i) = L.block(gi, i);
        }
        worst = std::max(worst, (u - fd).norm() / (1.0 + u.norm()));
      }
    }
    return at_most(S, "independent_field_fd", worst, 1e-5, "block i vs fd(f_i) in block i");
  }));

  out.push_back(guarded(S, "stability_normal_agreement", [&] {
    std::mt19937_64 rng(seed + 12);
    double worst = 0.0;
    for (const auto& g : detail::analytic_games()) {
      for (int t = 0; t < 100; ++t) {
        const Vector th = random_vector(rng, g->layout().total_dim());
        const Vector a = stability_normal_analytic(*g, th);
        const Vector f = stability_normal_fd(*g, th);
        worst = std::max(worst, (a - f).norm() / (1.0 + a.norm()));
      }
    }
    for (const std::string name : {"two_state", "bandit"}) {
      const auto g = detail::stale_markov(name, rng);
      for (int t = 0; t < 20; ++t) {
        const Vector th = random_vector(rng, g->layout().total_dim());
        const Vector a = stability_normal_chain_fd(*g, th);
        const Vector f = stability_normal_fd(*g, th);
        worst = std::max(worst, (a - f).norm() / (1.0 + a.norm()));
      }
    }
    return at_most(S, "stability_normal_agreement", worst, 1e-5,
                   "analytic (or chain-rule) h vs fd(V), scaled by 1 + |h|");
  }));

  out.push_back(guarded(S, "policy_gradient_fd", [&] {
    std::mt19937_64 rng(seed + 13);
    double worst = 0.0;
    for (const std::string name : {"two_state", "bandit"}) {
      const auto mg = fixtures::markov_tables(name);
      for (int t = 0; t < 50; ++t) {
        const Vector th = random_vector(rng, mg->layout().total_dim());
        const Vector g = exact_policy_gradient(*mg, th);
        const Vector fd = fd_gradient([&](const Vector& x) { return team_return(*mg, x); }, th,
                                      default_fd_step(th));
        worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-12));
      }
    }
    return at_most(S, "policy_gradient_fd", worst, 1e-6, "relative to |grad J|");
  }));

  out.push_back(guarded(S, "bandit_gradient", [&] {
    const auto mg = fixtures::bandit_tables();
    const Vector g = exact_policy_gradient(*mg, Vector::Zero(2));
    return at_most(S, "bandit_gradient", (g - Vector{{0.25, -0.25}}).cwiseAbs().maxCoeff(), 1e-15);
  }));

  out.push_back(guarded(S, "policy_eval_value_iteration", [&] {
    std::mt19937_64 rng(seed + 14);
    double worst = 0.0;
    for (const std::string name : {"two_state", "bandit"}) {
      const auto mg = fixtures::markov_tables(name);
      for (int t = 0; t < 10; ++t) {
        const Vector th = random_vector(rng, mg->layout().total_dim());
        worst = std::max(worst,
                         (policy_eval(*mg, th).v - value_iteration(*mg, th)).cwiseAbs().maxCoeff());
      }
    }
    return at_most(S, "policy_eval_value_iteration", worst, 1e-10, "max |v - v_VI|");
  }));

  out.push_back(guarded(S, "fresh_critic_agreement", [&] {
    std::mt19937_64 rng(seed + 15);
    double worst = 0.0;
    for (const std::string name : {"two_state", "bandit"}) {
      const auto mg = fixtures::markov_tables(name);
      for (int t = 0; t < 20; ++t) {
        const Vector th = random_vector(rng, mg->layout().total_dim());
        const auto snap = refresh_snapshot(*mg, th, 7, 10);
        worst = std::max(worst, (stale_critic_field(*mg, th, snap) - exact_policy_gradient(*mg, th))
                                    .cwiseAbs()
                                    .maxCoeff());
      }
    }
    return at_most(S, "fresh_critic_agreement", worst, 1e-12, "staleness 0");
  }));

  out.push_back(guarded(S, "quadratic_gap_closed_form", [&] {
    std::mt19937_64 rng(seed + 16);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const auto g = fixtures::random_quadratic(rng);
      const Matrix A = g->field_matrix() - g->team_matrix();
      const Vector c = g->field_offset() - g->team_offset();
      for (int s = 0; s < 20; ++s) {
        const Vector th = random_vector(rng, g->layout().total_dim());
        const double closed = 0.5 * (A * th + c).squaredNorm();
        worst = std::max(worst, std::abs(sample_fields(*g, th).V - closed) / std::max(closed, 1e-300));
      }
    }
    return at_most(S, "quadratic_gap_closed_form", worst, 1e-12, "200 points");
  }));

  out.push_back(guarded(S, "field_decomposition", [&] {
    std::mt19937_64 rng(seed + 17);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const Index D = 2 + t % 15;
      Matrix M(D, D);
      for (Index r = 0; r < D; ++r) M.row(r) = random_vector(rng, D).transpose();
      const auto parts = field_decomposition(M);
      worst = std::max(worst, (parts.symmetric + parts.antisymmetric - M).norm() / M.norm());
    }
    return at_most(S, "field_decomposition", worst, 1e-15, "reconstruction / |M|");
  }));

  out.push_back(guarded(S, "purity", [&] {
    std::mt19937_64 rng(seed + 18);
    int diffs = 0;
    for (const auto& g : all_games(rng)) {
      const Vector th = random_vector(rng, g->layout().total_dim());
      if (g->independent_field(th) != g->independent_field(th)) ++diffs;
      if (g->team_field(th) != g->team_field(th)) ++diffs;
      if (g->team_payoff(th) != g->team_payoff(th)) ++diffs;
    }
    return at_most(S, "purity", diffs, 0.0, "repeat evaluations are bit-identical");
  }));
  return out;
}

// ---------------------------------------------------------------------------
// descent

inline OptimizerConfig certified_adaptive_config() {
  OptimizerConfig c;
  c.variant = Variant::kHalypoNoAlign;
  c.sigma = 1.0;
  c.epsilon = 0.0;
  c.schedule = AdaptiveStep{0.5};
  return c;
}

// Worst certificate slack and worst V increase over a run.
struct CertificateAudit {
  double min_slack = std::numeric_limits<double>::infinity();
  double max_increase = -std::numeric_limits<double>::infinity();
  std::size_t steps = 0;
  std::optional<std::string> failure;
};

inline CertificateAudit audit_certificate(const Game& game, const Vector& theta0,
                                          const OptimizerConfig& config, long n_steps) {
  const auto tr = run_trajectory(game, JointParams(theta0, game.layout()), config, n_steps);
  CertificateAudit a;
  a.failure = tr.failure;
  const double L = tr.smoothness ? tr.smoothness->L : *game.exact_smoothness();
  for (std::size_t k = 0; k + 1 < tr.records.size(); ++k) {
    const auto& r = tr.records[k];
    const auto c = descent_certificate_check(r.V, tr.records[k + 1].V, r.eta, config.sigma, L,
                                             r.d_norm * r.d_norm);
    a.min_slack = std::min(a.min_slack, c.slack);
    a.max_increase = std::max(a.max_increase, tr.records[k + 1].V - r.V);
    ++a.steps;
  }
  return a;
}

inline std::vector<CheckResult> descent_checks(std::uint64_t seed) {
  using detail::at_most;
  using detail::guarded;
  const std::string S = "descent";
  std::vector<CheckResult> out;

  out.push_back(guarded(S, "bilinear_equality", [&] {
    const auto g = make_bilinear_rotation_game();
    OptimizerConfig c;
    c.variant = Variant::kHalypoNoAlign;
    c.epsilon = 0.0;
    c.schedule = ConstantStep{0.1};
    const auto tr = run_trajectory(*g, JointParams(Vector{{1.0, 0.0}}, g->layout()), c, 2);
    const auto& r = tr.records[0];
    const auto cert = descent_certificate_check(r.V, tr.records[1].V, r.eta, 1.0, 2.0,
                                                r.d_norm * r.d_norm);
    return at_most(S, "bilinear_equality", std::abs(cert.slack), 1e-9,
                   "V1 - V0 = " + detail::fmt(tr.records[1].V - r.V));
  }));

  out.push_back(guarded(S, "certificate_random_quadratic", [&] {
    std::mt19937_64 rng(seed + 20);
    double worst = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 20; ++t) {
      const auto g = fixtures::random_quadratic(rng);
      const auto a = audit_certificate(*g, random_vector(rng, g->layout().total_dim()),
                                       certified_adaptive_config(), 200);
      if (a.failure) throw Error("run failed: " + *a.failure);
      worst = std::min(worst, a.min_slack);
    }
    return at_most(S, "certificate_random_quadratic", -worst, 1e-9,
                   "20 games x 200 adaptive steps; reported value is -min slack");
  }));

  out.push_back(guarded(S, "monotone_adaptive", [&] {
    std::mt19937_64 rng(seed + 21);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& g : detail::analytic_games()) {
      const auto a = audit_certificate(*g, random_vector(rng, 2), certified_adaptive_config(), 300);
      worst = std::max(worst, a.max_increase);
    }
    for (int t = 0; t < 20; ++t) {
      const auto g = fixtures::random_quadratic(rng);
      const auto a = audit_certificate(*g, random_vector(rng, g->layout().total_dim()),
                                       certified_adaptive_config(), 200);
      worst = std::max(worst, a.max_increase);
    }
    return at_most(S, "monotone_adaptive", worst, 1e-12, "max V_{k+1} - V_k");
  }));

  out.push_back(guarded(S, "exact_smoothness_lipschitz", [&] {
    std::mt19937_64 rng(seed + 22);
    double worst = 0.0, tightness = 0.0;
    for (int t = 0; t < 10; ++t) {
      const auto g = fixtures::random_quadratic(rng);
      const double L = *g->exact_smoothness();
      const Index D = g->layout().total_dim();
      for (int s = 0; s < 10; ++s) {
        const Vector a = random_vector(rng, D), b = random_vector(rng, D);
        const double ratio = (stability_normal_analytic(*g, a) - stability_normal_analytic(*g, b)).norm() /
                             (a - b).norm();
        worst = std::max(worst, ratio / L - 1.0);
      }
      const Matrix A = g->field_matrix() - g->team_matrix();
      Eigen::SelfAdjointEigenSolver<Matrix> eig(A.transpose() * A);
      const Vector top = eig.eigenvectors().col(D - 1);
      const Vector a = random_vector(rng, D);
      const double ratio =
          (stability_normal_analytic(*g, a + top) - stability_normal_analytic(*g, a)).norm();
      tightness = std::max(tightness, std::abs(ratio / L - 1.0));
    }
    return at_most(S, "exact_smoothness_lipschitz", std::max(worst, tightness), 1e-10,
                   "ratio <= L on random pairs; = L along the top eigenvector");
  }));

  out.push_back(guarded(S, "quadratic_interpolation", [&] {
    std::mt19937_64 rng(seed + 23);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const auto g = fixtures::random_quadratic(rng);
      const Index D = g->layout().total_dim();
      const Vector th = random_vector(rng, D), v = random_vector(rng, D);
      const double step = 0.5;
      const Matrix A = g->field_matrix() - g->team_matrix();
      const double lhs = rationality_gap(*g, th + step * v) + rationality_gap(*g, th - step * v) -
                         2.0 * rationality_gap(*g, th);
      const double rhs = step * step * (A * v).squaredNorm();
      const double scale = 1.0 + rationality_gap(*g, th + step * v) + rationality_gap(*g, th);
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return at_most(S, "quadratic_interpolation", worst, 1e-10,
                   "V(x+tv) + V(x-tv) - 2V(x) = t^2 |(M-Q)v|^2");
  }));
  return out;
}

// ---------------------------------------------------------------------------
// convergence

struct RobbinsMonroOutcome {
  long settled_step = -1;  // first k after which every V stays below the threshold
  double final_V = 0.0;
  double weighted_sum = 0.0;  // Σ η_k V_k
  bool partial_sums_monotone = true;
  double bound = 0.0;  // V_0 + (L Ĝ²/2)(π²/6) η0²
  double L = 0.0;
  double G = 0.0;
  std::optional<std::string> failure;
};

inline constexpr double kRobbinsMonroSigma = 2.0;

// The Robbins-Monro run used by the convergence checks: η_k = 0.5/(k+1),
// projection without rectification, K = 10 for critic games.
inline OptimizerConfig robbins_monro_config(HMode mode) {
  OptimizerConfig c;
  c.variant = Variant::kHalypoNoAlign;
  c.sigma = kRobbinsMonroSigma;
  c.schedule = RobbinsMonroStep{0.5, 1.0};
  c.h_mode = mode;
  c.snapshot_period = 10;
  return c;
}

inline RobbinsMonroOutcome robbins_monro_run(const Game& game, const Vector& theta0, HMode mode,
                                             long n_steps, double threshold = 1e-4) {
  const OptimizerConfig c = robbins_monro_config(mode);
  const auto tr = run_trajectory(game, JointParams(theta0, game.layout()), c, n_steps);
  RobbinsMonroOutcome out;
  out.failure = tr.failure;
  if (tr.records.empty()) return out;
  out.final_V = tr.records.back().V;
  long settled = static_cast<long>(tr.records.size());
  for (std::size_t k = tr.records.size(); k-- > 0;) {
    if (!(tr.records[k].V < threshold)) break;
    settled = static_cast<long>(k);
  }
  out.settled_step = settled < static_cast<long>(tr.records.size()) ? settled : -1;
  double prev = 0.0;
  for (const auto& r : tr.records) {
    out.weighted_sum += r.eta * r.V;
    if (out.weighted_sum < prev) out.partial_sums_monotone = false;
    prev = out.weighted_sum;
  }
  out.G = tr.sup_d_norm;
  if (auto exact = game.exact_smoothness()) {
    out.L = *exact;
  } else {
    // empirical, on a cloud around θ0 with the critic fresh at θ0
    std::mt19937_64 rng(c.smoothness_seed);
    std::vector<Vector> samples{theta0};
    for (int s = 1; s < c.smoothness_samples; ++s)
      samples.push_back(theta0 + random_vector(rng, theta0.size(), c.smoothness_radius));
    auto g = game.uses_critic() ? game.refreshed(theta0, 0, c.snapshot_period) : nullptr;
    out.L = smoothness_estimate(g ? *g : game, samples, mode).L;
  }
  const double eta0 = std::get<RobbinsMonroStep>(c.schedule).eta0;
  constexpr double kPi = 3.14159265358979323846;
  out.bound = tr.records.front().V + 0.5 * out.L * out.G * out.G * (kPi * kPi / 6.0) * eta0 * eta0;
  return out;
}

inline std::vector<CheckResult> convergence_checks(std::uint64_t seed) {
  using detail::at_most;
  using detail::guarded;
  const std::string S = "convergence";
  std::vector<CheckResult> out;
  const Vector e1{{1.0, 0.0}};

  out.push_back(guarded(S, "bilinear_contraction_ratio", [&] {
    const auto g = make_bilinear_rotation_game();
    OptimizerConfig c;
    c.variant = Variant::kHalypoNoAlign;
    c.epsilon = 0.0;
    c.schedule = ConstantStep{0.1};
    const auto tr = run_trajectory(*g, JointParams(e1, g->layout()), c, 101);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < tr.records.size(); ++k) {
      worst = std::max(worst, std::abs(tr.records[k + 1].V / tr.records[k].V / 0.9125 - 1.0));
    }
    worst = std::max(worst, std::abs(tr.records[100].V / std::pow(0.9125, 100) - 1.0));
    return at_most(S, "bilinear_contraction_ratio", worst, 1e-9, "V_{k+1}/V_k = 0.9125");
  }));

  out.push_back(guarded(S, "naive_expansion", [&] {
    const auto g = make_bilinear_rotation_game();
    OptimizerConfig c;
    c.variant = Variant::kNaive;
    c.schedule = ConstantStep{0.1};
    Vector th = e1;
    OptimizerState st;
    double worst = 0.0;
    for (long k = 0; k < 200; ++k) {
      const auto r = step(*g, th, c, k, st);
      worst = std::max(worst, std::abs(r.theta.squaredNorm() / th.squaredNorm() - 1.01));
      th = r.theta;
    }
    return at_most(S, "naive_expansion", worst, 1e-12, "|theta_{k+1}|^2 = 1.01 |theta_k|^2");
  }));

  out.push_back(guarded(S, "robbins_monro_analytic", [&] {
    double worst = 0.0;
    std::string detail;
    for (const std::string name : {"bilinear", "q_example"}) {
      const auto g = fixtures::make(name);
      const auto r = robbins_monro_run(*g, e1, HMode::kAnalytic, 100000);
      if (r.settled_step < 0 || r.failure) worst = std::numeric_limits<double>::infinity();
      worst = std::max(worst, r.final_V);
      detail += name + ": settled at k=" + std::to_string(r.settled_step) + "; ";
    }
    return at_most(S, "robbins_monro_analytic", worst, 1e-4, detail);
  }));

  // The Markov run is the slow one; both checks below read the same result.
  std::optional<RobbinsMonroOutcome> markov_rm;
  auto markov_run = [&]() -> const RobbinsMonroOutcome& {
    if (!markov_rm) {
      const auto g = fixtures::two_state();
      markov_rm = robbins_monro_run(*g, Vector::Zero(g->layout().total_dim()),
                                    HMode::kFiniteDifference, 100000);
    }
    return *markov_rm;
  };

  out.push_back(guarded(S, "robbins_monro_markov", [&] {
    const auto& r = markov_run();
    const double v = (r.settled_step < 0 || r.failure) ? std::numeric_limits<double>::infinity()
                                                       : r.final_V;
    return at_most(S, "robbins_monro_markov", v, 1e-4,
                   "settled at k=" + std::to_string(r.settled_step));
  }));

  out.push_back(guarded(S, "robbins_monro_summability", [&] {
    double worst = 0.0;
    std::string detail;
    auto account = [&](const std::string& name, const RobbinsMonroOutcome& r) {
      if (!r.partial_sums_monotone) worst = std::numeric_limits<double>::infinity();
      worst = std::max(worst, r.weighted_sum / r.bound);
      detail += name + ": " + detail::fmt(r.weighted_sum) + " < " + detail::fmt(r.bound) + "; ";
    };
    for (const std::string name : {"bilinear", "q_example"}) {
      const auto g = fixtures::make(name);
      account(name, robbins_monro_run(*g, e1, HMode::kAnalytic, 100000));
    }
    account("two_state", markov_run());
    return at_most(S, "robbins_monro_summability", worst, 1.0 - 1e-12,
                   "sum eta V / bound; " + detail);
  }));

  out.push_back(guarded(S, "zero_gap_reduction", [&] {
    std::mt19937_64 rng(seed + 30);
    const Index D = 4;
    Matrix A(D, D);
    for (Index r = 0; r < D; ++r) A.row(r) = random_vector(rng, D).transpose();
    const Matrix Q = -(A.transpose() * A + Matrix::Identity(D, D)) / static_cast<double>(D);
    const Vector b = random_vector(rng, D);
    const auto g = make_quadratic_game(AgentLayout::uniform(2, 2), {Q, Q}, {b, b}, Q, b);
    const Vector th0 = random_vector(rng, D);
    std::vector<Trajectory> runs;
    for (Variant v : {Variant::kHalypo, Variant::kNaive, Variant::kTeam}) {
      OptimizerConfig c;
      c.variant = v;
      c.schedule = ConstantStep{0.1};
      runs.push_back(run_trajectory(*g, JointParams(th0, g->layout()), c, 200));
    }
    const double d = std::max((runs[0].theta - runs[1].theta).cwiseAbs().maxCoeff(),
                              (runs[0].theta - runs[2].theta).cwiseAbs().maxCoeff());
    return at_most(S, "zero_gap_reduction", d, 1e-12, "halypo, naive, team coincide when V = 0");
  }));

  out.push_back(guarded(S, "refresh_every_step", [&] {
    const auto g = fixtures::two_state();
    std::mt19937_64 rng(seed + 31);
    const Vector th0 = random_vector(rng, g->layout().total_dim());
    OptimizerConfig h;
    h.variant = Variant::kHalypo;
    h.h_mode = HMode::kFiniteDifference;
    h.snapshot_period = 1;
    h.schedule = ConstantStep{0.1};
    OptimizerConfig t = h;
    t.variant = Variant::kTeam;
    const auto a = run_trajectory(*g, JointParams(th0, g->layout()), h, 200);
    const auto b = run_trajectory(*g, JointParams(th0, g->layout()), t, 200);
    return at_most(S, "refresh_every_step", (a.theta - b.theta).cwiseAbs().maxCoeff(), 1e-12,
                   "K = 1: halypo and team trajectories coincide");
  }));

  out.push_back(guarded(S, "stale_gap_replay", [&] {
    const auto g = fixtures::two_state();
    OptimizerConfig c;
    c.variant = Variant::kHalypo;
    c.h_mode = HMode::kFiniteDifference;
    c.snapshot_period = 1000;
    c.schedule = ConstantStep{0.1};
    const Vector th0 = Vector::Zero(g->layout().total_dim());
    const auto a = run_trajectory(*g, JointParams(th0, g->layout()), c, 6);
    const auto b = run_trajectory(*g, JointParams(th0, g->layout()), c, 6);
    const double v5 = a.records[5].V;
    const bool ok = v5 > 0.0 && v5 == b.records[5].V;
    return detail::boolean(S, "stale_gap_replay", ok, "V after 5 unrefreshed steps = " + detail::fmt(v5));
  }));
  return out;
}

// ---------------------------------------------------------------------------
// metrics

inline std::vector<CheckResult> metrics_checks(std::uint64_t seed) {
  using detail::at_most;
  using detail::guarded;
  const std::string S = "metrics";
  std::vector<CheckResult> out;

  out.push_back(guarded(S, "alignment_invariance", [&] {
    std::mt19937_64 rng(seed + 40);
    std::uniform_real_distribution<double> pos(0.01, 100.0);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      const Vector a = random_vector(rng, 6), b = random_vector(rng, 6);
      const double base = *alignment(a, b);
      worst = std::max({worst, std::abs(*alignment(pos(rng) * a, b) - base),
                        std::abs(*alignment(a, pos(rng) * b) - base),
                        std::abs(*alignment(-a, b) + base)});
    }
    return at_most(S, "alignment_invariance", worst, 1e-14);
  }));

  out.push_back(guarded(S, "conflict_rate_bounds", [&] {
    std::mt19937_64 rng(seed + 41);
    std::uniform_real_distribution<double> pos(0.01, 100.0);
    const AgentLayout L({2, 3, 1});
    std::vector<StepRecord> recs, scaled;
    for (long k = 0; k < 300; ++k) {
      const Vector u = random_vector(rng, 6), w = random_vector(rng, 6);
      Vector us = u, ws = w;
      for (Index i = 0; i < 3; ++i) {
        L.block(us, i) *= pos(rng);
        L.block(ws, i) *= pos(rng);
      }
      StepRecord r;
      r.k = k;
      r.conflict = block_conflict(L, u, w);
      recs.push_back(r);
      r.conflict = block_conflict(L, us, ws);
      scaled.push_back(r);
    }
    double bad = 0.0;
    for (std::size_t w : {1ul, 10ul, 300ul}) {
      const double g = conflict_rate(recs, w);
      if (!(g >= 0.0 && g <= 1.0)) bad += 1.0;
      bad += std::abs(g - conflict_rate(scaled, w));
    }
    return at_most(S, "conflict_rate_bounds", bad, 0.0, "in [0,1] and scale-invariant per block");
  }));

  out.push_back(guarded(S, "decay_log_additivity", [&] {
    std::mt19937_64 rng(seed + 42);
    std::uniform_real_distribution<double> ratio(0.5, 1.5);
    std::vector<double> V{1.0};
    for (int k = 1; k < 120; ++k) V.push_back(V.back() * ratio(rng));
    // first window covers points [0, 50), second [49, 120); they share one point
    const std::vector<double> a(V.begin(), V.begin() + 50), b(V.begin() + 49, V.end());
    const auto ra = decay_rate(a, a.size()), rb = decay_rate(b, b.size());
    const auto rall = decay_rate(V, V.size());
    const double weighted = (ra.rate * ra.pairs + rb.rate * rb.pairs) / (ra.pairs + rb.pairs);
    return at_most(S, "decay_log_additivity", std::abs(rall.rate - weighted), 1e-12);
  }));

  out.push_back(guarded(S, "bilinear_decay_and_convergence", [&] {
    const auto g = make_bilinear_rotation_game();
    OptimizerConfig c;
    c.variant = Variant::kHalypo;
    c.epsilon = 0.0;
    c.schedule = ConstantStep{0.1};
    const auto tr = run_trajectory(*g, JointParams(Vector{{1.0, 0.0}}, g->layout()), c, 300);
    std::vector<double> V;
    for (const auto& r : tr.records) V.push_back(r.V);
    const auto s = summarize(tr.records);
    const double rate_err = std::abs(decay_rate(V, V.size()).rate - std::log(0.9125));
    const bool conv_ok = s.convergence_step && *s.convergence_step == 151;
    return at_most(S, "bilinear_decay_and_convergence", conv_ok ? rate_err : 1.0, 1e-12,
                   "decay log(0.9125); convergence_step = " +
                       (s.convergence_step ? std::to_string(*s.convergence_step) : "none"));
  }));

  out.push_back(guarded(S, "certificate_on_halypo_runs", [&] {
    std::mt19937_64 rng(seed + 43);
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& g : detail::analytic_games()) {
      worst = std::min(worst, audit_certificate(*g, random_vector(rng, 2),
                                                certified_adaptive_config(), 300)
                                  .min_slack);
    }
    return at_most(S, "certificate_on_halypo_runs", -worst, 1e-9, "-min slack over analytic games");
  }));

  out.push_back(guarded(S, "align_rectify", [&] {
    std::mt19937_64 rng(seed + 44);
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
      const Vector d = random_vector(rng, 5), w = random_vector(rng, 5);
      const Vector r = align_rectify(d, w);
      worst = std::max({worst, d.dot(w) - r.dot(w), r.norm() - d.norm(),
                        -r.dot(w) - 1e-12 * d.norm() * w.norm()});
    }
    const Vector ex = align_rectify(Vector{{1.0, -1.0}}, Vector{{0.0, 1.0}});
    worst = std::max(worst, (ex - Vector{{1.0, 0.0}}).norm());
    return at_most(S, "align_rectify", worst, 1e-12,
                   "never lowers <d,u_team>, never grows |d|, clears opposition");
  }));

  out.push_back(guarded(S, "pcgrad_surgery", [&] {
    const Vector s = pcgrad_surgery(AgentLayout::uniform(2, 1), Vector{{1.0, 1.0}},
                                    Vector{{-1.0, 0.0}});
    return at_most(S, "pcgrad_surgery", (s - Vector{{0.0, 1.0}}).norm(), 0.0,
                   "opposed block cancelled, zero team block skipped");
  }));
  return out;
}

// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDefaultSeed = 20260101;

inline SuiteReport run_suite(const std::string& name, std::uint64_t seed = kDefaultSeed) {
  SuiteReport rep;
  rep.suite = name;
  auto append = [&](std::vector<CheckResult> v) {
    rep.checks.insert(rep.checks.end(), v.begin(), v.end());
  };
  if (name == "projection" || name == "all") append(projection_checks(seed));
  if (name == "gradients" || name == "all") append(gradient_checks(seed));
  if (name == "descent" || name == "all") append(descent_checks(seed));
  if (name == "convergence" || name == "all") append(convergence_checks(seed));
  if (name == "metrics" || name == "all") append(metrics_checks(seed));
  if (rep.checks.empty()) {
    throw ConfigError("--suite", "unknown suite '" + name +
                                     "' (expected projection, gradients, descent, convergence, "
                                     "metrics or all)");
  }
  return rep;
}

inline io::json report_to_json(const SuiteReport& rep) {
  io::json checks = io::json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"suite", c.suite},
                      {"name", c.name},
                      {"passed", c.passed},
                      {"measured", std::isfinite(c.measured) ? io::json(c.measured)
                                                             : io::json(io::format_double(c.measured))},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  }
  return io::json{{"schema_version", io::kSchemaVersion},
                  {"suite", rep.suite},
                  {"passed", rep.passed()},
                  {"checks", std::move(checks)}};
}

}  // namespace halypo::validate

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

// Update loops: the stability-projected ascent and its baselines/ablations.
//
// One HALyPO iteration at θ_k:
//   1. refresh the critic if the game has one and k mod K = 0;
//   2. evaluate u_ind, u_team and V = ½‖u_ind − u_team‖²;
//   3. h = ∇V (analytic Jacobian-transpose product or finite differences);
//   4. d* = halypo_project(u_ind, h, V, σ, ε); optionally rectify d* against
//      u_team (full variant only);
//   5. θ_{k+1} = θ_k + η_k d.
// u_ind and V enter the projection as constants of the current iterate.
// Fields are evaluated exactly; there is no minibatch sampling.

#pragma once

#include "halypo/core.hpp"
#include "halypo/lyapunov.hpp"
#include "halypo/metrics.hpp"
#include "halypo/projection.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace halypo {

enum class Variant {
  kNaive,
  kTeam,
  kHalypo,
  kSoftPenalty,
  kPcgrad,
  kHalypoNoAlign,
  kHalypoStatic,
};

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kNaive: return "naive";
    case Variant::kTeam: return "team";
    case Variant::kHalypo: return "halypo";
    case Variant::kSoftPenalty: return "soft_penalty";
    case Variant::kPcgrad: return "pcgrad";
    case Variant::kHalypoNoAlign: return "halypo_no_align";
    case Variant::kHalypoStatic: return "halypo_static";
  }
  return "unknown";
}

inline std::optional<Variant> parse_variant(std::string_view s) {
  for (Variant v : {Variant::kNaive, Variant::kTeam, Variant::kHalypo, Variant::kSoftPenalty,
                    Variant::kPcgrad, Variant::kHalypoNoAlign, Variant::kHalypoStatic}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

inline bool is_projected(Variant v) {
  return v == Variant::kHalypo || v == Variant::kHalypoNoAlign || v == Variant::kHalypoStatic;
}

struct ConstantStep {
  double eta = 0.1;
};
// η_k = φ · 2σV / (L‖d‖²), clamped to [eta_min, eta_max].
struct AdaptiveStep {
  double safety = 0.5;
};
// η_k = η0 / (k + 1)^p with p ∈ (0.5, 1].
struct RobbinsMonroStep {
  double eta0 = 0.5;
  double power = 1.0;
};
using Schedule = std::variant<ConstantStep, AdaptiveStep, RobbinsMonroStep>;

struct OptimizerConfig {
  Variant variant = Variant::kHalypo;
  double sigma = 1.0;
  double epsilon = 1e-8;
  double rho = 0.1;
  Schedule schedule = ConstantStep{};
  HMode h_mode = HMode::kAnalytic;
  long snapshot_period = 1;  // critic refresh period K (games with a critic)
  double eta_min = 1e-6;
  double eta_max = 1.0;
  // Sample cloud for the empirical smoothness estimate (adaptive schedule on
  // games without a closed-form constant).
  int smoothness_samples = 16;
  double smoothness_radius = 0.5;
  std::uint64_t smoothness_seed = 0;

  void validate() const {
    if (!(sigma > 0.0)) throw ConfigError("optimizer.sigma", "must be positive");
    if (!(epsilon >= 0.0)) throw ConfigError("optimizer.epsilon", "must be nonnegative");
    if (!(rho >= 0.0)) throw ConfigError("optimizer.rho", "must be nonnegative");
    if (snapshot_period < 1) throw ConfigError("optimizer.snapshot_period", "must be >= 1");
    if (!(eta_min > 0.0 && eta_min <= eta_max)) {
      throw ConfigError("optimizer.eta_min", "need 0 < eta_min <= eta_max");
    }
    if (const auto* c = std::get_if<ConstantStep>(&schedule); c && !(c->eta > 0.0)) {
      throw ConfigError("optimizer.schedule.eta", "must be positive");
    }
    if (const auto* a = std::get_if<AdaptiveStep>(&schedule);
        a && !(a->safety > 0.0 && a->safety <= 1.0)) {
      throw ConfigError("optimizer.schedule.safety", "must lie in (0, 1]");
    }
    if (const auto* r = std::get_if<RobbinsMonroStep>(&schedule)) {
      if (!(r->eta0 > 0.0)) throw ConfigError("optimizer.schedule.eta0", "must be positive");
      if (!(r->power > 0.5 && r->power <= 1.0)) {
        throw ConfigError("optimizer.schedule.power", "must lie in (0.5, 1]");
      }
    }
    if (variant == Variant::kHalypoStatic && !std::holds_alternative<ConstantStep>(schedule)) {
      throw ConfigError("optimizer.schedule", "halypo_static uses a constant step");
    }
    if (smoothness_samples < 2) {
      throw ConfigError("optimizer.smoothness_samples", "need at least two samples");
    }
  }
};

// Mutable per-trajectory state threaded through the step functions.
struct OptimizerState {
  std::shared_ptr<const Game> critic_game;  // game bound to the live critic snapshot
  std::optional<SmoothnessEstimate> smoothness;
  double sup_d_norm = 0.0;
};

struct StepResult {
  Vector theta;
  StepRecord record;
};

// Returns d unchanged unless it points against u_team, in which case the
// opposing component is removed.
inline Vector align_rectify(const Vector& d, const Vector& u_team) {
  if (d.size() != u_team.size()) throw DimensionError("align_rectify: length mismatch");
  const double tt = u_team.squaredNorm();
  const double dt = d.dot(u_team);
  if (tt == 0.0 || dt >= 0.0) return d;
  return d - (dt / tt) * u_team;
}

inline double eta_adaptive(double sigma, double V, double L, double d_norm_sq, double safety,
                           double eta_min = 1e-6, double eta_max = 1.0) {
  if (!(L > 0.0)) throw Error("eta_adaptive: L must be positive");
  if (!(safety > 0.0 && safety <= 1.0)) throw Error("eta_adaptive: safety must lie in (0, 1]");
  if (d_norm_sq == 0.0) return eta_max;
  return std::clamp(safety * 2.0 * sigma * V / (L * d_norm_sq), eta_min, eta_max);
}

inline double eta_schedule_rm(long k, double eta0, double power) {
  if (k < 0) throw Error("eta_schedule_rm: k must be nonnegative");
  return eta0 / std::pow(static_cast<double>(k + 1), power);
}

// Per-agent gradient surgery of the independent field against the team field.
inline Vector pcgrad_surgery(const AgentLayout& layout, const Vector& u_ind,
                             const Vector& u_team) {
  Vector out = u_ind;
  for (Index i = 0; i < layout.n_agents(); ++i) {
    auto u = layout.block(out, i);
    const auto t = layout.block(u_team, i);
    const double tt = t.squaredNorm();
    const double ut = u.dot(t);
    if (tt > 0.0 && ut < 0.0) u -= (ut / tt) * t;
  }
  return out;
}

namespace detail {

inline const Game& active_game(const Game& game, const Vector& theta,
                               const OptimizerConfig& config, long k, OptimizerState& state) {
  if (!game.uses_critic()) return game;
  if (!state.critic_game || k % config.snapshot_period == 0) {
    state.critic_game = game.refreshed(theta, k, config.snapshot_period);
  }
  return *state.critic_game;
}

inline const SmoothnessEstimate& smoothness_for(const Game& game, const Vector& theta,
                                                const OptimizerConfig& config,
                                                OptimizerState& state) {
  if (!state.smoothness) {
    std::mt19937_64 rng(config.smoothness_seed);
    std::normal_distribution<double> gauss(0.0, config.smoothness_radius);
    std::vector<Vector> samples;
    samples.push_back(theta);
    for (int s = 1; s < config.smoothness_samples; ++s) {
      Vector p = theta;
      for (Index j = 0; j < p.size(); ++j) p[j] += gauss(rng);
      samples.push_back(std::move(p));
    }
    state.smoothness = smoothness_estimate(game, samples, config.h_mode);
  }
  return *state.smoothness;
}

inline double step_size(const Game& game, const Vector& theta, const OptimizerConfig& config,
                        long k, OptimizerState& state, double V, double d_norm_sq) {
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantStep>) {
          return s.eta;
        } else if constexpr (std::is_same_v<S, AdaptiveStep>) {
          const double L = smoothness_for(game, theta, config, state).L;
          return eta_adaptive(config.sigma, V, L, d_norm_sq, s.safety, config.eta_min,
                              config.eta_max);
        } else {
          return eta_schedule_rm(k, s.eta0, s.power);
        }
      },
      config.schedule);
}

inline StepResult finish_step(const Game& game, const Vector& theta, const FieldSample& fs,
                              const Vector& d, double eta, long k, double lambda, Regime regime,
                              OptimizerState& state) {
  StepResult out;
  out.record.k = k;
  out.record.eta = eta;
  out.record.lambda_star = lambda;
  out.record.regime = regime;
  out.record.d_norm = d.norm();
  out.record.V = fs.V;
  out.record.cos_phi = alignment(fs.u_ind, fs.u_team);
  out.record.conflict = block_conflict(game.layout(), fs.u_ind, fs.u_team);
  out.record.J_team = game.team_payoff(theta);
  state.sup_d_norm = std::max(state.sup_d_norm, out.record.d_norm);
  out.theta = theta + eta * d;
  if (!out.theta.allFinite()) {
    throw EvaluationError("step produced non-finite parameters", theta);
  }
  return out;
}

}  // namespace detail

inline StepResult step_halypo(const Game& game, const Vector& theta,
                              const OptimizerConfig& config, long k, OptimizerState& state) {
  if (!is_projected(config.variant)) {
    throw Error("step_halypo: variant " + std::string(to_string(config.variant)) +
                " is not a projected variant");
  }
  const Game& g = detail::active_game(game, theta, config, k, state);
  FieldSample fs = sample_fields(g, theta);
  const Vector h = stability_normal(g, theta, config.h_mode, fs);
  const ProjectionResult proj = halypo_project(fs.u_ind, h, fs.V, config.sigma, config.epsilon);
  Vector d = config.variant == Variant::kHalypo ? align_rectify(proj.d_star, fs.u_team)
                                                : proj.d_star;
  const double eta =
      detail::step_size(g, theta, config, k, state, fs.V, d.squaredNorm());
  fs.h = h;
  return detail::finish_step(g, theta, fs, d, eta, k, proj.lambda_star, proj.regime, state);
}

inline StepResult step_baseline(const Game& game, const Vector& theta,
                                const OptimizerConfig& config, long k, OptimizerState& state) {
  const Game& g = detail::active_game(game, theta, config, k, state);
  const FieldSample fs = sample_fields(g, theta);
  Vector d;
  switch (config.variant) {
    case Variant::kNaive: d = fs.u_ind; break;
    case Variant::kTeam: d = fs.u_team; break;
    case Variant::kSoftPenalty:
      d = config.rho == 0.0 ? fs.u_ind
                            : Vector(fs.u_ind - config.rho *
                                                    stability_normal(g, theta, config.h_mode, fs));
      break;
    case Variant::kPcgrad: d = pcgrad_surgery(g.layout(), fs.u_ind, fs.u_team); break;
    default:
      throw Error("step_baseline: variant " + std::string(to_string(config.variant)) +
                  " is not a baseline");
  }
  const double eta = detail::step_size(g, theta, config, k, state, fs.V, d.squaredNorm());
  return detail::finish_step(g, theta, fs, d, eta, k, 0.0, Regime::kInactive, state);
}

inline StepResult step_baseline(const Game& game, const Vector& theta,
                                const OptimizerConfig& config, long k) {
  OptimizerState state;
  return step_baseline(game, theta, config, k, state);
}

inline StepResult step(const Game& game, const Vector& theta, const OptimizerConfig& config,
                       long k, OptimizerState& state) {
  return is_projected(config.variant) ? step_halypo(game, theta, config, k, state)
                                      : step_baseline(game, theta, config, k, state);
}

struct Trajectory {
  std::vector<StepRecord> records;
  Vector theta;  // parameters after the last completed step
  std::optional<std::string> failure;
  double sup_d_norm = 0.0;
  std::optional<SmoothnessEstimate> smoothness;
};

// Applies the configured step n_steps times from θ0. A step error ends the
// run early; the records up to that point are kept and `failure` is set.
inline Trajectory run_trajectory(const Game& game, const JointParams& theta0,
                                 const OptimizerConfig& config, long n_steps) {
  if (n_steps < 1) throw ConfigError("n_steps", "must be >= 1");
  if (!(theta0.layout() == game.layout())) {
    throw DimensionError(game.name() + ": initial parameters do not match game layout");
  }
  config.validate();
  Trajectory out;
  out.records.reserve(static_cast<std::size_t>(n_steps));
  OptimizerState state;
  Vector theta = theta0.values();
  for (long k = 0; k < n_steps; ++k) {
    try {
      StepResult r = step(game, theta, config, k, state);
      theta = std::move(r.theta);
      out.records.push_back(r.record);
    } catch (const Error& e) {
      out.failure = e.what();
      break;
    }
  }
  out.theta = std::move(theta);
  out.sup_d_norm = state.sup_d_norm;
  out.smoothness = state.smoothness;
  return out;
}

}  // namespace halypo

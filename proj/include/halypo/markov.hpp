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

// Small cooperative Markov games with tabular softmax policies, evaluated
// exactly by linear solves.
//
// Conventions:
//   * joint action a is the mixed-radix index of (a_1, ..., a_N) with agent 1
//     most significant;
//   * transitions are stored as a (|S|·|A|) × |S| matrix, row s·|A| + a;
//   * agent i's parameters are a row-major |S| × |A_i| table inside its block;
//   * the discounted occupancy d is normalized to sum to one, so the policy
//     gradient carries an explicit 1/(1−γ) factor. Both fields use the same
//     convention.

#pragma once

#include "halypo/core.hpp"

#include <Eigen/LU>

#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace halypo {

inline constexpr Index kMaxStates = 16;
inline constexpr Index kMaxActions = 4;
inline constexpr Index kMaxAgents = 3;

class TabularMarkovGame {
 public:
  TabularMarkovGame(Index n_states, std::vector<Index> action_counts, Matrix transitions,
                    Matrix rewards, double gamma, Vector initial,
                    std::string name = "markov")
      : n_states_(n_states),
        action_counts_(std::move(action_counts)),
        transitions_(std::move(transitions)),
        rewards_(std::move(rewards)),
        gamma_(gamma),
        initial_(std::move(initial)),
        name_(std::move(name)) {
    if (n_states_ < 1 || n_states_ > kMaxStates) {
      throw Error("TabularMarkovGame: state count must be in [1, 16]");
    }
    if (action_counts_.empty() || static_cast<Index>(action_counts_.size()) > kMaxAgents) {
      throw Error("TabularMarkovGame: agent count must be in [1, 3]");
    }
    n_joint_ = 1;
    strides_.assign(action_counts_.size(), 1);
    for (std::size_t i = action_counts_.size(); i-- > 0;) {
      const Index a = action_counts_[i];
      if (a < 1 || a > kMaxActions) {
        throw Error("TabularMarkovGame: per-agent action count must be in [1, 4]");
      }
      strides_[i] = n_joint_;
      n_joint_ *= a;
    }
    if (transitions_.rows() != n_states_ * n_joint_ || transitions_.cols() != n_states_) {
      throw DimensionError("TabularMarkovGame: transition table has wrong shape");
    }
    if (rewards_.rows() != n_states_ || rewards_.cols() != n_joint_) {
      throw DimensionError("TabularMarkovGame: reward table has wrong shape");
    }
    if (initial_.size() != n_states_) {
      throw DimensionError("TabularMarkovGame: initial distribution has wrong length");
    }
    if (!(gamma_ >= 0.0 && gamma_ < 1.0)) {
      throw Error("TabularMarkovGame: discount must lie in [0, 1)");
    }
    if (!transitions_.allFinite() || !rewards_.allFinite() || !initial_.allFinite()) {
      throw Error("TabularMarkovGame: non-finite table entry");
    }
    if ((transitions_.array() < 0.0).any() || (initial_.array() < 0.0).any()) {
      throw Error("TabularMarkovGame: probabilities must be nonnegative");
    }
    for (Index r = 0; r < transitions_.rows(); ++r) {
      if (std::abs(transitions_.row(r).sum() - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "TabularMarkovGame: transition row " << r << " sums to "
           << transitions_.row(r).sum();
        throw Error(os.str());
      }
    }
    if (std::abs(initial_.sum() - 1.0) > 1e-12) {
      throw Error("TabularMarkovGame: initial distribution must sum to 1");
    }
    std::vector<Index> dims;
    for (Index a : action_counts_) dims.push_back(n_states_ * a);
    layout_ = AgentLayout(std::move(dims));
  }

  const std::string& name() const { return name_; }
  Index n_states() const { return n_states_; }
  Index n_agents() const { return static_cast<Index>(action_counts_.size()); }
  Index action_count(Index agent) const {
    return action_counts_.at(static_cast<std::size_t>(agent));
  }
  const std::vector<Index>& action_counts() const { return action_counts_; }
  Index n_joint_actions() const { return n_joint_; }
  // Agent's action inside joint action `a`.
  Index agent_action(Index a, Index agent) const {
    const auto k = static_cast<std::size_t>(agent);
    return (a / strides_[k]) % action_counts_[k];
  }
  const Matrix& transitions() const { return transitions_; }
  double transition(Index s, Index a, Index next) const {
    return transitions_(s * n_joint_ + a, next);
  }
  const Matrix& rewards() const { return rewards_; }
  double gamma() const { return gamma_; }
  const Vector& initial_distribution() const { return initial_; }
  const AgentLayout& layout() const { return layout_; }

 private:
  Index n_states_;
  std::vector<Index> action_counts_;
  std::vector<Index> strides_;
  Index n_joint_ = 1;
  Matrix transitions_;
  Matrix rewards_;
  double gamma_;
  Vector initial_;
  std::string name_;
  AgentLayout layout_;
};

// Per-agent softmax tables, |S| × |A_i| each.
inline std::vector<Matrix> softmax_policies(const TabularMarkovGame& mg, const Vector& theta) {
  if (theta.size() != mg.layout().total_dim()) {
    throw DimensionError("softmax_policies: parameter length does not match game");
  }
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(mg.n_agents()));
  for (Index i = 0; i < mg.n_agents(); ++i) {
    const Index A = mg.action_count(i);
    Matrix p(mg.n_states(), A);
    const Index off = mg.layout().offset(i);
    for (Index s = 0; s < mg.n_states(); ++s) {
      const auto logits = theta.segment(off + s * A, A);
      const double shift = logits.maxCoeff();
      double z = 0.0;
      for (Index a = 0; a < A; ++a) z += (p(s, a) = std::exp(logits[a] - shift));
      p.row(s) /= z;
    }
    out.push_back(std::move(p));
  }
  return out;
}

// π(a|s) for every joint action, |S| × |A|.
inline Matrix joint_policy(const TabularMarkovGame& mg, const std::vector<Matrix>& pols) {
  Matrix joint(mg.n_states(), mg.n_joint_actions());
  for (Index s = 0; s < mg.n_states(); ++s) {
    for (Index a = 0; a < mg.n_joint_actions(); ++a) {
      double p = 1.0;
      for (Index i = 0; i < mg.n_agents(); ++i) {
        p *= pols[static_cast<std::size_t>(i)](s, mg.agent_action(a, i));
      }
      joint(s, a) = p;
    }
  }
  return joint;
}

struct PolicyValues {
  Vector v;  // state values
  Matrix q;  // |S| × |A| action values
};

namespace detail {

struct PolicyEvalParts {
  std::vector<Matrix> policies;
  Matrix joint;
  PolicyValues values;
  Vector occupancy;  // normalized discounted state occupancy
};

inline PolicyEvalParts evaluate_policy(const TabularMarkovGame& mg, const Vector& theta,
                                       bool with_occupancy) {
  PolicyEvalParts parts;
  parts.policies = softmax_policies(mg, theta);
  parts.joint = joint_policy(mg, parts.policies);
  const Index S = mg.n_states(), A = mg.n_joint_actions();
  Matrix P_pi = Matrix::Zero(S, S);
  Vector r_pi = Vector::Zero(S);
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < A; ++a) {
      const double p = parts.joint(s, a);
      r_pi[s] += p * mg.rewards()(s, a);
      P_pi.row(s) += p * mg.transitions().row(s * A + a);
    }
  }
  const Matrix system = Matrix::Identity(S, S) - mg.gamma() * P_pi;
  Eigen::PartialPivLU<Matrix> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13)) {
    std::ostringstream os;
    os << mg.name() << ": policy evaluation system is singular (rcond " << rcond
       << ", gamma " << mg.gamma() << ")";
    throw NumericalError(os.str());
  }
  parts.values.v = lu.solve(r_pi);
  parts.values.q.resize(S, A);
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < A; ++a) {
      parts.values.q(s, a) =
          mg.rewards()(s, a) +
          mg.gamma() * mg.transitions().row(s * A + a).dot(parts.values.v);
    }
  }
  if (with_occupancy) {
    parts.occupancy =
        lu.transpose().solve((1.0 - mg.gamma()) * mg.initial_distribution());
  }
  if (!parts.values.v.allFinite()) {
    throw EvaluationError(mg.name() + ": non-finite state values", theta);
  }
  return parts;
}

// Σ_{a_{-i}} Π_{j≠i} π_j(a_j|s) q(s, a) for every action of agent i at state s.
inline Vector marginal_action_values(const TabularMarkovGame& mg,
                                     const std::vector<Matrix>& pols, const Matrix& q,
                                     Index agent, Index s) {
  Vector out = Vector::Zero(mg.action_count(agent));
  for (Index a = 0; a < mg.n_joint_actions(); ++a) {
    double w = 1.0;
    for (Index j = 0; j < mg.n_agents(); ++j) {
      if (j != agent) w *= pols[static_cast<std::size_t>(j)](s, mg.agent_action(a, j));
    }
    out[mg.agent_action(a, agent)] += w * q(s, a);
  }
  return out;
}

// Block i: (1/(1−γ)) Σ_s d(s) Σ_{a_i} ∇π_i(a_i|s) q_i(s, a_i) with softmax
// derivative ∂π_i(a|s)/∂θ_i[s, b] = π_i(a|s)(1[a=b] − π_i(b|s)).
inline Vector actor_field(const TabularMarkovGame& mg, const std::vector<Matrix>& pols,
                          const Vector& occupancy, const Matrix& q) {
  Vector grad(mg.layout().total_dim());
  const double scale = 1.0 / (1.0 - mg.gamma());
  for (Index i = 0; i < mg.n_agents(); ++i) {
    const Matrix& pi = pols[static_cast<std::size_t>(i)];
    const Index A = mg.action_count(i), off = mg.layout().offset(i);
    for (Index s = 0; s < mg.n_states(); ++s) {
      const Vector qi = marginal_action_values(mg, pols, q, i, s);
      const double baseline = pi.row(s).dot(qi);
      for (Index b = 0; b < A; ++b) {
        grad[off + s * A + b] = scale * occupancy[s] * pi(s, b) * (qi[b] - baseline);
      }
    }
  }
  return grad;
}

}  // namespace detail

// v solves (I − γP^π)v = r^π; Q(s,a) = R(s,a) + γ Σ_{s'} P(s'|s,a) v(s').
inline PolicyValues policy_eval(const TabularMarkovGame& mg, const Vector& theta) {
  return detail::evaluate_policy(mg, theta, false).values;
}

// Normalized discounted occupancy, (1−γ) μᵀ(I − γP^π)⁻¹.
inline Vector discounted_occupancy(const TabularMarkovGame& mg, const Vector& theta) {
  return detail::evaluate_policy(mg, theta, true).occupancy;
}

inline double team_return(const TabularMarkovGame& mg, const Vector& theta) {
  return mg.initial_distribution().dot(policy_eval(mg, theta).v);
}

// ∇J by the policy gradient theorem with exact occupancy and action values.
inline Vector exact_policy_gradient(const TabularMarkovGame& mg, const Vector& theta) {
  const auto parts = detail::evaluate_policy(mg, theta, true);
  return detail::actor_field(mg, parts.policies, parts.occupancy, parts.values.q);
}

// Frozen copy of exact action values taken at some earlier step.
struct CriticSnapshot {
  Matrix q;
  long snapshot_step = 0;
  long refresh_period = 1;

  long staleness(long step) const { return step - snapshot_step; }
};

inline CriticSnapshot refresh_snapshot(const TabularMarkovGame& mg, const Vector& theta,
                                       long step, long refresh_period = 1) {
  if (refresh_period < 1) throw Error("refresh_snapshot: refresh period must be positive");
  return CriticSnapshot{policy_eval(mg, theta).q, step, refresh_period};
}

namespace detail {
inline void check_snapshot(const TabularMarkovGame& mg, const CriticSnapshot& snap) {
  if (snap.q.rows() != mg.n_states() || snap.q.cols() != mg.n_joint_actions()) {
    throw DimensionError(mg.name() + ": critic snapshot table has wrong shape");
  }
}
}  // namespace detail

// Each agent's gradient against the frozen critic: live occupancy and live
// partner policies, stale action values.
inline Vector stale_critic_field(const TabularMarkovGame& mg, const Vector& theta,
                                 const CriticSnapshot& snapshot) {
  detail::check_snapshot(mg, snapshot);
  const auto parts = detail::evaluate_policy(mg, theta, true);
  return detail::actor_field(mg, parts.policies, parts.occupancy, snapshot.q);
}

// Agent i's surrogate return: agent i plays softmax(probe_i), partners and the
// occupancy stay at `anchor`, actions are scored by `q`.
inline double local_surrogate(const TabularMarkovGame& mg, const Matrix& q,
                              const Vector& anchor, Index agent, const Vector& probe) {
  const auto parts = detail::evaluate_policy(mg, anchor, true);
  const auto probe_pols = softmax_policies(mg, probe);
  const Matrix& pi = probe_pols[static_cast<std::size_t>(agent)];
  double total = 0.0;
  for (Index s = 0; s < mg.n_states(); ++s) {
    const Vector qi = detail::marginal_action_values(mg, parts.policies, q, agent, s);
    total += parts.occupancy[s] * pi.row(s).dot(qi);
  }
  return total / (1.0 - mg.gamma());
}

// Game adapter: team field = exact policy gradient; independent field = the
// stale-critic field when a snapshot is bound, otherwise the fresh-critic
// field (which coincides with the team field).
class MarkovGame final : public Game {
 public:
  explicit MarkovGame(std::shared_ptr<const TabularMarkovGame> mg,
                      std::optional<CriticSnapshot> snapshot = std::nullopt)
      : mg_(std::move(mg)), snapshot_(std::move(snapshot)) {
    if (!mg_) throw Error("MarkovGame: null game");
    if (snapshot_) detail::check_snapshot(*mg_, *snapshot_);
  }

  std::string name() const override { return mg_->name(); }
  const AgentLayout& layout() const override { return mg_->layout(); }
  const TabularMarkovGame& tables() const { return *mg_; }
  std::shared_ptr<const TabularMarkovGame> tables_ptr() const { return mg_; }
  const std::optional<CriticSnapshot>& snapshot() const { return snapshot_; }

  double agent_payoff(Index agent, const Vector& theta) const override {
    return agent_surrogate(agent, theta, theta);
  }
  double agent_surrogate(Index agent, const Vector& anchor,
                         const Vector& probe) const override {
    const Matrix q = snapshot_ ? snapshot_->q : policy_eval(*mg_, anchor).q;
    return local_surrogate(*mg_, q, anchor, agent, probe);
  }
  double team_payoff(const Vector& theta) const override { return team_return(*mg_, theta); }

  Vector independent_field(const Vector& theta) const override {
    return snapshot_ ? stale_critic_field(*mg_, theta, *snapshot_)
                     : exact_policy_gradient(*mg_, theta);
  }
  Vector team_field(const Vector& theta) const override {
    return exact_policy_gradient(*mg_, theta);
  }

  bool uses_critic() const override { return true; }
  std::shared_ptr<const Game> refreshed(const Vector& theta, long step,
                                        long period) const override {
    return std::make_shared<const MarkovGame>(mg_,
                                              refresh_snapshot(*mg_, theta, step, period));
  }

 private:
  std::shared_ptr<const TabularMarkovGame> mg_;
  std::optional<CriticSnapshot> snapshot_;
};

}  // namespace halypo

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

// Closed-form differentiable games: general-sum quadratic games and the
// bilinear rotation game.

#pragma once

#include "halypo/core.hpp"

#include <Eigen/Eigenvalues>

#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace halypo {

// f_i(θ) = ½ θᵀQ_iθ + b_iᵀθ for each agent, J(θ) = ½ θᵀQθ + bᵀθ.
//
// Agent i only moves its own block, so the independent field is affine with
// matrix M whose block-row i is block-row i of Q_i (generally non-symmetric)
// and offset c whose block i is block i of b_i. The team field is Qθ + b.
class QuadraticGame final : public Game {
 public:
  QuadraticGame(AgentLayout layout, std::vector<Matrix> agent_Q, std::vector<Vector> agent_b,
                Matrix team_Q, Vector team_b, std::string name = "quadratic")
      : layout_(std::move(layout)),
        agent_Q_(std::move(agent_Q)),
        agent_b_(std::move(agent_b)),
        team_Q_(std::move(team_Q)),
        team_b_(std::move(team_b)),
        name_(std::move(name)) {
    const Index D = layout_.total_dim();
    const auto n = static_cast<std::size_t>(layout_.n_agents());
    if (agent_Q_.size() != n || agent_b_.size() != n) {
      throw DimensionError("QuadraticGame: need one (Q_i, b_i) pair per agent");
    }
    auto check_sym = [&](const Matrix& m, const std::string& what) {
      if (m.rows() != D || m.cols() != D) {
        std::ostringstream os;
        os << "QuadraticGame: " << what << " must be " << D << "x" << D;
        throw DimensionError(os.str());
      }
      if (!m.allFinite()) throw Error("QuadraticGame: " + what + " has non-finite entries");
      if (m != m.transpose()) throw Error("QuadraticGame: " + what + " is not symmetric");
    };
    auto check_vec = [&](const Vector& v, const std::string& what) {
      if (v.size() != D) throw DimensionError("QuadraticGame: " + what + " has wrong length");
      if (!v.allFinite()) throw Error("QuadraticGame: " + what + " has non-finite entries");
    };
    for (std::size_t i = 0; i < n; ++i) {
      check_sym(agent_Q_[i], "Q_" + std::to_string(i + 1));
      check_vec(agent_b_[i], "b_" + std::to_string(i + 1));
    }
    check_sym(team_Q_, "Q");
    check_vec(team_b_, "b");

    field_M_.resize(D, D);
    field_c_.resize(D);
    for (Index i = 0; i < layout_.n_agents(); ++i) {
      const Index off = layout_.offset(i), len = layout_.block_dim(i);
      const auto k = static_cast<std::size_t>(i);
      field_M_.middleRows(off, len) = agent_Q_[k].middleRows(off, len);
      field_c_.segment(off, len) = agent_b_[k].segment(off, len);
    }
    const Matrix gap = field_M_ - team_Q_;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gap.transpose() * gap, Eigen::EigenvaluesOnly);
    smoothness_ = eig.eigenvalues().maxCoeff();
  }

  std::string name() const override { return name_; }
  const AgentLayout& layout() const override { return layout_; }

  double agent_payoff(Index agent, const Vector& theta) const override {
    const auto k = static_cast<std::size_t>(agent);
    return 0.5 * theta.dot(agent_Q_.at(k) * theta) + agent_b_.at(k).dot(theta);
  }
  double team_payoff(const Vector& theta) const override {
    return 0.5 * theta.dot(team_Q_ * theta) + team_b_.dot(theta);
  }

  Vector independent_field(const Vector& theta) const override {
    return field_M_ * theta + field_c_;
  }
  Vector team_field(const Vector& theta) const override { return team_Q_ * theta + team_b_; }

  bool has_analytic_jacobians() const override { return true; }
  Matrix independent_jacobian(const Vector&) const override { return field_M_; }
  Matrix team_jacobian(const Vector&) const override { return team_Q_; }

  // λ_max((M−Q)ᵀ(M−Q)): V is exactly quadratic with that Hessian.
  std::optional<double> exact_smoothness() const override { return smoothness_; }

  const Matrix& field_matrix() const { return field_M_; }
  const Vector& field_offset() const { return field_c_; }
  const std::vector<Matrix>& agent_matrices() const { return agent_Q_; }
  const std::vector<Vector>& agent_offsets() const { return agent_b_; }
  const Matrix& team_matrix() const { return team_Q_; }
  const Vector& team_offset() const { return team_b_; }

 private:
  AgentLayout layout_;
  std::vector<Matrix> agent_Q_;
  std::vector<Vector> agent_b_;
  Matrix team_Q_;
  Vector team_b_;
  std::string name_;
  Matrix field_M_;
  Vector field_c_;
  double smoothness_ = 0.0;
};

inline std::shared_ptr<const QuadraticGame> make_quadratic_game(
    AgentLayout layout, std::vector<Matrix> agent_Q, std::vector<Vector> agent_b,
    Matrix team_Q, Vector team_b, std::string name = "quadratic") {
  return std::make_shared<const QuadraticGame>(std::move(layout), std::move(agent_Q),
                                               std::move(agent_b), std::move(team_Q),
                                               std::move(team_b), std::move(name));
}

// Two scalar players: f_1 = xy, f_2 = −xy, J = −½(x² + y²).
// The independent field (y, −x) is a pure rotation; simultaneous ascent on it
// spirals outward for any positive step.
class BilinearRotationGame final : public Game {
 public:
  BilinearRotationGame() : layout_(AgentLayout::uniform(2, 1)) {}

  std::string name() const override { return "bilinear"; }
  const AgentLayout& layout() const override { return layout_; }

  double agent_payoff(Index agent, const Vector& t) const override {
    const double xy = t[0] * t[1];
    return agent == 0 ? xy : -xy;
  }
  double team_payoff(const Vector& t) const override {
    return -0.5 * (t[0] * t[0] + t[1] * t[1]);
  }

  Vector independent_field(const Vector& t) const override {
    return Vector{{t[1], -t[0]}};
  }
  Vector team_field(const Vector& t) const override { return Vector{{-t[0], -t[1]}}; }

  bool has_analytic_jacobians() const override { return true; }
  Matrix independent_jacobian(const Vector&) const override {
    return Matrix{{0.0, 1.0}, {-1.0, 0.0}};
  }
  Matrix team_jacobian(const Vector&) const override { return -Matrix::Identity(2, 2); }

  // V = x² + y², so ∇V = 2θ is 2-Lipschitz.
  std::optional<double> exact_smoothness() const override { return 2.0; }

 private:
  AgentLayout layout_;
};

inline std::shared_ptr<const BilinearRotationGame> make_bilinear_rotation_game() {
  return std::make_shared<const BilinearRotationGame>();
}

}  // namespace halypo

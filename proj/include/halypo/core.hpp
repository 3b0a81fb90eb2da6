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

// Joint parameter layout, the differentiable-game interface, and the
// finite-difference oracles every analytic gradient is checked against.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace halypo {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// A payoff or field evaluated to NaN/Inf. Carries the offending parameters.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, Vector theta)
      : Error(what), theta_(std::move(theta)) {}
  const Vector& theta() const { return theta_; }

 private:
  Vector theta_;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

// The stability half-space is empty (zero normal with a violated offset).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration; `field` names the offending setting.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// ---------------------------------------------------------------------------
// Layout
// ---------------------------------------------------------------------------

// Block structure of the joint parameter vector: agent i owns the contiguous
// slice [offset(i), offset(i) + block_dim(i)).
class AgentLayout {
 public:
  AgentLayout() = default;

  explicit AgentLayout(std::vector<Index> block_dims)
      : block_dims_(std::move(block_dims)) {
    if (block_dims_.empty()) {
      throw DimensionError("AgentLayout: at least one agent is required");
    }
    offsets_.reserve(block_dims_.size() + 1);
    offsets_.push_back(0);
    for (Index d : block_dims_) {
      if (d <= 0) throw DimensionError("AgentLayout: block dims must be positive");
      offsets_.push_back(offsets_.back() + d);
    }
  }

  static AgentLayout uniform(Index n_agents, Index block_dim) {
    return AgentLayout(std::vector<Index>(static_cast<std::size_t>(n_agents), block_dim));
  }

  Index n_agents() const { return static_cast<Index>(block_dims_.size()); }
  Index total_dim() const { return offsets_.empty() ? 0 : offsets_.back(); }
  Index block_dim(Index i) const { return block_dims_.at(static_cast<std::size_t>(i)); }
  Index offset(Index i) const { return offsets_.at(static_cast<std::size_t>(i)); }
  const std::vector<Index>& block_dims() const { return block_dims_; }
  const std::vector<Index>& offsets() const { return offsets_; }

  template <typename Derived>
  auto block(Eigen::MatrixBase<Derived>& v, Index i) const {
    return v.segment(offset(i), block_dim(i));
  }
  template <typename Derived>
  auto block(const Eigen::MatrixBase<Derived>& v, Index i) const {
    return v.segment(offset(i), block_dim(i));
  }

  // Agent owning coordinate j.
  Index agent_of(Index j) const {
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), j);
    return static_cast<Index>(it - offsets_.begin()) - 1;
  }

  friend bool operator==(const AgentLayout&, const AgentLayout&) = default;

 private:
  std::vector<Index> block_dims_;
  std::vector<Index> offsets_;
};

inline bool all_finite(const Vector& v) { return v.allFinite(); }

// Joint parameter vector θ tied to its layout. Construction validates length
// and finiteness.
class JointParams {
 public:
  JointParams(Vector values, AgentLayout layout)
      : values_(std::move(values)), layout_(std::move(layout)) {
    if (values_.size() != layout_.total_dim()) {
      std::ostringstream os;
      os << "JointParams: length " << values_.size() << " does not match layout dim "
         << layout_.total_dim();
      throw DimensionError(os.str());
    }
    if (!values_.allFinite()) {
      throw EvaluationError("JointParams: non-finite parameter", values_);
    }
  }

  const Vector& values() const { return values_; }
  const AgentLayout& layout() const { return layout_; }
  Index size() const { return values_.size(); }
  auto block(Index i) const { return layout_.block(values_, i); }

 private:
  Vector values_;
  AgentLayout layout_;
};

// ---------------------------------------------------------------------------
// Game interface
// ---------------------------------------------------------------------------

// A differentiable N-player game over the joint parameter vector. Each agent
// ascends its own payoff f_i in its own block (the independent field); the
// team ascends J over all parameters (the team field). Implementations are
// immutable and every evaluator is a pure function of its arguments.
class Game {
 public:
  virtual ~Game() = default;

  virtual std::string name() const = 0;
  virtual const AgentLayout& layout() const = 0;

  virtual double agent_payoff(Index agent, const Vector& theta) const = 0;
  virtual double team_payoff(const Vector& theta) const = 0;

  // Agent `agent`'s payoff at `probe` with everything it treats as frozen
  // (partners, occupancy, critic) taken from `anchor`. The gradient in the
  // agent's block at probe == anchor is that block of the independent field.
  virtual double agent_surrogate(Index agent, const Vector& /*anchor*/,
                                 const Vector& probe) const {
    return agent_payoff(agent, probe);
  }

  virtual Vector independent_field(const Vector& theta) const = 0;
  virtual Vector team_field(const Vector& theta) const = 0;

  virtual bool has_analytic_jacobians() const { return false; }
  virtual Matrix independent_jacobian(const Vector& /*theta*/) const {
    throw UnsupportedError(name() + ": no analytic independent-field Jacobian");
  }
  virtual Matrix team_jacobian(const Vector& /*theta*/) const {
    throw UnsupportedError(name() + ": no analytic team-field Jacobian");
  }

  // Global Lipschitz constant of ∇V when known in closed form.
  virtual std::optional<double> exact_smoothness() const { return std::nullopt; }
  bool has_exact_smoothness() const { return exact_smoothness().has_value(); }

  // Games whose independent field runs against a lagged critic return a copy
  // bound to a critic refreshed at (theta, step). Others return nullptr.
  virtual std::shared_ptr<const Game> refreshed(const Vector& /*theta*/, long /*step*/,
                                                long /*period*/) const {
    return nullptr;
  }
  virtual bool uses_critic() const { return false; }
};

namespace detail {

inline void check_compatible(const Game& game, const JointParams& theta) {
  if (!(theta.layout() == game.layout())) {
    throw DimensionError(game.name() + ": parameter layout does not match game layout");
  }
}

inline Vector checked(Vector v, const char* what, const Vector& theta) {
  if (!v.allFinite()) {
    throw EvaluationError(std::string(what) + " evaluated to a non-finite value", theta);
  }
  return v;
}

}  // namespace detail

inline Vector eval_independent_field(const Game& game, const JointParams& theta) {
  detail::check_compatible(game, theta);
  return detail::checked(game.independent_field(theta.values()), "independent field",
                         theta.values());
}

inline Vector eval_team_field(const Game& game, const JointParams& theta) {
  detail::check_compatible(game, theta);
  return detail::checked(game.team_field(theta.values()), "team field", theta.values());
}

// One evaluation bundle at a single θ.
struct FieldSample {
  Vector u_ind;
  Vector u_team;
  Vector e;
  double V = 0.0;
  std::optional<Vector> h;

  static FieldSample from_fields(Vector u_ind, Vector u_team) {
    if (u_ind.size() != u_team.size()) {
      throw DimensionError("FieldSample: field lengths differ");
    }
    FieldSample s;
    s.e = u_ind - u_team;
    s.V = 0.5 * s.e.squaredNorm();
    s.u_ind = std::move(u_ind);
    s.u_team = std::move(u_team);
    return s;
  }
};

inline FieldSample sample_fields(const Game& game, const Vector& theta) {
  return FieldSample::from_fields(
      detail::checked(game.independent_field(theta), "independent field", theta),
      detail::checked(game.team_field(theta), "team field", theta));
}

// ---------------------------------------------------------------------------
// Finite-difference oracles
// ---------------------------------------------------------------------------

inline double default_fd_step(const Vector& theta) {
  const double inf_norm = theta.size() ? theta.cwiseAbs().maxCoeff() : 0.0;
  return std::max(1e-5, 1e-7 * inf_norm);
}

// Central differences, one coordinate at a time, in coordinate order.
template <typename ScalarFn>
Vector fd_gradient(ScalarFn&& fn, const Vector& theta, double step) {
  if (!(step > 0.0)) throw OracleError("fd_gradient: step must be positive");
  Vector grad(theta.size());
  Vector probe = theta;
  for (Index j = 0; j < theta.size(); ++j) {
    const double orig = probe[j];
    probe[j] = orig + step;
    const double plus = fn(static_cast<const Vector&>(probe));
    probe[j] = orig - step;
    const double minus = fn(static_cast<const Vector&>(probe));
    probe[j] = orig;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      std::ostringstream os;
      os << "fd_gradient: non-finite function value probing coordinate " << j;
      throw OracleError(os.str());
    }
    grad[j] = (plus - minus) / (2.0 * step);
  }
  return grad;
}

template <typename ScalarFn>
Vector fd_gradient(ScalarFn&& fn, const Vector& theta) {
  return fd_gradient(std::forward<ScalarFn>(fn), theta, default_fd_step(theta));
}

// Central-difference Jacobian of a vector field; column j is ∂F/∂θ_j.
template <typename VectorFn>
Matrix fd_jacobian(VectorFn&& fn, const Vector& theta, double step) {
  if (!(step > 0.0)) throw OracleError("fd_jacobian: step must be positive");
  Vector probe = theta;
  Matrix jac;
  for (Index j = 0; j < theta.size(); ++j) {
    const double orig = probe[j];
    probe[j] = orig + step;
    Vector plus = fn(static_cast<const Vector&>(probe));
    probe[j] = orig - step;
    Vector minus = fn(static_cast<const Vector&>(probe));
    probe[j] = orig;
    if (!plus.allFinite() || !minus.allFinite()) {
      throw OracleError("fd_jacobian: non-finite field value");
    }
    if (j == 0) jac.resize(plus.size(), theta.size());
    jac.col(j) = (plus - minus) / (2.0 * step);
  }
  return jac;
}

// Symmetric/antisymmetric split of a field Jacobian. For an affine field the
// antisymmetric part is the rotational (solenoidal) component.
struct FieldDecomposition {
  Matrix symmetric;
  Matrix antisymmetric;
};

inline FieldDecomposition field_decomposition(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("field_decomposition: matrix must be square");
  FieldDecomposition out;
  out.symmetric = 0.5 * (m + m.transpose());
  out.antisymmetric = 0.5 * (m - m.transpose());
  return out;
}

}  // namespace halypo

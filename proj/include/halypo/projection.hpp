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

// Stability-constrained projection of the independent field.
//
// Solves
//
//     min_d  ½‖d − u‖²   s.t.  ⟨h, d⟩ ≤ −σV
//
// in closed form from the KKT conditions of the Lagrangian
// L(d, λ) = ½‖d − u‖² + λ(⟨h, d⟩ + σV). Stationarity gives d* = u − λh;
// substituting into complementary slackness leaves two regimes:
//
//   inactive:  ⟨h, u⟩ + σV ≤ 0   →  λ* = 0, d* = u
//   active:    ⟨h, u⟩ + σV > 0   →  λ* = (⟨h, u⟩ + σV) / (‖h‖² + ε)
//
// ε ≥ 0 damps the multiplier. With ε > 0 the active-regime constraint holds
// only up to the residual ⟨h, d*⟩ + σV = ελ*, which is reported rather than
// asserted.

#pragma once

#include "halypo/core.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string_view>

namespace halypo {

enum class Regime { kInactive, kActive };

inline std::string_view to_string(Regime r) {
  return r == Regime::kActive ? "active" : "inactive";
}

struct ProjectionResult {
  Vector d_star;
  double lambda_star = 0.0;
  Regime regime = Regime::kInactive;
  // ⟨h, d*⟩ + σV
  double constraint_residual = 0.0;
};

template <typename DerivedU, typename DerivedH>
ProjectionResult halypo_project(const Eigen::MatrixBase<DerivedU>& u_ind,
                                const Eigen::MatrixBase<DerivedH>& h, double V,
                                double sigma, double epsilon) {
  if (u_ind.size() != h.size()) {
    throw DimensionError("halypo_project: u_ind and h lengths differ");
  }
  if (!(V >= 0.0)) throw Error("halypo_project: V must be nonnegative");
  if (!(sigma > 0.0)) throw Error("halypo_project: sigma must be positive");
  if (!(epsilon >= 0.0)) throw Error("halypo_project: epsilon must be nonnegative");

  ProjectionResult out;
  const double numerator = h.dot(u_ind) + sigma * V;
  if (numerator > 0.0) {
    const double denom = h.squaredNorm() + epsilon;
    if (denom == 0.0) {
      std::ostringstream os;
      os << "halypo_project: stability half-space is empty (h = 0, sigma*V = " << sigma * V
         << ", epsilon = 0)";
      throw InfeasibleError(os.str());
    }
    out.lambda_star = numerator / denom;
    out.regime = Regime::kActive;
    out.d_star = u_ind - out.lambda_star * h;
  } else {
    out.d_star = u_ind;
  }
  out.constraint_residual = h.dot(out.d_star) + sigma * V;
  return out;
}

// Euclidean projection onto {d : ⟨h, d⟩ ≤ c}, written against the unit
// normal so that it shares no arithmetic with halypo_project.
inline Vector halfspace_oracle(const Vector& u, const Vector& h, double c) {
  if (u.size() != h.size()) throw DimensionError("halfspace_oracle: length mismatch");
  const double hn = h.norm();
  if (hn == 0.0) {
    if (c >= 0.0) return u;
    throw InfeasibleError("halfspace_oracle: zero normal with negative offset");
  }
  const Vector n = h / hn;
  const double excess = n.dot(u) - c / hn;  // signed distance beyond the boundary
  if (excess <= 0.0) return u;
  return u - excess * n;
}

struct OptimalityAudit {
  int trials = 0;
  int violations = 0;
  // min over trials of ‖d' − u‖ − ‖d − u‖; never below −tolerance when optimal.
  double worst_margin = 0.0;
  bool passed() const { return violations == 0; }
};

// Perturbs `candidate` randomly, pulls each perturbation back into the
// half-space, and checks that none lands strictly closer to u.
template <typename Rng>
OptimalityAudit audit_halfspace_optimality(const Vector& u, const Vector& h, double c,
                                           const Vector& candidate, Rng& rng,
                                           int trials = 200, double tolerance = 1e-9) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> scale_dist(-6.0, 1.0);
  OptimalityAudit audit;
  audit.trials = trials;
  audit.worst_margin = std::numeric_limits<double>::infinity();
  const double base = (candidate - u).norm();
  Vector delta(u.size());
  for (int t = 0; t < trials; ++t) {
    for (Index j = 0; j < delta.size(); ++j) delta[j] = gauss(rng);
    delta *= std::pow(10.0, scale_dist(rng)) / std::max(delta.norm(), 1e-300);
    const Vector feasible = halfspace_oracle(candidate + delta, h, c);
    const double margin = (feasible - u).norm() - base;
    audit.worst_margin = std::min(audit.worst_margin, margin);
    if (margin < -tolerance) ++audit.violations;
  }
  return audit;
}

struct KktResiduals {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double slackness = 0.0;
};

// Residuals of the KKT system at a projection result. For ε > 0 the
// feasibility entry is the raw constraint value (it equals ελ* in the active
// regime), not its positive part.
inline KktResiduals kkt_residuals(const Vector& u_ind, const Vector& h, double V, double sigma,
                                  double epsilon, const ProjectionResult& result) {
  if (u_ind.size() != h.size() || result.d_star.size() != h.size()) {
    throw DimensionError("kkt_residuals: length mismatch");
  }
  KktResiduals r;
  const double constraint = h.dot(result.d_star) + sigma * V;
  r.stationarity = (result.d_star - u_ind + result.lambda_star * h).norm();
  r.feasibility = epsilon == 0.0 ? std::max(0.0, constraint) : constraint;
  r.slackness = std::abs(result.lambda_star * constraint);
  return r;
}

}  // namespace halypo

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

// Rationality gap V = ½‖u_ind − u_team‖², its gradient (the stability normal
// h), and smoothness constants for the step-size bound.

#pragma once

#include "halypo/core.hpp"

#include <Eigen/Eigenvalues>

#include <span>
#include <string_view>

namespace halypo {

template <typename DerivedA, typename DerivedB>
double rationality_gap(const Eigen::MatrixBase<DerivedA>& u_ind,
                       const Eigen::MatrixBase<DerivedB>& u_team) {
  if (u_ind.size() != u_team.size()) {
    throw DimensionError("rationality_gap: field lengths differ");
  }
  return 0.5 * (u_ind - u_team).squaredNorm();
}

inline double rationality_gap(const Game& game, const Vector& theta) {
  return sample_fields(game, theta).V;
}

// h = (H_ind − H_team)ᵀ (u_ind − u_team), with e taken from `at` (fields
// already evaluated at theta).
inline Vector stability_normal_analytic(const Game& game, const Vector& theta,
                                        const FieldSample& at) {
  if (!game.has_analytic_jacobians()) {
    throw UnsupportedError(game.name() + ": analytic stability normal needs field Jacobians");
  }
  const Matrix gap_jac = game.independent_jacobian(theta) - game.team_jacobian(theta);
  return gap_jac.transpose() * at.e;
}

inline Vector stability_normal_analytic(const Game& game, const Vector& theta) {
  return stability_normal_analytic(game, theta, sample_fields(game, theta));
}

// Central-difference gradient of θ ↦ V(θ); 2D field evaluations. At an exact
// agreement point (e = 0) h vanishes identically and is returned as zero
// without probing.
inline Vector stability_normal_fd(const Game& game, const Vector& theta, double step,
                                  const FieldSample& at) {
  if (at.V == 0.0) return Vector::Zero(theta.size());
  return fd_gradient([&](const Vector& t) { return sample_fields(game, t).V; }, theta, step);
}

inline Vector stability_normal_fd(const Game& game, const Vector& theta, double step) {
  return stability_normal_fd(game, theta, step, sample_fields(game, theta));
}

inline Vector stability_normal_fd(const Game& game, const Vector& theta) {
  return stability_normal_fd(game, theta, default_fd_step(theta));
}

enum class HMode { kAnalytic, kFiniteDifference };

inline std::string_view to_string(HMode m) {
  return m == HMode::kAnalytic ? "analytic" : "fd";
}

inline Vector stability_normal(const Game& game, const Vector& theta, HMode mode,
                               const FieldSample& at) {
  return mode == HMode::kAnalytic
             ? stability_normal_analytic(game, theta, at)
             : stability_normal_fd(game, theta, default_fd_step(theta), at);
}

inline Vector stability_normal(const Game& game, const Vector& theta, HMode mode) {
  return stability_normal(game, theta, mode, sample_fields(game, theta));
}

enum class SmoothnessMethod { kExactQuadratic, kEmpiricalSup };

inline std::string_view to_string(SmoothnessMethod m) {
  return m == SmoothnessMethod::kExactQuadratic ? "exact-quadratic" : "empirical-sup";
}

struct SmoothnessEstimate {
  double L = 0.0;
  SmoothnessMethod method = SmoothnessMethod::kExactQuadratic;
  int sample_count = 0;
  // The raw estimate was zero (V ≡ 0 on the samples) and L was floored.
  bool degenerate = false;
};

inline constexpr double kSmoothnessFloor = 1e-12;
inline constexpr double kEmpiricalSafety = 1.5;

// 1.5 × sup over sample pairs of ‖h(a) − h(b)‖ / ‖a − b‖. A finite sample
// under-estimates the sup, hence the inflation.
inline SmoothnessEstimate empirical_smoothness(const Game& game, std::span<const Vector> samples,
                                               HMode mode) {
  if (samples.size() < 2) {
    throw Error("empirical_smoothness: at least two samples are required");
  }
  std::vector<Vector> normals;
  normals.reserve(samples.size());
  for (const Vector& s : samples) normals.push_back(stability_normal(game, s, mode));
  double sup = 0.0;
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (std::size_t b = a + 1; b < samples.size(); ++b) {
      const double dist = (samples[a] - samples[b]).norm();
      if (dist == 0.0) continue;
      sup = std::max(sup, (normals[a] - normals[b]).norm() / dist);
    }
  }
  SmoothnessEstimate est;
  est.method = SmoothnessMethod::kEmpiricalSup;
  est.sample_count = static_cast<int>(samples.size());
  est.L = kEmpiricalSafety * sup;
  if (!(est.L >= kSmoothnessFloor)) {
    est.L = kSmoothnessFloor;
    est.degenerate = true;
  }
  return est;
}

// Exact constant when the game knows it; otherwise the empirical estimate.
inline SmoothnessEstimate smoothness_estimate(const Game& game, std::span<const Vector> samples,
                                              HMode mode = HMode::kAnalytic) {
  if (auto exact = game.exact_smoothness()) {
    SmoothnessEstimate est;
    est.method = SmoothnessMethod::kExactQuadratic;
    est.L = *exact;
    if (!(est.L >= kSmoothnessFloor)) {
      est.L = kSmoothnessFloor;
      est.degenerate = true;
    }
    return est;
  }
  if (mode == HMode::kAnalytic && !game.has_analytic_jacobians()) mode = HMode::kFiniteDifference;
  return empirical_smoothness(game, samples, mode);
}

}  // namespace halypo

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

// Mechanism diagnostics over optimization traces: gradient alignment, the
// gradient conflict rate, gap decay rates, and the per-step descent
// certificate.

#pragma once

#include "halypo/core.hpp"
#include "halypo/projection.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace halypo {

// One optimizer iteration. Every field except eta/lambda_star/d_norm/regime
// is measured at θ_k, before the update.
struct StepRecord {
  long k = 0;
  double eta = 0.0;
  double lambda_star = 0.0;
  double d_norm = 0.0;  // norm of the applied direction
  double V = 0.0;
  std::optional<double> cos_phi;  // undefined when either field is ~0
  bool conflict = false;
  double J_team = 0.0;
  Regime regime = Regime::kInactive;
};

inline constexpr double kNormFloor = 1e-12;

inline std::optional<double> alignment(const Vector& u_ind, const Vector& u_team) {
  if (u_ind.size() != u_team.size()) throw DimensionError("alignment: length mismatch");
  const double a = u_ind.norm(), b = u_team.norm();
  if (a < kNormFloor || b < kNormFloor) return std::nullopt;
  return std::clamp(u_ind.dot(u_team) / (a * b), -1.0, 1.0);
}

// True when some agent's independent block points against its team block.
// Blocks with a (near-)zero side never count.
inline bool block_conflict(const AgentLayout& layout, const Vector& u_ind,
                           const Vector& u_team) {
  for (Index i = 0; i < layout.n_agents(); ++i) {
    const auto u = layout.block(u_ind, i);
    const auto t = layout.block(u_team, i);
    if (u.norm() >= kNormFloor && t.norm() >= kNormFloor && u.dot(t) < 0.0) return true;
  }
  return false;
}

namespace detail {
inline std::span<const StepRecord> tail(std::span<const StepRecord> records,
                                        std::size_t window) {
  if (window == 0) throw Error("metrics: empty window");
  if (window > records.size()) throw Error("metrics: window longer than trajectory");
  return records.subspan(records.size() - window);
}
}  // namespace detail

// Fraction of the last `window` steps whose conflict flag is set.
inline double conflict_rate(std::span<const StepRecord> records, std::size_t window) {
  const auto w = detail::tail(records, window);
  std::size_t hits = 0;
  for (const auto& r : w) hits += r.conflict ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(w.size());
}

struct CertificateCheck {
  bool holds = false;
  double slack = 0.0;
};

// V_{k+1} − V_k ≤ −ησV_k + (Lη²/2)‖d‖²; slack is RHS − LHS.
inline CertificateCheck descent_certificate_check(double V_k, double V_next, double eta,
                                                  double sigma, double L, double d_norm_sq) {
  CertificateCheck c;
  c.slack = (-eta * sigma * V_k + 0.5 * L * eta * eta * d_norm_sq) - (V_next - V_k);
  c.holds = c.slack >= -1e-9 * (1.0 + V_k);
  return c;
}

inline constexpr double kDecayFloor = 1e-300;

struct DecayRate {
  double rate = 0.0;        // mean of log(V_{k+1}/V_k)
  std::size_t pairs = 0;    // ratios averaged
  std::size_t excluded = 0; // points at or below the floor
};

// Mean per-step log-ratio over the last `window` values. Values ≤ 1e−300 are
// dropped (and counted); a ratio needs both endpoints.
inline DecayRate decay_rate(std::span<const double> V, std::size_t window) {
  if (window < 2) throw Error("decay_rate: window must contain at least two points");
  if (window > V.size()) throw Error("decay_rate: window longer than series");
  const auto w = V.subspan(V.size() - window);
  DecayRate out;
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!(w[k] > kDecayFloor)) ++out.excluded;
    if (k + 1 < w.size() && w[k] > kDecayFloor && w[k + 1] > kDecayFloor) {
      sum += std::log(w[k + 1] / w[k]);
      ++out.pairs;
    }
  }
  if (out.pairs == 0) throw Error("decay_rate: fewer than two usable points");
  out.rate = sum / static_cast<double>(out.pairs);
  return out;
}

struct SummaryThresholds {
  double V_conv = 1e-6;
  // Final window: this fraction of the run, but at least min_window steps.
  double window_fraction = 0.1;
  std::size_t min_window = 10;
};

struct MechanismSummary {
  double steady_state_V = 0.0;
  std::optional<double> mean_alignment;
  double gcr = 0.0;
  std::optional<double> gap_decay_rate;
  std::optional<long> convergence_step;
  std::size_t window = 0;
};

inline std::size_t final_window(std::size_t n, const SummaryThresholds& t = {}) {
  const auto frac = static_cast<std::size_t>(std::ceil(t.window_fraction * static_cast<double>(n)));
  return std::min(n, std::max(t.min_window, frac));
}

inline MechanismSummary summarize(std::span<const StepRecord> records,
                                  const SummaryThresholds& thresholds = {}) {
  if (records.empty()) throw Error("summarize: empty trajectory");
  MechanismSummary s;
  s.window = final_window(records.size(), thresholds);
  const auto w = detail::tail(records, s.window);

  double v_sum = 0.0, cos_sum = 0.0;
  std::size_t cos_n = 0;
  std::vector<double> vs;
  vs.reserve(w.size());
  for (const auto& r : w) {
    v_sum += r.V;
    vs.push_back(r.V);
    if (r.cos_phi) {
      cos_sum += *r.cos_phi;
      ++cos_n;
    }
  }
  s.steady_state_V = v_sum / static_cast<double>(w.size());
  if (cos_n > 0) s.mean_alignment = cos_sum / static_cast<double>(cos_n);
  s.gcr = conflict_rate(records, s.window);
  if (vs.size() >= 2) {
    try {
      s.gap_decay_rate = decay_rate(vs, vs.size()).rate;
    } catch (const Error&) {
      // all-zero window: no usable ratios
    }
  }
  for (const auto& r : records) {
    if (r.V < thresholds.V_conv) {
      s.convergence_step = r.k;
      break;
    }
  }
  return s;
}

}  // namespace halypo

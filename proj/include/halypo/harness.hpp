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

// Experiment driver: one configured run, and seed sweeps with mean/std
// aggregation of the mechanism summary.

#pragma once

#include "halypo/io.hpp"
#include "halypo/metrics.hpp"
#include "halypo/optimizers.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

namespace halypo {

// Forwards to a wrapped game and counts field evaluations. Critic refreshes
// stay wrapped and share the same counters.
class CountingGame final : public Game {
 public:
  struct Counters {
    std::atomic<long> independent{0};
    std::atomic<long> team{0};
  };

  explicit CountingGame(std::shared_ptr<const Game> inner,
                        std::shared_ptr<Counters> counters = std::make_shared<Counters>())
      : inner_(std::move(inner)), counters_(std::move(counters)) {
    if (!inner_) throw Error("CountingGame: null game");
  }

  const Counters& counters() const { return *counters_; }

  std::string name() const override { return inner_->name(); }
  const AgentLayout& layout() const override { return inner_->layout(); }
  double agent_payoff(Index i, const Vector& t) const override { return inner_->agent_payoff(i, t); }
  double team_payoff(const Vector& t) const override { return inner_->team_payoff(t); }
  double agent_surrogate(Index i, const Vector& anchor, const Vector& probe) const override {
    return inner_->agent_surrogate(i, anchor, probe);
  }
  Vector independent_field(const Vector& t) const override {
    counters_->independent.fetch_add(1, std::memory_order_relaxed);
    return inner_->independent_field(t);
  }
  Vector team_field(const Vector& t) const override {
    counters_->team.fetch_add(1, std::memory_order_relaxed);
    return inner_->team_field(t);
  }
  bool has_analytic_jacobians() const override { return inner_->has_analytic_jacobians(); }
  Matrix independent_jacobian(const Vector& t) const override {
    return inner_->independent_jacobian(t);
  }
  Matrix team_jacobian(const Vector& t) const override { return inner_->team_jacobian(t); }
  std::optional<double> exact_smoothness() const override { return inner_->exact_smoothness(); }
  bool uses_critic() const override { return inner_->uses_critic(); }
  std::shared_ptr<const Game> refreshed(const Vector& t, long step, long period) const override {
    auto fresh = inner_->refreshed(t, step, period);
    if (!fresh) return nullptr;
    return std::make_shared<const CountingGame>(std::move(fresh), counters_);
  }

 private:
  std::shared_ptr<const Game> inner_;
  std::shared_ptr<Counters> counters_;
};

struct RunMetadata {
  std::string game;
  double wall_time_s = 0.0;
  long independent_field_evals = 0;
  long team_field_evals = 0;
  long steps_completed = 0;
  std::optional<std::string> failure;
  std::optional<SmoothnessEstimate> smoothness;
  double sup_d_norm = 0.0;
};

struct RunOutcome {
  io::TrajectoryLog log;        // records thinned by log_every
  std::vector<StepRecord> all;  // every step
  RunMetadata meta;
  Vector theta_final;
  Vector theta0;
};

inline Vector initial_parameters(const io::RunConfig& config, const AgentLayout& layout,
                                 std::optional<std::uint64_t> seed_override = std::nullopt) {
  if (const auto* v = std::get_if<Vector>(&config.theta0)) return *v;
  const auto& g = std::get<io::GaussianInit>(config.theta0);
  std::mt19937_64 rng(seed_override.value_or(g.seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector out(layout.total_dim());
  for (Index j = 0; j < out.size(); ++j) out[j] = g.scale * gauss(rng);
  return out;
}

inline io::json run_metadata_to_json(const RunMetadata& m) {
  io::json j{{"game", m.game},
             {"wall_time_s", m.wall_time_s},
             {"independent_field_evals", m.independent_field_evals},
             {"team_field_evals", m.team_field_evals},
             {"steps_completed", m.steps_completed},
             {"failure", m.failure ? io::json(*m.failure) : io::json(nullptr)},
             {"sup_d_norm", m.sup_d_norm}};
  if (m.smoothness) {
    j["smoothness"] = {{"L", m.smoothness->L},
                       {"method", std::string(to_string(m.smoothness->method))},
                       {"sample_count", m.smoothness->sample_count},
                       {"degenerate", m.smoothness->degenerate}};
  }
  return j;
}

// `seed_override` replaces the θ0 sampling seed; it has no effect when θ0 is
// given explicitly.
inline RunOutcome run_experiment(const io::RunConfig& config,
                                 std::optional<std::uint64_t> seed_override = std::nullopt,
                                 const SummaryThresholds& thresholds = {}) {
  if (config.n_steps < 1) throw ConfigError("n_steps", "must be a positive integer");
  if (config.log_every < 1) throw ConfigError("log_every", "must be a positive integer");
  auto base = io::game_from_json(config.game);
  auto counted = std::make_shared<const CountingGame>(base);

  RunOutcome out;
  out.theta0 = initial_parameters(config, base->layout(), seed_override);
  const auto t0 = std::chrono::steady_clock::now();
  Trajectory tr = run_trajectory(*counted, JointParams(out.theta0, base->layout()),
                                 config.optimizer, config.n_steps);
  out.meta.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  out.meta.game = base->name();
  out.meta.independent_field_evals = counted->counters().independent.load();
  out.meta.team_field_evals = counted->counters().team.load();
  out.meta.steps_completed = static_cast<long>(tr.records.size());
  out.meta.failure = tr.failure;
  out.meta.smoothness = tr.smoothness;
  out.meta.sup_d_norm = tr.sup_d_norm;
  out.theta_final = tr.theta;

  out.log.fingerprint = io::fingerprint(config);
  for (const auto& r : tr.records) {
    if (r.k % config.log_every == 0) out.log.records.push_back(r);
  }
  if (!tr.records.empty()) out.log.summary = summarize(tr.records, thresholds);
  out.all = std::move(tr.records);
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::size_t count = 0;
};

inline Aggregate aggregate(const std::vector<double>& xs) {
  Aggregate a;
  a.count = xs.size();
  if (xs.empty()) return a;
  double s = 0.0;
  for (double x : xs) s += x;
  a.mean = s / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - a.mean) * (x - a.mean);
  a.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
  return a;
}

struct SeedRun {
  std::uint64_t seed = 0;
  std::optional<RunOutcome> outcome;  // absent when the run threw
  std::optional<std::string> failure;
};

struct SweepResult {
  std::vector<SeedRun> runs;
  std::size_t failures = 0;
  // keyed by MechanismSummary field name
  std::vector<std::pair<std::string, Aggregate>> fields;
};

inline unsigned sweep_threads(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("HALYPO_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Runs the configuration once per seed. Runs execute in parallel; results are
// stored by seed position, so aggregation does not depend on scheduling.
inline SweepResult sweep(const io::RunConfig& config, const std::vector<std::uint64_t>& seeds,
                         const SummaryThresholds& thresholds = {}) {
  if (seeds.empty()) throw ConfigError("seeds", "need at least one seed");
  SweepResult res;
  res.runs.resize(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) {
      SeedRun& slot = res.runs[i];
      slot.seed = seeds[i];
      try {
        slot.outcome = run_experiment(config, seeds[i], thresholds);
        if (slot.outcome->meta.failure) slot.failure = slot.outcome->meta.failure;
      } catch (const std::exception& e) {
        slot.failure = e.what();
      }
    }
  };
  const unsigned n = sweep_threads(seeds.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<double> ssv, align, gcr, decay, conv;
  for (const auto& r : res.runs) {
    if (r.failure || !r.outcome) {
      ++res.failures;
      continue;
    }
    const auto& s = r.outcome->log.summary;
    ssv.push_back(s.steady_state_V);
    gcr.push_back(s.gcr);
    if (s.mean_alignment) align.push_back(*s.mean_alignment);
    if (s.gap_decay_rate) decay.push_back(*s.gap_decay_rate);
    if (s.convergence_step) conv.push_back(static_cast<double>(*s.convergence_step));
  }
  res.fields = {{"steady_state_V", aggregate(ssv)},
                {"mean_alignment", aggregate(align)},
                {"gcr", aggregate(gcr)},
                {"gap_decay_rate", aggregate(decay)},
                {"convergence_step", aggregate(conv)}};
  return res;
}

inline io::json sweep_to_json(const SweepResult& r) {
  io::json runs = io::json::array();
  for (const auto& s : r.runs) {
    io::json j{{"seed", s.seed},
               {"failure", s.failure ? io::json(*s.failure) : io::json(nullptr)}};
    if (s.outcome) j["summary"] = io::summary_to_json(s.outcome->log.summary);
    runs.push_back(std::move(j));
  }
  io::json agg = io::json::object();
  for (const auto& [name, a] : r.fields) {
    agg[name] = {{"mean", a.mean}, {"std", a.stddev}, {"count", a.count}};
  }
  return io::json{{"schema_version", io::kSchemaVersion},
                  {"runs", std::move(runs)},
                  {"aggregate", std::move(agg)},
                  {"failures", r.failures}};
}

}  // namespace halypo

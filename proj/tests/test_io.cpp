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

// Config parsing, trajectory persistence, experiment runs and sweeps.

#include "test_util.hpp"

#include <filesystem>

namespace halypo {
namespace {

namespace fs = std::filesystem;
using io::json;

json bilinear_config_json() {
  return json::parse(R"({
    "schema_version": 1,
    "game": {"type": "bilinear"},
    "optimizer": {"variant": "halypo", "sigma": 1.0, "epsilon": 0.0,
                  "schedule": {"type": "constant", "eta": 0.1}},
    "n_steps": 300,
    "theta0": [1.0, 0.0]
  })");
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("halypo_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string config_error_field(const json& j) {
  try {
    io::config_from_json(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

TEST(Numbers, ShortestRoundTrip) {
  EXPECT_EQ(io::format_double(0.9125), "0.9125");
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(std::nan("")), "nan");
  EXPECT_EQ(io::format_double(-INFINITY), "-inf");
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, i % 40 - 20);
    EXPECT_EQ(io::parse_double(io::format_double(x)), x);
  }
}

TEST(Config, BundledBilinearParses) {
  const auto c = io::config_from_json(bilinear_config_json());
  EXPECT_EQ(c.n_steps, 300);
  EXPECT_EQ(c.optimizer.variant, Variant::kHalypo);
  EXPECT_EQ(c.optimizer.epsilon, 0.0);
  EXPECT_EQ(std::get<Vector>(c.theta0), test::vec({1, 0}));
  EXPECT_EQ(c.log_every, 1);
}

TEST(Config, ErrorsNameTheField) {
  auto j = bilinear_config_json();
  j["n_steps"] = 0;
  EXPECT_EQ(config_error_field(j), "n_steps");

  j = bilinear_config_json();
  j.erase("game");
  EXPECT_EQ(config_error_field(j), "<root>.game");

  j = bilinear_config_json();
  j["theta0"] = {1.0, 2.0, 3.0};
  EXPECT_EQ(config_error_field(j), "theta0");

  j = bilinear_config_json();
  j["optimizer"]["variant"] = "bogus";
  EXPECT_EQ(config_error_field(j), "optimizer.variant");

  j = bilinear_config_json();
  j["optimizer"]["schedule"] = {{"type", "robbins_monro"}, {"eta0", 0.5}, {"power", 0.4}};
  EXPECT_EQ(config_error_field(j), "optimizer.schedule.power");

  j = bilinear_config_json();
  j["game"] = {{"type", "markov"}, {"fixture", "nowhere"}};
  EXPECT_EQ(config_error_field(j), "game.fixture");

  j = bilinear_config_json();
  j["schema_version"] = 2;
  EXPECT_EQ(config_error_field(j), "schema_version");

  j = bilinear_config_json();
  j["extra"] = true;
  EXPECT_NE(config_error_field(j), "<accepted>");
}

TEST(Config, FingerprintIsStableAndSensitive) {
  const auto a = io::config_from_json(bilinear_config_json());
  const auto b = io::config_from_json(json::parse(bilinear_config_json().dump()));
  EXPECT_EQ(io::fingerprint(a), io::fingerprint(b));
  EXPECT_EQ(io::fingerprint(a).size(), 16u);
  auto j = bilinear_config_json();
  j["n_steps"] = 301;
  EXPECT_NE(io::fingerprint(io::config_from_json(j)), io::fingerprint(a));
}

TEST(Config, GamesRoundTripThroughJson) {
  const auto q = fixtures::q_example();
  const auto back = io::quadratic_from_json(io::quadratic_to_json(*q), "game");
  EXPECT_EQ(back->field_matrix(), q->field_matrix());
  const auto mg = fixtures::two_state_tables();
  const auto mback = io::markov_from_json(io::markov_to_json(*mg), "spec");
  EXPECT_EQ(mback->transitions(), mg->transitions());
  EXPECT_EQ(mback->rewards(), mg->rewards());
  EXPECT_EQ(mback->gamma(), mg->gamma());
}

TEST(Csv, HeaderIsFrozen) {
  EXPECT_EQ(io::csv_header(), "step,eta,lambda,d_norm,V,cos_phi,conflict,J_team,regime");
}

TEST(Csv, EmptyLogIsHeaderOnly) {
  EXPECT_EQ(io::to_csv({}), io::csv_header() + "\n");
  const auto dir = scratch_dir("empty_csv");
  io::TrajectoryLog log;
  io::persist_log(log, io::LogFormat::kCsv, (dir / "t.csv").string());
  EXPECT_EQ(io::read_file((dir / "t.csv").string()), io::csv_header() + "\n");
}

TEST(Csv, BilinearRowOneHasExactGap) {
  const auto run = run_experiment(io::config_from_json(bilinear_config_json()));
  const std::string csv = io::to_csv(run.log.records);
  std::istringstream in(csv);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  EXPECT_EQ(row1.rfind("1,", 0), 0u);
  const auto cells = io::split_csv_line(row1);
  ASSERT_EQ(cells.size(), 9u);
  EXPECT_EQ(cells[4], "0.9125");
  EXPECT_EQ(io::parse_double(cells[4]), 0.9125);
  EXPECT_EQ(cells[8], "active");
}

TEST(Csv, ColumnReaderAndUndefinedAlignment) {
  std::vector<StepRecord> recs(3);
  for (int k = 0; k < 3; ++k) {
    recs[static_cast<std::size_t>(k)].k = k;
    recs[static_cast<std::size_t>(k)].V = 1.0 / (k + 1);
  }
  recs[1].cos_phi = -0.25;
  const std::string csv = io::to_csv(recs);
  const auto V = io::read_csv_column(csv, "V", "mem");
  EXPECT_EQ(V.values, (std::vector<double>{1.0, 0.5, 1.0 / 3}));
  EXPECT_EQ(V.steps, (std::vector<double>{0, 1, 2}));
  const auto cos = io::read_csv_column(csv, "cos_phi", "mem");
  EXPECT_TRUE(std::isnan(cos.values[0]));
  EXPECT_EQ(cos.values[1], -0.25);
  EXPECT_THROW(io::read_csv_column(csv, "nope", "mem"), ConfigError);
}

TEST(Json, LogRoundTripIsByteIdentical) {
  const auto run = run_experiment(io::config_from_json(bilinear_config_json()));
  const auto dir = scratch_dir("json_roundtrip");
  const std::string path = (dir / "log.json").string();
  io::persist_log(run.log, io::LogFormat::kJson, path);
  const std::string first = io::read_file(path);
  const auto loaded = io::load_log_json(path);
  EXPECT_EQ(io::log_to_json_text(loaded), first);
  EXPECT_EQ(json::parse(first)["schema_version"], 1);
  EXPECT_EQ(loaded.records.size(), run.log.records.size());
  EXPECT_EQ(*loaded.summary.convergence_step, 151);
}

TEST(Io, UnwritablePathRaisesWithPath) {
  try {
    io::write_file("/nonexistent_dir/x/y.csv", "a");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), "/nonexistent_dir/x/y.csv");
  }
  EXPECT_THROW(io::read_file("/nonexistent_dir/none.json"), IoError);
}

TEST(Experiment, BilinearConvergesAt151) {
  const auto run = run_experiment(io::config_from_json(bilinear_config_json()));
  EXPECT_EQ(*run.log.summary.convergence_step, 151);
  EXPECT_FALSE(run.meta.failure);
  EXPECT_EQ(run.meta.steps_completed, 300);
  EXPECT_GT(run.meta.independent_field_evals, 0);
  EXPECT_GT(run.meta.team_field_evals, 0);
  EXPECT_GE(run.meta.wall_time_s, 0.0);
}

TEST(Experiment, IdenticalConfigGivesByteIdenticalCsv) {
  auto j = bilinear_config_json();
  j["theta0"] = {{"random_gaussian", 2.0}, {"seed", 17}};
  const auto c = io::config_from_json(j);
  EXPECT_EQ(io::to_csv(run_experiment(c).log.records), io::to_csv(run_experiment(c).log.records));
}

TEST(Experiment, LogEveryThinsRecords) {
  auto j = bilinear_config_json();
  j["log_every"] = 7;
  const auto run = run_experiment(io::config_from_json(j));
  EXPECT_EQ(run.all.size(), 300u);
  EXPECT_EQ(run.log.records.size(), 43u);
  for (const auto& r : run.log.records) EXPECT_EQ(r.k % 7, 0);
}

TEST(Experiment, MarkovFixtureRuns) {
  auto j = bilinear_config_json();
  j["game"] = {{"type", "markov"}, {"fixture", "two_state"}};
  j["optimizer"]["h_mode"] = "fd";
  j["optimizer"]["snapshot_period"] = 10;
  j["theta0"] = {{"random_gaussian", 0.5}, {"seed", 3}};
  j["n_steps"] = 50;
  const auto run = run_experiment(io::config_from_json(j));
  EXPECT_FALSE(run.meta.failure);
  EXPECT_EQ(run.meta.game, "two_state");
  EXPECT_EQ(run.theta0.size(), 8);
}

TEST(Sweep, SingleSeedHasZeroStd) {
  auto j = bilinear_config_json();
  j["theta0"] = {{"random_gaussian", 1.0}, {"seed", 5}};
  const auto res = sweep(io::config_from_json(j), {5});
  EXPECT_EQ(res.failures, 0u);
  for (const auto& [name, a] : res.fields) EXPECT_EQ(a.stddev, 0.0) << name;
}

TEST(Sweep, ExplicitThetaIgnoresSeeds) {
  const auto res = sweep(io::config_from_json(bilinear_config_json()), {1, 2, 3, 4});
  for (const auto& [name, a] : res.fields) EXPECT_EQ(a.stddev, 0.0) << name;
  EXPECT_EQ(io::to_csv(res.runs[0].outcome->log.records),
            io::to_csv(res.runs[3].outcome->log.records));
}

TEST(Sweep, GaussianSeedsAllConverge) {
  auto j = bilinear_config_json();
  j["theta0"] = {{"random_gaussian", 1.0}, {"seed", 1}};
  j["n_steps"] = 400;
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);
  const auto res = sweep(io::config_from_json(j), seeds);
  EXPECT_EQ(res.failures, 0u);
  for (const auto& r : res.runs) {
    ASSERT_TRUE(r.outcome);
    EXPECT_TRUE(r.outcome->log.summary.convergence_step.has_value()) << "seed " << r.seed;
  }
  for (const auto& [name, a] : res.fields) {
    if (name == "gap_decay_rate") {
      EXPECT_EQ(a.count, 10u);
      EXPECT_LT(a.stddev, 1e-9);
      EXPECT_NEAR(a.mean, std::log(0.9125), 1e-12);
    }
    if (name == "convergence_step") {
      EXPECT_EQ(a.count, 10u);
    }
  }
  EXPECT_EQ(res.runs[2].seed, 3u);
  EXPECT_NE(res.runs[0].outcome->theta0, res.runs[1].outcome->theta0);
}

TEST(Sweep, RecordsFailuresAndAggregatesSuccesses) {
  EXPECT_THROW(sweep(io::config_from_json(bilinear_config_json()), {}), ConfigError);
  // h = 0 with V > 0 and no damping stops every run at step 0
  auto j = bilinear_config_json();
  j["game"] = json::parse(R"({"type": "quadratic", "blocks": [1],
      "Q_i": [[[0.0]]], "b_i": [[1.0]], "Q": [[0.0]], "b": [0.0]})");
  j["theta0"] = {0.0};
  const auto res = sweep(io::config_from_json(j), {1, 2});
  EXPECT_EQ(res.failures, 2u);
  for (const auto& [name, a] : res.fields) EXPECT_EQ(a.count, 0u) << name;
}

TEST(Aggregate, PopulationStd) {
  const auto a = aggregate({1.0, 3.0});
  EXPECT_EQ(a.mean, 2.0);
  EXPECT_EQ(a.stddev, 1.0);
  EXPECT_EQ(a.count, 2u);
}

}  // namespace
}  // namespace halypo

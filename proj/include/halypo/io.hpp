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

// Serialization: game fixtures and run configurations as JSON, trajectories
// as CSV (frozen columns) and JSON.
//
// Numbers are written in the shortest decimal form that reads back to the
// same double, so every persisted value round-trips exactly.

#pragma once

#include "halypo/fixtures.hpp"
#include "halypo/games.hpp"
#include "halypo/markov.hpp"
#include "halypo/metrics.hpp"
#include "halypo/optimizers.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace halypo::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline constexpr std::array<std::string_view, 9> kCsvColumns = {
    "step", "eta", "lambda", "d_norm", "V", "cos_phi", "conflict", "J_team", "regime"};

// ---------------------------------------------------------------------------
// Scalars

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw Error("format_double: conversion failed");
  return std::string(buf.data(), end);
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw Error("parse_double: not a number: '" + std::string(s) + "'");
  }
  return x;
}

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

// ---------------------------------------------------------------------------
// Field access with error messages that name the offending path

namespace detail {

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "." + key, "missing required field");
  return *it;
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

inline long as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<long>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

inline double number_or(const json& obj, const std::string& key, double fallback,
                        const std::string& path) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_number(*it, path + "." + key);
}

inline void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                           const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(path + "." + it.key(), "unknown field");
  }
}

}  // namespace detail

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Vector vector_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Index>(i)] = detail::as_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

// Row-major nested arrays.
inline json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

inline Matrix matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(rp, "ragged matrix row");
    m.row(static_cast<Index>(r)) = vector_from_json(j[r], rp).transpose();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Game fixtures

// {states, actions, P, R, gamma, mu}; P is indexed [s][joint a][s'] and R is
// [s][joint a], joint actions in mixed radix with agent 0 most significant.
inline json markov_to_json(const TabularMarkovGame& mg) {
  json actions = json::array();
  for (Index a : mg.action_counts()) actions.push_back(a);
  json P = json::array();
  for (Index s = 0; s < mg.n_states(); ++s) {
    json per_action = json::array();
    for (Index a = 0; a < mg.n_joint_actions(); ++a) {
      per_action.push_back(vector_to_json(mg.transitions().row(s * mg.n_joint_actions() + a).transpose()));
    }
    P.push_back(std::move(per_action));
  }
  return json{{"name", mg.name()},
              {"states", mg.n_states()},
              {"actions", std::move(actions)},
              {"P", std::move(P)},
              {"R", matrix_to_json(mg.rewards())},
              {"gamma", mg.gamma()},
              {"mu", vector_to_json(mg.initial_distribution())}};
}

inline std::shared_ptr<const TabularMarkovGame> markov_from_json(const json& j,
                                                                 const std::string& path) {
  using namespace detail;
  reject_unknown(j, {"name", "states", "actions", "P", "R", "gamma", "mu"}, path);
  const long S = as_integer(require(j, "states", path), path + ".states");
  if (S < 1 || S > kMaxStates) throw ConfigError(path + ".states", "must be in [1, 16]");
  const json& acts = require(j, "actions", path);
  if (!acts.is_array() || acts.empty()) {
    throw ConfigError(path + ".actions", "expected a non-empty array of action counts");
  }
  std::vector<Index> counts;
  Index joint = 1;
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const long a = as_integer(acts[i], path + ".actions[" + std::to_string(i) + "]");
    if (a < 1 || a > kMaxActions) {
      throw ConfigError(path + ".actions[" + std::to_string(i) + "]", "must be in [1, 4]");
    }
    counts.push_back(a);
    joint *= a;
  }
  const json& P = require(j, "P", path);
  if (!P.is_array() || static_cast<long>(P.size()) != S) {
    throw ConfigError(path + ".P", "expected one entry per state");
  }
  Matrix trans(S * joint, S);
  for (long s = 0; s < S; ++s) {
    const std::string sp = path + ".P[" + std::to_string(s) + "]";
    const Matrix block = matrix_from_json(P[static_cast<std::size_t>(s)], sp);
    if (block.rows() != joint || block.cols() != S) {
      throw ConfigError(sp, "expected a joint-actions x states table");
    }
    trans.middleRows(s * joint, joint) = block;
  }
  const Matrix R = matrix_from_json(require(j, "R", path), path + ".R");
  const double gamma = as_number(require(j, "gamma", path), path + ".gamma");
  const Vector mu = vector_from_json(require(j, "mu", path), path + ".mu");
  const std::string name = j.contains("name") ? as_string(j["name"], path + ".name") : "markov";
  try {
    return std::make_shared<const TabularMarkovGame>(S, counts, trans, R, gamma, mu, name);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

inline json quadratic_to_json(const QuadraticGame& g) {
  json blocks = json::array(), Qi = json::array(), bi = json::array();
  for (Index i = 0; i < g.layout().n_agents(); ++i) blocks.push_back(g.layout().block_dim(i));
  for (const auto& m : g.agent_matrices()) Qi.push_back(matrix_to_json(m));
  for (const auto& v : g.agent_offsets()) bi.push_back(vector_to_json(v));
  return json{{"name", g.name()},
              {"blocks", std::move(blocks)},
              {"Q_i", std::move(Qi)},
              {"b_i", std::move(bi)},
              {"Q", matrix_to_json(g.team_matrix())},
              {"b", vector_to_json(g.team_offset())}};
}

inline std::shared_ptr<const QuadraticGame> quadratic_from_json(const json& j,
                                                                const std::string& path) {
  using namespace detail;
  reject_unknown(j, {"type", "name", "blocks", "Q_i", "b_i", "Q", "b"}, path);
  const json& blocks = require(j, "blocks", path);
  if (!blocks.is_array() || blocks.empty()) {
    throw ConfigError(path + ".blocks", "expected a non-empty array of block sizes");
  }
  std::vector<Index> dims;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const long d = as_integer(blocks[i], path + ".blocks[" + std::to_string(i) + "]");
    if (d < 1) throw ConfigError(path + ".blocks[" + std::to_string(i) + "]", "must be positive");
    dims.push_back(d);
  }
  const json& Qi = require(j, "Q_i", path);
  const json& bi = require(j, "b_i", path);
  if (!Qi.is_array() || Qi.size() != dims.size()) {
    throw ConfigError(path + ".Q_i", "expected one matrix per agent");
  }
  if (!bi.is_array() || bi.size() != dims.size()) {
    throw ConfigError(path + ".b_i", "expected one vector per agent");
  }
  std::vector<Matrix> agent_Q;
  std::vector<Vector> agent_b;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    agent_Q.push_back(matrix_from_json(Qi[i], path + ".Q_i[" + std::to_string(i) + "]"));
    agent_b.push_back(vector_from_json(bi[i], path + ".b_i[" + std::to_string(i) + "]"));
  }
  const Matrix Q = matrix_from_json(require(j, "Q", path), path + ".Q");
  const Vector b = vector_from_json(require(j, "b", path), path + ".b");
  const std::string name = j.contains("name") ? as_string(j["name"], path + ".name") : "quadratic";
  try {
    return make_quadratic_game(AgentLayout(dims), agent_Q, agent_b, Q, b, name);
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

// ---------------------------------------------------------------------------
// Run configuration

struct GaussianInit {
  double scale = 1.0;
  std::uint64_t seed = 0;
};

struct RunConfig {
  // The game section exactly as it appeared (normalized), so it can be
  // re-serialized canonically.
  json game;
  OptimizerConfig optimizer;
  long n_steps = 1;
  std::variant<Vector, GaussianInit> theta0 = Vector{};
  long log_every = 1;
  std::string csv_name = "trajectory.csv";
  std::string json_name = "trajectory.json";
  std::optional<std::string> svg_name;
};

inline std::shared_ptr<const Game> game_from_json(const json& g, const std::string& path = "game") {
  using namespace detail;
  const std::string type = as_string(require(g, "type", path), path + ".type");
  if (type == "bilinear") {
    reject_unknown(g, {"type"}, path);
    return make_bilinear_rotation_game();
  }
  if (type == "quadratic") {
    if (g.contains("fixture")) {
      reject_unknown(g, {"type", "fixture"}, path);
      const std::string name = as_string(g["fixture"], path + ".fixture");
      if (name == "q_example") return fixtures::q_example();
      if (name == "bilinear_quadratic") return fixtures::bilinear_as_quadratic();
      throw ConfigError(path + ".fixture", "unknown quadratic fixture '" + name + "'");
    }
    return quadratic_from_json(g, path);
  }
  if (type == "markov") {
    reject_unknown(g, {"type", "fixture", "spec"}, path);
    if (g.contains("fixture") == g.contains("spec")) {
      throw ConfigError(path, "markov game needs exactly one of 'fixture' or 'spec'");
    }
    if (g.contains("fixture")) {
      const std::string name = as_string(g["fixture"], path + ".fixture");
      try {
        return std::make_shared<const MarkovGame>(fixtures::markov_tables(name));
      } catch (const ConfigError&) {
        throw ConfigError(path + ".fixture", "unknown Markov fixture '" + name + "'");
      }
    }
    return std::make_shared<const MarkovGame>(markov_from_json(g["spec"], path + ".spec"));
  }
  throw ConfigError(path + ".type", "expected one of bilinear, quadratic, markov");
}

inline json schedule_to_json(const Schedule& s) {
  return std::visit(
      [](const auto& v) -> json {
        using S = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<S, ConstantStep>) {
          return {{"type", "constant"}, {"eta", v.eta}};
        } else if constexpr (std::is_same_v<S, AdaptiveStep>) {
          return {{"type", "adaptive"}, {"safety", v.safety}};
        } else {
          return {{"type", "robbins_monro"}, {"eta0", v.eta0}, {"power", v.power}};
        }
      },
      s);
}

inline Schedule schedule_from_json(const json& j, const std::string& path) {
  using namespace detail;
  const std::string type = as_string(require(j, "type", path), path + ".type");
  if (type == "constant") {
    reject_unknown(j, {"type", "eta"}, path);
    return ConstantStep{number_or(j, "eta", ConstantStep{}.eta, path)};
  }
  if (type == "adaptive") {
    reject_unknown(j, {"type", "safety"}, path);
    return AdaptiveStep{number_or(j, "safety", AdaptiveStep{}.safety, path)};
  }
  if (type == "robbins_monro") {
    reject_unknown(j, {"type", "eta0", "power"}, path);
    return RobbinsMonroStep{number_or(j, "eta0", RobbinsMonroStep{}.eta0, path),
                            number_or(j, "power", RobbinsMonroStep{}.power, path)};
  }
  throw ConfigError(path + ".type", "expected one of constant, adaptive, robbins_monro");
}

inline json optimizer_to_json(const OptimizerConfig& c) {
  return json{{"variant", std::string(to_string(c.variant))},
              {"sigma", c.sigma},
              {"epsilon", c.epsilon},
              {"rho", c.rho},
              {"schedule", schedule_to_json(c.schedule)},
              {"h_mode", std::string(to_string(c.h_mode))},
              {"snapshot_period", c.snapshot_period},
              {"eta_min", c.eta_min},
              {"eta_max", c.eta_max},
              {"smoothness_samples", c.smoothness_samples},
              {"smoothness_radius", c.smoothness_radius},
              {"smoothness_seed", c.smoothness_seed}};
}

inline OptimizerConfig optimizer_from_json(const json& j, const std::string& path) {
  using namespace detail;
  reject_unknown(j,
                 {"variant", "sigma", "epsilon", "rho", "schedule", "h_mode", "snapshot_period",
                  "eta_min", "eta_max", "smoothness_samples", "smoothness_radius",
                  "smoothness_seed"},
                 path);
  OptimizerConfig c;
  const std::string v = as_string(require(j, "variant", path), path + ".variant");
  auto parsed = parse_variant(v);
  if (!parsed) throw ConfigError(path + ".variant", "unknown variant '" + v + "'");
  c.variant = *parsed;
  c.sigma = number_or(j, "sigma", c.sigma, path);
  c.epsilon = number_or(j, "epsilon", c.epsilon, path);
  c.rho = number_or(j, "rho", c.rho, path);
  if (j.contains("schedule")) c.schedule = schedule_from_json(j["schedule"], path + ".schedule");
  if (j.contains("h_mode")) {
    const std::string m = as_string(j["h_mode"], path + ".h_mode");
    if (m == "analytic") c.h_mode = HMode::kAnalytic;
    else if (m == "fd") c.h_mode = HMode::kFiniteDifference;
    else throw ConfigError(path + ".h_mode", "expected analytic or fd");
  }
  if (j.contains("snapshot_period")) {
    c.snapshot_period = as_integer(j["snapshot_period"], path + ".snapshot_period");
  }
  c.eta_min = number_or(j, "eta_min", c.eta_min, path);
  c.eta_max = number_or(j, "eta_max", c.eta_max, path);
  if (j.contains("smoothness_samples")) {
    c.smoothness_samples =
        static_cast<int>(as_integer(j["smoothness_samples"], path + ".smoothness_samples"));
  }
  c.smoothness_radius = number_or(j, "smoothness_radius", c.smoothness_radius, path);
  if (j.contains("smoothness_seed")) {
    const long s = as_integer(j["smoothness_seed"], path + ".smoothness_seed");
    if (s < 0) throw ConfigError(path + ".smoothness_seed", "must be nonnegative");
    c.smoothness_seed = static_cast<std::uint64_t>(s);
  }
  c.validate();
  return c;
}

inline json config_to_json(const RunConfig& c) {
  json theta0;
  if (const auto* v = std::get_if<Vector>(&c.theta0)) {
    theta0 = vector_to_json(*v);
  } else {
    const auto& g = std::get<GaussianInit>(c.theta0);
    theta0 = json{{"random_gaussian", g.scale}, {"seed", g.seed}};
  }
  json output{{"csv", c.csv_name}, {"json", c.json_name}};
  if (c.svg_name) output["svg"] = *c.svg_name;
  return json{{"schema_version", kSchemaVersion},
              {"game", c.game},
              {"optimizer", optimizer_to_json(c.optimizer)},
              {"n_steps", c.n_steps},
              {"theta0", std::move(theta0)},
              {"log_every", c.log_every},
              {"output", std::move(output)}};
}

// Parses and validates a run configuration, including building the game once
// so dimension errors surface here rather than mid-run.
inline RunConfig config_from_json(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("<root>", "expected an object");
  reject_unknown(j, {"schema_version", "game", "optimizer", "n_steps", "theta0", "log_every",
                     "output"},
                 "<root>");
  const long version = as_integer(require(j, "schema_version", "<root>"), "schema_version");
  if (version != kSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(version));
  }
  RunConfig c;
  c.game = require(j, "game", "<root>");
  const auto game = game_from_json(c.game);
  c.optimizer = optimizer_from_json(require(j, "optimizer", "<root>"), "optimizer");
  c.n_steps = as_integer(require(j, "n_steps", "<root>"), "n_steps");
  if (c.n_steps < 1) throw ConfigError("n_steps", "must be a positive integer");

  const json& t0 = require(j, "theta0", "<root>");
  const Index D = game->layout().total_dim();
  if (t0.is_array()) {
    Vector v = vector_from_json(t0, "theta0");
    if (v.size() != D) {
      throw ConfigError("theta0", "length " + std::to_string(v.size()) +
                                      " does not match game dimension " + std::to_string(D));
    }
    c.theta0 = std::move(v);
  } else if (t0.is_object()) {
    reject_unknown(t0, {"random_gaussian", "seed"}, "theta0");
    GaussianInit g;
    g.scale = as_number(require(t0, "random_gaussian", "theta0"), "theta0.random_gaussian");
    if (!(g.scale >= 0.0)) throw ConfigError("theta0.random_gaussian", "must be nonnegative");
    if (t0.contains("seed")) {
      const long s = as_integer(t0["seed"], "theta0.seed");
      if (s < 0) throw ConfigError("theta0.seed", "must be nonnegative");
      g.seed = static_cast<std::uint64_t>(s);
    }
    c.theta0 = g;
  } else {
    throw ConfigError("theta0", "expected an array or {random_gaussian, seed}");
  }

  if (j.contains("log_every")) c.log_every = as_integer(j["log_every"], "log_every");
  if (c.log_every < 1) throw ConfigError("log_every", "must be a positive integer");
  if (j.contains("output")) {
    const json& o = j["output"];
    reject_unknown(o, {"csv", "json", "svg"}, "output");
    if (o.contains("csv")) c.csv_name = as_string(o["csv"], "output.csv");
    if (o.contains("json")) c.json_name = as_string(o["json"], "output.json");
    if (o.contains("svg")) c.svg_name = as_string(o["svg"], "output.svg");
  }
  return c;
}

inline std::string canonical_config(const RunConfig& c) { return config_to_json(c).dump(); }

inline std::string fingerprint(const RunConfig& c) { return fnv1a_hex(canonical_config(c)); }

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failed");
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError(path, "write failed");
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin, std::string("malformed JSON: ") + e.what());
  }
}

inline RunConfig load_config(const std::string& path) {
  return config_from_json(parse_json_text(read_file(path), path));
}

// ---------------------------------------------------------------------------
// Trajectory logs

struct TrajectoryLog {
  std::string fingerprint;
  std::vector<StepRecord> records;
  MechanismSummary summary;
};

inline std::string csv_header() {
  std::string out;
  for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
    if (i) out += ',';
    out += kCsvColumns[i];
  }
  return out;
}

inline std::string csv_row(const StepRecord& r) {
  std::string out = std::to_string(r.k);
  auto field = [&](const std::string& s) {
    out += ',';
    out += s;
  };
  field(format_double(r.eta));
  field(format_double(r.lambda_star));
  field(format_double(r.d_norm));
  field(format_double(r.V));
  field(r.cos_phi ? format_double(*r.cos_phi) : "nan");
  field(r.conflict ? "1" : "0");
  field(format_double(r.J_team));
  field(std::string(to_string(r.regime)));
  return out;
}

inline std::string to_csv(std::span<const StepRecord> records) {
  std::string out = csv_header() + "\n";
  for (const auto& r : records) out += csv_row(r) + "\n";
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

// Reads one numeric column from a trajectory CSV. Returns (step, value)
// pairs; "nan" cells are kept as NaN.
struct CsvColumn {
  std::vector<double> steps;
  std::vector<double> values;
};

inline CsvColumn read_csv_column(const std::string& text, const std::string& column,
                                 const std::string& origin = "<csv>") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(origin, "empty CSV");
  const auto header = split_csv_line(line);
  std::size_t col = header.size(), step_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) col = i;
    if (header[i] == "step") step_col = i;
  }
  if (col == header.size()) throw ConfigError("--series", "no column named '" + column + "'");
  if (column == "regime") throw ConfigError("--series", "column 'regime' is not numeric");
  CsvColumn out;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ConfigError(origin, "row " + std::to_string(row) + " has the wrong number of cells");
    }
    try {
      out.values.push_back(parse_double(cells[col]));
      out.steps.push_back(step_col < cells.size() ? parse_double(cells[step_col])
                                                  : static_cast<double>(out.steps.size()));
    } catch (const Error& e) {
      throw ConfigError(origin, "row " + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

// Doubles are carried as JSON numbers when finite; the undefined alignment
// is null.
inline json record_to_json(const StepRecord& r) {
  return json{{"k", r.k},
              {"eta", r.eta},
              {"lambda", r.lambda_star},
              {"d_norm", r.d_norm},
              {"V", r.V},
              {"cos_phi", r.cos_phi ? json(*r.cos_phi) : json(nullptr)},
              {"conflict", r.conflict},
              {"J_team", r.J_team},
              {"regime", std::string(to_string(r.regime))}};
}

inline StepRecord record_from_json(const json& j, const std::string& path) {
  using namespace detail;
  StepRecord r;
  r.k = as_integer(require(j, "k", path), path + ".k");
  r.eta = as_number(require(j, "eta", path), path + ".eta");
  r.lambda_star = as_number(require(j, "lambda", path), path + ".lambda");
  r.d_norm = as_number(require(j, "d_norm", path), path + ".d_norm");
  r.V = as_number(require(j, "V", path), path + ".V");
  const json& c = require(j, "cos_phi", path);
  if (!c.is_null()) r.cos_phi = as_number(c, path + ".cos_phi");
  const json& f = require(j, "conflict", path);
  if (!f.is_boolean()) throw ConfigError(path + ".conflict", "expected a boolean");
  r.conflict = f.get<bool>();
  r.J_team = as_number(require(j, "J_team", path), path + ".J_team");
  const std::string reg = as_string(require(j, "regime", path), path + ".regime");
  if (reg == "active") r.regime = Regime::kActive;
  else if (reg == "inactive") r.regime = Regime::kInactive;
  else throw ConfigError(path + ".regime", "expected active or inactive");
  return r;
}

inline json optional_to_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json summary_to_json(const MechanismSummary& s) {
  return json{{"steady_state_V", s.steady_state_V},
              {"mean_alignment", optional_to_json(s.mean_alignment)},
              {"gcr", s.gcr},
              {"gap_decay_rate", optional_to_json(s.gap_decay_rate)},
              {"convergence_step",
               s.convergence_step ? json(*s.convergence_step) : json(nullptr)},
              {"window", s.window}};
}

inline MechanismSummary summary_from_json(const json& j, const std::string& path) {
  using namespace detail;
  MechanismSummary s;
  s.steady_state_V = as_number(require(j, "steady_state_V", path), path + ".steady_state_V");
  if (const json& a = require(j, "mean_alignment", path); !a.is_null()) {
    s.mean_alignment = as_number(a, path + ".mean_alignment");
  }
  s.gcr = as_number(require(j, "gcr", path), path + ".gcr");
  if (const json& g = require(j, "gap_decay_rate", path); !g.is_null()) {
    s.gap_decay_rate = as_number(g, path + ".gap_decay_rate");
  }
  if (const json& c = require(j, "convergence_step", path); !c.is_null()) {
    s.convergence_step = as_integer(c, path + ".convergence_step");
  }
  s.window = static_cast<std::size_t>(as_integer(require(j, "window", path), path + ".window"));
  return s;
}

inline json log_to_json(const TrajectoryLog& log) {
  json recs = json::array();
  for (const auto& r : log.records) recs.push_back(record_to_json(r));
  return json{{"schema_version", kSchemaVersion},
              {"fingerprint", log.fingerprint},
              {"records", std::move(recs)},
              {"summary", summary_to_json(log.summary)}};
}

inline TrajectoryLog log_from_json(const json& j) {
  using namespace detail;
  const long version = as_integer(require(j, "schema_version", "<log>"), "schema_version");
  if (version != kSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(version));
  }
  TrajectoryLog log;
  log.fingerprint = as_string(require(j, "fingerprint", "<log>"), "fingerprint");
  const json& recs = require(j, "records", "<log>");
  if (!recs.is_array()) throw ConfigError("records", "expected an array");
  for (std::size_t i = 0; i < recs.size(); ++i) {
    log.records.push_back(record_from_json(recs[i], "records[" + std::to_string(i) + "]"));
  }
  log.summary = summary_from_json(require(j, "summary", "<log>"), "summary");
  return log;
}

inline std::string log_to_json_text(const TrajectoryLog& log) {
  return log_to_json(log).dump(2) + "\n";
}

enum class LogFormat { kCsv, kJson };

inline void persist_log(const TrajectoryLog& log, LogFormat format, const std::string& path) {
  write_file(path, format == LogFormat::kCsv ? to_csv(log.records) : log_to_json_text(log));
}

inline TrajectoryLog load_log_json(const std::string& path) {
  return log_from_json(parse_json_text(read_file(path), path));
}

}  // namespace halypo::io

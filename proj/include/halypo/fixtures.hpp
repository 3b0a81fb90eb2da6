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

// Bundled game instances, addressable by name.

#pragma once

#include "halypo/games.hpp"
#include "halypo/markov.hpp"

#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace halypo::fixtures {

// Two scalar agents with conflicting cross terms:
//   Q_1 = [[−1, 2], [2, 0]],  Q_2 = [[0, −2], [−2, −1]],  Q = −I.
// M = [[−1, 2], [−2, −1]], M − Q = [[0, 2], [−2, 0]], V = 2‖θ‖², L = 4.
inline std::shared_ptr<const QuadraticGame> q_example() {
  return make_quadratic_game(AgentLayout::uniform(2, 1),
                             {Matrix{{-1.0, 2.0}, {2.0, 0.0}}, Matrix{{0.0, -2.0}, {-2.0, -1.0}}},
                             {Vector::Zero(2), Vector::Zero(2)}, -Matrix::Identity(2, 2),
                             Vector::Zero(2), "q_example");
}

// The bilinear game written as a quadratic game; must agree with
// BilinearRotationGame everywhere.
inline std::shared_ptr<const QuadraticGame> bilinear_as_quadratic() {
  const Matrix cross{{0.0, 1.0}, {1.0, 0.0}};
  return make_quadratic_game(AgentLayout::uniform(2, 1), {cross, Matrix(-cross)},
                             {Vector::Zero(2), Vector::Zero(2)}, -Matrix::Identity(2, 2),
                             Vector::Zero(2), "bilinear_quadratic");
}

// One state, one agent, two actions with rewards (1, 0), γ = 0.
inline std::shared_ptr<const TabularMarkovGame> bandit_tables() {
  return std::make_shared<const TabularMarkovGame>(1, std::vector<Index>{2}, Matrix::Ones(2, 1),
                                                   Matrix{{1.0, 0.0}}, 0.0, Vector::Ones(1),
                                                   "bandit");
}

// Two states, two agents with two actions each, γ = 0.9. Joint actions are
// ordered (0,0), (0,1), (1,0), (1,1).
//
// State 0 pays for coordinating on (0,0) and offers a risky jump to the
// richer state 1 when both agents pick action 1; in state 1 coordinating on
// (1,1) pays most and keeps the team there.
inline std::shared_ptr<const TabularMarkovGame> two_state_tables() {
  Matrix P(8, 2);
  P << 0.9, 0.1,  //
      1.0, 0.0,   //
      1.0, 0.0,   //
      0.2, 0.8,   //
      0.5, 0.5,   //
      0.7, 0.3,   //
      0.7, 0.3,   //
      0.1, 0.9;
  const Matrix R{{1.0, 0.0, 0.0, 0.5}, {0.0, 0.2, 0.2, 2.0}};
  return std::make_shared<const TabularMarkovGame>(2, std::vector<Index>{2, 2}, P, R, 0.9,
                                                   Vector{{1.0, 0.0}}, "two_state");
}

inline std::shared_ptr<const MarkovGame> bandit() {
  return std::make_shared<const MarkovGame>(bandit_tables());
}
inline std::shared_ptr<const MarkovGame> two_state() {
  return std::make_shared<const MarkovGame>(two_state_tables());
}

// A general-sum quadratic game with Gaussian symmetric Q_i and Q, Gaussian
// offsets, dimension in [2, max_dim] split into 1..3 agent blocks.
inline std::shared_ptr<const QuadraticGame> random_quadratic(std::mt19937_64& rng,
                                                             Index max_dim = 16) {
  std::uniform_int_distribution<Index> dim_dist(2, std::max<Index>(2, max_dim));
  const Index D = dim_dist(rng);
  std::uniform_int_distribution<Index> agents_dist(1, std::min<Index>(3, D));
  const Index n = agents_dist(rng);
  std::vector<Index> dims(static_cast<std::size_t>(n), D / n);
  dims.back() += D % n;
  std::normal_distribution<double> g(0.0, 1.0);
  auto sym = [&] {
    Matrix a(D, D);
    for (Index r = 0; r < D; ++r)
      for (Index c = 0; c < D; ++c) a(r, c) = g(rng);
    return Matrix(0.5 * (a + a.transpose()) / std::sqrt(static_cast<double>(D)));
  };
  auto vec = [&] {
    Vector v(D);
    for (Index j = 0; j < D; ++j) v[j] = g(rng);
    return v;
  };
  std::vector<Matrix> Qi;
  std::vector<Vector> bi;
  for (Index i = 0; i < n; ++i) {
    Qi.push_back(sym());
    bi.push_back(vec());
  }
  Matrix Q = sym();
  Vector b = vec();
  return make_quadratic_game(AgentLayout(dims), std::move(Qi), std::move(bi), std::move(Q),
                             std::move(b), "random_quadratic");
}

// Name → factory for every bundled game.
inline const std::map<std::string, std::function<std::shared_ptr<const Game>()>>& registry() {
  static const std::map<std::string, std::function<std::shared_ptr<const Game>()>> r = {
      {"bilinear", [] { return std::shared_ptr<const Game>(make_bilinear_rotation_game()); }},
      {"bilinear_quadratic", [] { return std::shared_ptr<const Game>(bilinear_as_quadratic()); }},
      {"q_example", [] { return std::shared_ptr<const Game>(q_example()); }},
      {"bandit", [] { return std::shared_ptr<const Game>(bandit()); }},
      {"two_state", [] { return std::shared_ptr<const Game>(two_state()); }},
  };
  return r;
}

inline std::vector<std::string> names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : registry()) out.push_back(name);
  return out;
}

inline std::shared_ptr<const Game> make(const std::string& name) {
  const auto& r = registry();
  auto it = r.find(name);
  if (it == r.end()) throw ConfigError("game.fixture", "unknown fixture '" + name + "'");
  return it->second();
}

inline std::shared_ptr<const TabularMarkovGame> markov_tables(const std::string& name) {
  if (name == "two_state") return two_state_tables();
  if (name == "bandit") return bandit_tables();
  throw ConfigError("game.fixture", "unknown Markov fixture '" + name + "'");
}

}  // namespace halypo::fixtures

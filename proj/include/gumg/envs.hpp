// Copyright 2026 The gumg Authors
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

#ifndef GUMG_ENVS_HPP
#define GUMG_ENVS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gumg/error.hpp"
#include "gumg/game.hpp"
#include "gumg/rng.hpp"

namespace gumg {

enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };
inline constexpr int kGridActions = 5;

enum class GridStart { kUniform, kCorner };

// n x n grid with one shared token. Each agent proposes a move; the most
// proposed move wins, ties go to the lowest-indexed agent among the tied
// moves. With probability slip the token instead moves in one of the four
// directions uniformly at random. Moves off the grid leave the token in place.
struct GridSpec {
  int side = 5;
  int n_agents = 3;
  double slip = 0.05;
  GridStart start = GridStart::kUniform;
  double discount = 0.95;
};

inline int grid_cell(int side, int row, int col) { return row * side + col; }

inline int grid_move(int side, int cell, int action) {
  int row = cell / side;
  int col = cell % side;
  switch (action) {
    case kUp: row = std::max(row - 1, 0); break;
    case kDown: row = std::min(row + 1, side - 1); break;
    case kLeft: col = std::max(col - 1, 0); break;
    case kRight: col = std::min(col + 1, side - 1); break;
    default: break;
  }
  return grid_cell(side, row, col);
}

inline int resolve_votes(const std::vector<int>& proposals) {
  std::array<int, kGridActions> votes{};
  for (int a : proposals) ++votes[a];
  const int top = *std::max_element(votes.begin(), votes.end());
  for (int a : proposals)
    if (votes[a] == top) return a;
  return kStay;
}

inline GameSpec build_grid(const GridSpec& spec) {
  require(spec.side >= 2, ErrorCode::kInvalidArgument, "grid side must be at least 2");
  require(spec.n_agents >= 1, ErrorCode::kInvalidArgument, "grid needs an agent");
  require(spec.slip >= 0.0 && spec.slip <= 1.0, ErrorCode::kInvalidArgument,
          "slip must lie in [0, 1]");
  const int n_states = spec.side * spec.side;
  JointActionCodec codec(std::vector<int>(spec.n_agents, kGridActions));
  GameDescription raw;
  raw.n_agents = spec.n_agents;
  raw.n_states = n_states;
  raw.action_counts = codec.counts();
  raw.discount = spec.discount;
  raw.transition = RowMatrix::Zero(static_cast<Eigen::Index>(n_states) * codec.size(), n_states);
  std::vector<int> proposals(spec.n_agents);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < codec.size(); ++a) {
      for (int i = 0; i < spec.n_agents; ++i) proposals[i] = codec.action_of(a, i);
      auto row = raw.transition.row(static_cast<Eigen::Index>(s) * codec.size() + a);
      row[grid_move(spec.side, s, resolve_votes(proposals))] += 1.0 - spec.slip;
      for (int d = kUp; d <= kRight; ++d) row[grid_move(spec.side, s, d)] += spec.slip / 4.0;
    }
  }
  if (spec.start == GridStart::kUniform) {
    raw.initial_dist = Eigen::VectorXd::Constant(n_states, 1.0 / n_states);
  } else {
    raw.initial_dist = Eigen::VectorXd::Unit(n_states, 0);
  }
  return validate_game(raw);
}

// Every agent heads for its goal cell (vertical first) with probability
// 1 - mix and plays uniformly otherwise. At the goal the greedy action is stay.
inline JointPolicy grid_goal_policy(int side, const std::vector<int>& goals, double mix) {
  require(mix >= 0.0 && mix <= 1.0, ErrorCode::kInvalidArgument, "mix must lie in [0, 1]");
  JointPolicy policy;
  const int n_states = side * side;
  for (int goal : goals) {
    require(goal >= 0 && goal < n_states, ErrorCode::kInvalidArgument,
            "goal cell outside the grid");
    Eigen::MatrixXd table = Eigen::MatrixXd::Constant(n_states, kGridActions, mix / kGridActions);
    for (int s = 0; s < n_states; ++s) {
      const int dr = goal / side - s / side;
      const int dc = goal % side - s % side;
      int greedy = kStay;
      if (dr < 0) greedy = kUp;
      else if (dr > 0) greedy = kDown;
      else if (dc < 0) greedy = kLeft;
      else if (dc > 0) greedy = kRight;
      table(s, greedy) += 1.0 - mix;
    }
    policy.tables.push_back(std::move(table));
  }
  return policy;
}

// Plays stay with probability stay_prob and the other actions evenly.
inline JointPolicy stay_biased_policy(const GameSpec& game, double stay_prob) {
  require(stay_prob >= 0.0 && stay_prob <= 1.0, ErrorCode::kInvalidArgument,
          "stay probability must lie in [0, 1]");
  JointPolicy policy;
  for (int i = 0; i < game.n_agents(); ++i) {
    require(game.n_actions(i) == kGridActions, ErrorCode::kDimensionMismatch,
            "stay-biased policy needs five grid actions");
    Eigen::MatrixXd table = Eigen::MatrixXd::Constant(
        game.n_states(), kGridActions, (1.0 - stay_prob) / (kGridActions - 1));
    table.col(kStay).setConstant(stay_prob);
    policy.tables.push_back(std::move(table));
  }
  return policy;
}

// Draws one point from the symmetric Dirichlet(concentration) on k entries.
inline Eigen::VectorXd sample_dirichlet(int k, double concentration, Rng& rng) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  Eigen::VectorXd x(k);
  for (;;) {
    for (int j = 0; j < k; ++j) x[j] = gamma(rng);
    const double total = x.sum();
    if (total > 0.0) return x / total;
  }
}

// Transitions drawn row-wise from a symmetric Dirichlet; mu uniform.
inline GameSpec random_game(std::uint64_t seed, int n_states,
                            const std::vector<int>& action_counts, double discount,
                            double concentration = 1.0) {
  require(n_states >= 1 && !action_counts.empty(), ErrorCode::kInvalidArgument,
          "random game sizes must be at least 1");
  for (int c : action_counts)
    require(c >= 1, ErrorCode::kInvalidArgument, "action counts must be at least 1");
  require(concentration > 0.0, ErrorCode::kInvalidArgument,
          "Dirichlet concentration must be positive");
  Rng rng(seed, {0x67616d65});
  JointActionCodec codec(action_counts);
  GameDescription raw;
  raw.n_agents = static_cast<int>(action_counts.size());
  raw.n_states = n_states;
  raw.action_counts = action_counts;
  raw.discount = discount;
  raw.initial_dist = Eigen::VectorXd::Constant(n_states, 1.0 / n_states);
  raw.transition.resize(static_cast<Eigen::Index>(n_states) * codec.size(), n_states);
  for (Eigen::Index r = 0; r < raw.transition.rows(); ++r)
    raw.transition.row(r) = sample_dirichlet(n_states, concentration, rng).transpose();
  return validate_game(raw);
}

// Fixed test corpus: seeds 1..20 with shapes cycling through |S| in {2,3,4},
// N in {1,2,3}, |A_i| in {2,3} and gamma in {0.6, 0.75, 0.9}.
struct CorpusEntry {
  std::uint64_t seed;
  int n_states;
  int n_agents;
  int n_actions;
  double discount;
};

inline constexpr int kCorpusSize = 20;

inline CorpusEntry corpus_entry(int index) {
  require(index >= 0 && index < kCorpusSize, ErrorCode::kInvalidArgument,
          "corpus index out of range");
  static constexpr double kDiscounts[] = {0.6, 0.75, 0.9};
  CorpusEntry e;
  e.seed = static_cast<std::uint64_t>(index + 1);
  e.n_states = 2 + index % 3;
  e.n_agents = index % 5 == 4 ? 1 : 2 + index % 2;
  e.n_actions = 2 + (index / 2) % 2;
  e.discount = kDiscounts[(index / 3) % 3];
  return e;
}

inline GameSpec corpus_game(int index) {
  const CorpusEntry e = corpus_entry(index);
  return random_game(e.seed, e.n_states, std::vector<int>(e.n_agents, e.n_actions),
                     e.discount);
}

// Interior policy with rows drawn from Dirichlet(concentration) and mixed
// with the uniform row so every entry is at least floor_mix / |A_i|.
inline JointPolicy random_interior_policy(const GameSpec& game, Rng& rng,
                                          double floor_mix = 0.1,
                                          double concentration = 1.0) {
  JointPolicy policy;
  for (int i = 0; i < game.n_agents(); ++i) {
    const int k = game.n_actions(i);
    Eigen::MatrixXd table(game.n_states(), k);
    for (int s = 0; s < game.n_states(); ++s) {
      table.row(s) = (1.0 - floor_mix) * sample_dirichlet(k, concentration, rng).transpose();
      table.row(s).array() += floor_mix / k;
    }
    policy.tables.push_back(std::move(table));
  }
  return policy;
}

}  // namespace gumg

#endif  // GUMG_ENVS_HPP

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

#ifndef GUMG_OCCUPANCY_HPP
#define GUMG_OCCUPANCY_HPP

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gumg/error.hpp"
#include "gumg/game.hpp"
#include "gumg/trajectory.hpp"

namespace gumg {

enum class OccupancyKind { kExact, kEstimated };

// State occupancy d and per-agent marginals lambda_i(s, a_i) = d(s) pi_i(a_i|s).
struct OccupancySet {
  Eigen::VectorXd state_occ;
  std::vector<Eigen::MatrixXd> marginals;
  OccupancyKind kind = OccupancyKind::kExact;
  int batch_size = 0;  // M, estimated only
  int horizon = 0;     // H, estimated only
};

// P_pi(s' | s) = sum_a pi(a|s) P(s'|s,a). No normalization is applied to the
// policy rows, so the map stays polynomial in the table entries.
inline Eigen::MatrixXd state_transition(const GameSpec& game,
                                        const JointPolicy& policy) {
  const int n = game.n_states();
  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < game.n_joint(); ++a) {
      const double p = policy.joint_prob(game.codec(), s, a);
      if (p != 0.0) p_pi.row(s) += p * game.transition_row(s, a);
    }
  }
  return p_pi;
}

namespace detail {

inline Eigen::VectorXd solve_checked(const Eigen::MatrixXd& lhs,
                                     const Eigen::VectorXd& rhs) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
  Eigen::VectorXd x = lu.solve(rhs);
  require(x.allFinite() && lu.rcond() > 1e-14, ErrorCode::kSingularSystem,
          "occupancy system is singular");
  return x;
}

}  // namespace detail

// Solves d = (1 - gamma) mu + gamma P_pi^T d.
inline Eigen::VectorXd exact_state_occupancy(const GameSpec& game,
                                             const JointPolicy& policy) {
  const int n = game.n_states();
  const double g = game.discount();
  const Eigen::MatrixXd lhs =
      Eigen::MatrixXd::Identity(n, n) - g * state_transition(game, policy).transpose();
  return detail::solve_checked(lhs, (1.0 - g) * game.initial_dist());
}

// lambda_j(s, a_j) = sum_{a_-j} d(s) pi(a|s). The other agents' row sums are
// kept (they are 1 on the simplex) so the marginals agree with the joint
// occupancy for unnormalized tables too.
inline std::vector<Eigen::MatrixXd> marginals_from_state(
    const Eigen::VectorXd& state_occ, const JointPolicy& policy) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(policy.n_agents());
  for (int j = 0; j < policy.n_agents(); ++j) {
    Eigen::VectorXd weight = state_occ;
    for (int k = 0; k < policy.n_agents(); ++k)
      if (k != j) weight.array() *= policy[k].rowwise().sum().array();
    out.push_back(weight.asDiagonal() * policy[j]);
  }
  return out;
}

inline OccupancySet exact_marginals(const GameSpec& game,
                                    const JointPolicy& policy) {
  OccupancySet occ;
  occ.state_occ = exact_state_occupancy(game, policy);
  occ.marginals = marginals_from_state(occ.state_occ, policy);
  occ.kind = OccupancyKind::kExact;
  return occ;
}

// d_hat(s) = (1 - gamma) / M sum_k sum_{t<H} gamma^t 1{s_t^(k) = s}.
inline Eigen::VectorXd estimate_state_occupancy(
    std::span<const Trajectory> trajectories, const GameSpec& game) {
  require(!trajectories.empty(), ErrorCode::kEmptyBatch, "no trajectories");
  const int horizon = trajectories.front().horizon();
  const double g = game.discount();
  Eigen::VectorXd d = Eigen::VectorXd::Zero(game.n_states());
  for (const auto& traj : trajectories) {
    require(traj.horizon() == horizon, ErrorCode::kDimensionMismatch,
            "trajectories have different horizons");
    double weight = 1.0;
    for (const auto& step : traj.steps) {
      d[step.state] += weight;
      weight *= g;
    }
  }
  return d * ((1.0 - g) / static_cast<double>(trajectories.size()));
}

inline OccupancySet estimate_occupancy(std::span<const Trajectory> trajectories,
                                       const GameSpec& game,
                                       const JointPolicy& policy) {
  OccupancySet occ;
  occ.state_occ = estimate_state_occupancy(trajectories, game);
  occ.marginals = marginals_from_state(occ.state_occ, policy);
  occ.kind = OccupancyKind::kEstimated;
  occ.batch_size = static_cast<int>(trajectories.size());
  occ.horizon = trajectories.front().horizon();
  return occ;
}

// Q over (state, joint action) for a reward that is a sum of per-agent terms
// r_j(s, a_j); V(s) = sum_a pi(a|s) Q(s, a).
struct QTable {
  Eigen::MatrixXd q;  // |S| x |A|
  Eigen::VectorXd v;

  // Qbar_i(s, a_i) = sum_{a_-i} pi_{-i}(a_-i | s) Q(s, a_i, a_-i), iterating
  // the joint space without storing the product policy.
  Eigen::MatrixXd averaged(const GameSpec& game, const JointPolicy& policy,
                           int agent) const {
    const auto& codec = game.codec();
    Eigen::MatrixXd bar = Eigen::MatrixXd::Zero(game.n_states(), game.n_actions(agent));
    for (int s = 0; s < game.n_states(); ++s) {
      for (int a = 0; a < game.n_joint(); ++a) {
        bar(s, codec.action_of(a, agent)) +=
            policy.others_prob(codec, s, a, agent) * q(s, a);
      }
    }
    return bar;
  }
};

// rewards[j] is |S| x |A_j| or empty (zero contribution).
inline QTable exact_q_values(const GameSpec& game, const JointPolicy& policy,
                             const std::vector<Eigen::MatrixXd>& rewards) {
  require(static_cast<int>(rewards.size()) == game.n_agents(),
          ErrorCode::kDimensionMismatch, "one reward slot per agent expected");
  for (int j = 0; j < game.n_agents(); ++j) {
    if (rewards[j].size() == 0) continue;
    require(rewards[j].rows() == game.n_states() &&
                rewards[j].cols() == game.n_actions(j),
            ErrorCode::kDimensionMismatch,
            "reward for agent " + std::to_string(j) + " has wrong shape");
  }
  const int n = game.n_states();
  const auto& codec = game.codec();
  const double g = game.discount();

  Eigen::MatrixXd r_joint = Eigen::MatrixXd::Zero(n, game.n_joint());
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < game.n_joint(); ++a) {
      double r = 0.0;
      for (int j = 0; j < game.n_agents(); ++j)
        if (rewards[j].size() != 0) r += rewards[j](s, codec.action_of(a, j));
      r_joint(s, a) = r;
    }
  }
  Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(n);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < game.n_joint(); ++a)
      r_pi[s] += policy.joint_prob(codec, s, a) * r_joint(s, a);

  const Eigen::MatrixXd lhs =
      Eigen::MatrixXd::Identity(n, n) - g * state_transition(game, policy);
  QTable table;
  table.v = detail::solve_checked(lhs, r_pi);
  table.q.resize(n, game.n_joint());
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < game.n_joint(); ++a)
      table.q(s, a) = r_joint(s, a) + g * game.transition_row(s, a).dot(table.v);
  }
  return table;
}

// Reward r over (s, a_j) for a single agent j.
inline QTable exact_q_values(const GameSpec& game, const JointPolicy& policy,
                             int agent, const Eigen::MatrixXd& reward) {
  require(agent >= 0 && agent < game.n_agents(), ErrorCode::kDimensionMismatch,
          "agent index out of range");
  require(reward.rows() == game.n_states() && reward.cols() == game.n_actions(agent),
          ErrorCode::kDimensionMismatch, "reward has wrong shape");
  std::vector<Eigen::MatrixXd> rewards(game.n_agents());
  rewards[agent] = reward;
  return exact_q_values(game, policy, rewards);
}

}  // namespace gumg

#endif  // GUMG_OCCUPANCY_HPP

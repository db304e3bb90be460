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

#ifndef GUMG_TRAJECTORY_HPP
#define GUMG_TRAJECTORY_HPP

#include <vector>

#include "gumg/error.hpp"
#include "gumg/game.hpp"
#include "gumg/rng.hpp"

namespace gumg {

enum class StartMode {
  kInitialDist,
  kFixedStateAgentAction,
  kFixedStateJointAction,
};

struct Start {
  StartMode mode = StartMode::kInitialDist;
  int state = 0;
  int agent = 0;
  int action = 0;  // agent's own action, or the joint index for joint starts

  static Start initial() { return {}; }
  static Start agent_action(int state, int agent, int action) {
    return {StartMode::kFixedStateAgentAction, state, agent, action};
  }
  static Start joint_action(int state, int joint) {
    return {StartMode::kFixedStateJointAction, state, 0, joint};
  }
};

struct Step {
  int state = 0;
  int joint = 0;
};

struct Trajectory {
  std::vector<Step> steps;
  StartMode start_mode = StartMode::kInitialDist;

  int horizon() const { return static_cast<int>(steps.size()); }
};

namespace detail {

inline int draw_state(const GameSpec& game, int state, int joint, Rng& rng) {
  const auto row = game.transition_row(state, joint);
  return rng.categorical(game.n_states(), [&](int k) { return row[k]; });
}

inline int draw_joint(const GameSpec& game, const JointPolicy& policy,
                      int state, Rng& rng, int fixed_agent = -1,
                      int fixed_action = 0) {
  const auto& codec = game.codec();
  int joint = 0;
  for (int i = 0; i < game.n_agents(); ++i) {
    const int a =
        i == fixed_agent
            ? fixed_action
            : rng.categorical(game.n_actions(i),
                              [&](int k) { return policy[i](state, k); });
    joint = codec.with_action(joint, i, a);
  }
  return joint;
}

}  // namespace detail

// Length-H rollout. For agent-action starts the other agents' first actions
// come from pi_{-i}(. | s); every later action is on-policy.
inline Trajectory sample_trajectory(const GameSpec& game,
                                    const JointPolicy& policy, int horizon,
                                    const Start& start, Rng& rng) {
  require(horizon >= 1, ErrorCode::kInvalidArgument, "horizon must be >= 1");
  Trajectory traj;
  traj.start_mode = start.mode;
  traj.steps.reserve(horizon);

  int state = 0;
  int joint = 0;
  switch (start.mode) {
    case StartMode::kInitialDist: {
      const auto& mu = game.initial_dist();
      state = rng.categorical(game.n_states(), [&](int k) { return mu[k]; });
      joint = detail::draw_joint(game, policy, state, rng);
      break;
    }
    case StartMode::kFixedStateAgentAction:
      state = start.state;
      joint = detail::draw_joint(game, policy, state, rng, start.agent,
                                 start.action);
      break;
    case StartMode::kFixedStateJointAction:
      state = start.state;
      joint = start.action;
      break;
  }
  traj.steps.push_back({state, joint});
  for (int t = 1; t < horizon; ++t) {
    state = detail::draw_state(game, state, joint, rng);
    joint = detail::draw_joint(game, policy, state, rng);
    traj.steps.push_back({state, joint});
  }
  return traj;
}

inline std::vector<Trajectory> sample_batch(const GameSpec& game,
                                            const JointPolicy& policy,
                                            int count, int horizon,
                                            const Start& start, Rng& rng) {
  std::vector<Trajectory> batch;
  batch.reserve(count);
  for (int k = 0; k < count; ++k)
    batch.push_back(sample_trajectory(game, policy, horizon, start, rng));
  return batch;
}

}  // namespace gumg

#endif  // GUMG_TRAJECTORY_HPP

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

#ifndef GUMG_GRADIENTS_HPP
#define GUMG_GRADIENTS_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gumg/error.hpp"
#include "gumg/game.hpp"
#include "gumg/mailbox.hpp"
#include "gumg/occupancy.hpp"
#include "gumg/rng.hpp"
#include "gumg/trajectory.hpp"
#include "gumg/utilities.hpp"

namespace gumg {

// All gradients here are partial derivatives of u_i = F_i(lambda(pi), pi_-i)
// with respect to the entries pi_i(a_i | s) of the direct parameterization,
// with lambda normalized to total mass one.
enum class GradientSource { kExact, kOnPolicy, kGenerative, kFiniteDifference };

struct PolicyGradient {
  Eigen::MatrixXd table;  // |S| x |A_i|
  GradientSource source = GradientSource::kExact;
  int batch_size = 0;
  int horizon = 0;
};

// r_ij = D_{lambda_j} F_i for every j that F_i depends on; empty otherwise.
inline std::vector<Eigen::MatrixXd> pseudo_rewards(
    const UtilitySpec& spec, std::span<const Eigen::MatrixXd> occ) {
  std::vector<Eigen::MatrixXd> rewards(occ.size());
  for (int j = 0; j < static_cast<int>(occ.size()); ++j)
    if (spec.depends_on(j)) rewards[j] = grad_utility(spec, j, occ);
  return rewards;
}

inline double agent_utility(const GameSpec& game,
                            std::span<const UtilitySpec> utilities,
                            const JointPolicy& policy, int agent) {
  const auto occ = exact_marginals(game, policy);
  return eval_utility(utilities[agent], occ.marginals, &policy);
}

// du_i / dpi_i(a_i|s) = d(s) sum_j Qbar_{s,a_i}(r_ij). Q is linear in the
// reward, so the pseudo-rewards are summed before one policy evaluation.
inline PolicyGradient exact_gradient(const GameSpec& game,
                                     std::span<const UtilitySpec> utilities,
                                     const JointPolicy& policy, int agent) {
  require(static_cast<int>(utilities.size()) == game.n_agents(),
          ErrorCode::kDimensionMismatch, "one utility per agent expected");
  const auto occ = exact_marginals(game, policy);
  const auto rewards = pseudo_rewards(utilities[agent], occ.marginals);
  const auto q = exact_q_values(game, policy, rewards);
  PolicyGradient g;
  g.table = occ.state_occ.asDiagonal() * q.averaged(game, policy, agent);
  g.source = GradientSource::kExact;
  return g;
}

// Central differences of the composite map pi_i -> F_i(lambda(pi), pi_-i).
// Entries are perturbed without renormalizing rows: the occupancy map is
// rational in the table entries and defined in an open neighborhood of the
// simplex, so this recovers the same partial derivatives as exact_gradient up
// to O(step^2).
inline PolicyGradient finite_difference_gradient(
    const GameSpec& game, std::span<const UtilitySpec> utilities,
    const JointPolicy& policy, int agent, double step) {
  require(step >= 1e-8 && step <= 1e-3, ErrorCode::kInvalidArgument,
          "finite-difference step must lie in [1e-8, 1e-3]");
  PolicyGradient g;
  g.source = GradientSource::kFiniteDifference;
  g.table.resize(game.n_states(), game.n_actions(agent));
  JointPolicy probe = policy;
  for (int s = 0; s < game.n_states(); ++s) {
    for (int a = 0; a < game.n_actions(agent); ++a) {
      const double base = policy[agent](s, a);
      probe[agent](s, a) = base + step;
      const double up = agent_utility(game, utilities, probe, agent);
      probe[agent](s, a) = base - step;
      const double down = agent_utility(game, utilities, probe, agent);
      probe[agent](s, a) = base;
      g.table(s, a) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

// Score-function estimate from given trajectories and pseudo-rewards:
//
//   (1 - gamma) / M sum_k sum_{t<H} gamma^t R_i(s_t, a_t) psi_t,
//   psi_t = sum_{t' <= t} e_{(s_t', a_{i,t'})} / pi_i(a_{i,t'} | s_t'),
//
// with R_i(s, a) = sum_j r_ij(s, a_j). The (1 - gamma) factor matches the
// normalized-occupancy convention of exact_gradient.
inline Eigen::MatrixXd onpolicy_estimate(const GameSpec& game,
                                         const JointPolicy& policy, int agent,
                                         std::span<const Trajectory> batch,
                                         const std::vector<Eigen::MatrixXd>& rewards) {
  require(!batch.empty(), ErrorCode::kEmptyBatch, "no trajectories");
  const auto& codec = game.codec();
  const double g = game.discount();
  Eigen::MatrixXd est = Eigen::MatrixXd::Zero(game.n_states(), game.n_actions(agent));
  std::vector<double> tail;
  for (const auto& traj : batch) {
    const int h = traj.horizon();
    tail.assign(h + 1, 0.0);
    double weight = 1.0;
    std::vector<double> discounted(h);
    for (int t = 0; t < h; ++t) {
      const auto& step = traj.steps[t];
      double r = 0.0;
      for (int j = 0; j < game.n_agents(); ++j)
        if (rewards[j].size() != 0) r += rewards[j](step.state, codec.action_of(step.joint, j));
      discounted[t] = weight * r;
      weight *= g;
    }
    for (int t = h - 1; t >= 0; --t) tail[t] = tail[t + 1] + discounted[t];
    for (int t = 0; t < h; ++t) {
      const auto& step = traj.steps[t];
      const int a = codec.action_of(step.joint, agent);
      const double p = policy[agent](step.state, a);
      require(p > 0.0, ErrorCode::kZeroProbabilityAction,
              "sampled action " + std::to_string(a) + " of agent " +
                  std::to_string(agent) + " has zero probability in state " +
                  std::to_string(step.state));
      est(step.state, a) += tail[t] / p;
    }
  }
  return est * ((1.0 - g) / static_cast<double>(batch.size()));
}

namespace detail {

// Own estimate plus whatever of the mailbox the utility needs.
inline std::vector<Eigen::MatrixXd> gather_occupancies(const UtilitySpec& spec,
                                                       int n_agents,
                                                       Eigen::MatrixXd own,
                                                       const Mailbox& mailbox) {
  std::vector<Eigen::MatrixXd> occ(n_agents);
  const int i = spec.agent;
  if (spec.couples_agents()) {
    for (int j = 0; j < n_agents; ++j)
      if (j != i && spec.depends_on(j)) occ[j] = mailbox.read_occupancy(j);
  }
  occ[i] = std::move(own);
  return occ;
}

}  // namespace detail

// On-policy gradient from the agent's own batch, which also supplies its
// occupancy estimate; other agents' estimates come from the mailbox.
inline PolicyGradient onpolicy_gradient_from_batch(
    const GameSpec& game, std::span<const UtilitySpec> utilities,
    const JointPolicy& policy, int agent, std::span<const Trajectory> batch,
    const Mailbox& mailbox) {
  const auto own = estimate_occupancy(batch, game, policy);
  const auto occ = detail::gather_occupancies(utilities[agent], game.n_agents(),
                                              own.marginals[agent], mailbox);
  PolicyGradient g;
  g.table = onpolicy_estimate(game, policy, agent, batch,
                              pseudo_rewards(utilities[agent], occ));
  g.source = GradientSource::kOnPolicy;
  g.batch_size = static_cast<int>(batch.size());
  g.horizon = batch.front().horizon();
  return g;
}

// Samples M mu-started trajectories, publishes the agent's own occupancy
// estimate, then estimates the gradient. The mailbox must already hold the
// other agents' estimates for this round.
inline PolicyGradient onpolicy_gradient(const GameSpec& game,
                                        std::span<const UtilitySpec> utilities,
                                        const JointPolicy& policy, int agent,
                                        int batch_size, int horizon, Rng& rng,
                                        Mailbox& mailbox) {
  require(batch_size >= 1 && horizon >= 1, ErrorCode::kInvalidArgument,
          "M and H must be positive");
  const auto batch =
      sample_batch(game, policy, batch_size, horizon, Start::initial(), rng);
  const auto own = estimate_occupancy(batch, game, policy);
  mailbox.publish(agent, own.marginals[agent], policy[agent]);
  return onpolicy_gradient_from_batch(game, utilities, policy, agent, batch, mailbox);
}

// Generative-model estimate given a shared mu-started occupancy estimate:
// q_hat(s, a_i) averages M rollouts started at (s, a_i) and the entry is
// d_hat(s) * q_hat(s, a_i). Cell streams are derived from cell_seed so the
// result does not depend on evaluation order.
inline PolicyGradient generative_gradient_given(
    const GameSpec& game, std::span<const UtilitySpec> utilities,
    const JointPolicy& policy, int agent, int batch_size, int horizon,
    const OccupancySet& shared, std::uint64_t cell_seed) {
  require(batch_size >= 1 && horizon >= 1, ErrorCode::kInvalidArgument,
          "M and H must be positive");
  const auto rewards = pseudo_rewards(utilities[agent], shared.marginals);
  const auto& codec = game.codec();
  const double g = game.discount();
  PolicyGradient out;
  out.source = GradientSource::kGenerative;
  out.batch_size = batch_size;
  out.horizon = horizon;
  out.table.resize(game.n_states(), game.n_actions(agent));
  for (int s = 0; s < game.n_states(); ++s) {
    for (int a = 0; a < game.n_actions(agent); ++a) {
      Rng cell(cell_seed, {static_cast<std::uint64_t>(agent),
                           static_cast<std::uint64_t>(s),
                           static_cast<std::uint64_t>(a)});
      double total = 0.0;
      for (int k = 0; k < batch_size; ++k) {
        const auto traj = sample_trajectory(game, policy, horizon,
                                            Start::agent_action(s, agent, a), cell);
        double weight = 1.0;
        for (const auto& step : traj.steps) {
          double r = 0.0;
          for (int j = 0; j < game.n_agents(); ++j)
            if (rewards[j].size() != 0)
              r += rewards[j](step.state, codec.action_of(step.joint, j));
          total += weight * r;
          weight *= g;
        }
      }
      out.table(s, a) = shared.state_occ[s] * total / batch_size;
    }
  }
  return out;
}

inline PolicyGradient generative_gradient(const GameSpec& game,
                                          std::span<const UtilitySpec> utilities,
                                          const JointPolicy& policy, int agent,
                                          int batch_size, int horizon, Rng& rng) {
  Rng occ_rng(rng.split());
  const std::uint64_t cell_seed = rng.split();
  const auto batch =
      sample_batch(game, policy, batch_size, horizon, Start::initial(), occ_rng);
  const auto shared = estimate_occupancy(batch, game, policy);
  return generative_gradient_given(game, utilities, policy, agent, batch_size,
                                   horizon, shared, cell_seed);
}

}  // namespace gumg

#endif  // GUMG_GRADIENTS_HPP

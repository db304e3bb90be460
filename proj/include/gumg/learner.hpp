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

#ifndef GUMG_LEARNER_HPP
#define GUMG_LEARNER_HPP

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "gumg/diagnostics.hpp"
#include "gumg/error.hpp"
#include "gumg/game.hpp"
#include "gumg/gradients.hpp"
#include "gumg/mailbox.hpp"
#include "gumg/occupancy.hpp"
#include "gumg/projection.hpp"
#include "gumg/rng.hpp"
#include "gumg/trajectory.hpp"
#include "gumg/utilities.hpp"

namespace gumg {

enum class LearnerMode { kExact, kOnPolicy, kGenerative };

inline std::string_view to_string(LearnerMode m) {
  switch (m) {
    case LearnerMode::kExact: return "exact";
    case LearnerMode::kOnPolicy: return "onpolicy";
    case LearnerMode::kGenerative: return "generative";
  }
  return "?";
}

inline std::optional<LearnerMode> learner_mode_from_string(std::string_view s) {
  if (s == "exact") return LearnerMode::kExact;
  if (s == "onpolicy") return LearnerMode::kOnPolicy;
  if (s == "generative") return LearnerMode::kGenerative;
  return std::nullopt;
}

// How the gradient estimate enters the step. kOccupancy steps along the
// derivative of F at the normalized occupancy; kReturn divides it by
// (1 - gamma), the scale of the unnormalized discounted return.
enum class GradientScale { kReturn, kOccupancy };

inline std::string_view to_string(GradientScale g) {
  return g == GradientScale::kReturn ? "return" : "occupancy";
}

inline std::optional<GradientScale> gradient_scale_from_string(std::string_view s) {
  if (s == "return") return GradientScale::kReturn;
  if (s == "occupancy") return GradientScale::kOccupancy;
  return std::nullopt;
}

struct LearnerConfig {
  LearnerMode mode = LearnerMode::kExact;
  double eta = 0.01;
  int iterations = 200;
  int batch_size = 512;
  int horizon = 20;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  int eval_every = 1;
  GradientScale scale = GradientScale::kReturn;
  bool common_interest = false;
  bool eval_ne_gap = true;
  bool eval_occupancy_gaps = true;
  InnerSolverConfig inner;
  int threads = 1;
  std::function<void(const std::string&)> on_warning;

  double step_multiplier(double discount) const {
    return scale == GradientScale::kReturn ? eta / (1.0 - discount) : eta;
  }
};

inline void validate_config(const LearnerConfig& c) {
  require(c.eta > 0.0, ErrorCode::kConfig, "eta must be positive");
  require(c.iterations >= 0, ErrorCode::kConfig, "T must be non-negative");
  require(c.alpha >= 0.0 && c.alpha < 1.0, ErrorCode::kConfig, "alpha must lie in [0, 1)");
  require(c.eval_every >= 1, ErrorCode::kConfig, "eval_every must be at least 1");
  require(c.threads >= 1, ErrorCode::kConfig, "threads must be at least 1");
  if (c.mode != LearnerMode::kExact) {
    require(c.batch_size >= 1, ErrorCode::kConfig, "M must be positive");
    require(c.horizon >= 1, ErrorCode::kConfig, "H must be positive");
  }
  require(c.mode != LearnerMode::kOnPolicy || c.alpha > 0.0, ErrorCode::kConfig,
          "on-policy mode needs alpha > 0");
}

struct TraceRow {
  int iter = 0;
  double potential = 0.0;
  std::vector<double> utilities;
  std::optional<double> ne_gap;
  bool ne_gap_converged = true;
  double grad_map_norm = 0.0;
  std::optional<double> occ_gap;
  std::optional<double> kl_occ_gap;
  long long samples = 0;
  double wall_seconds = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  JointPolicy final_policy;
  std::vector<std::string> warnings;
  double beta = 0.0;
};

// State-action samples drawn per iteration.
inline long long samples_per_iteration(const GameSpec& game, const LearnerConfig& c) {
  const long long mh = static_cast<long long>(c.batch_size) * c.horizon;
  switch (c.mode) {
    case LearnerMode::kExact: return 0;
    case LearnerMode::kOnPolicy: return game.n_agents() * mh;
    case LearnerMode::kGenerative: {
      long long cells = 1;
      for (int i = 0; i < game.n_agents(); ++i)
        cells += static_cast<long long>(game.n_states()) * game.n_actions(i);
      return cells * mh;
    }
  }
  return 0;
}

// Per-iteration streams: (t, agent, 0) for an agent's own batch, (t, N, 0) for
// the shared generative batch, (t, N, 1) for generative cell rollouts.
inline Rng agent_stream(const LearnerConfig& c, int iter, int agent, int slot = 0) {
  return Rng(c.seed, {static_cast<std::uint64_t>(iter), static_cast<std::uint64_t>(agent),
                      static_cast<std::uint64_t>(slot)});
}

struct AgentSample {
  std::vector<Trajectory> batch;
  OccupancySet occupancy;
};

// Samples the agent's batch and broadcasts its occupancy estimate and policy.
inline AgentSample broadcast(const GameSpec& game, const JointPolicy& policy, int agent,
                             const LearnerConfig& c, Rng& rng, Mailbox& mailbox) {
  AgentSample out;
  out.batch = sample_batch(game, policy, c.batch_size, c.horizon, Start::initial(), rng);
  out.occupancy = estimate_occupancy(out.batch, game, policy);
  mailbox.publish(agent, out.occupancy.marginals[agent], policy[agent]);
  return out;
}

// One projected step for agent i. The mailbox must hold every agent's
// broadcast for this round. On-policy mode uses sample when given and
// otherwise redraws the agent's batch from rng. Generative mode reads the
// shared state occupancy from sample and derives cell streams from rng.
inline Eigen::MatrixXd step_agent(const GameSpec& game,
                                  std::span<const UtilitySpec> utilities,
                                  const JointPolicy& policy, int agent,
                                  const LearnerConfig& c, const Mailbox& mailbox,
                                  Rng& rng, const AgentSample* sample = nullptr) {
  Eigen::MatrixXd grad;
  switch (c.mode) {
    case LearnerMode::kExact:
      grad = exact_gradient(game, utilities, policy, agent).table;
      break;
    case LearnerMode::kOnPolicy: {
      std::vector<Trajectory> own;
      if (sample == nullptr)
        own = sample_batch(game, policy, c.batch_size, c.horizon, Start::initial(), rng);
      const auto& batch = sample != nullptr ? sample->batch : own;
      grad = onpolicy_gradient_from_batch(game, utilities, policy, agent, batch, mailbox).table;
      break;
    }
    case LearnerMode::kGenerative: {
      require(sample != nullptr, ErrorCode::kInvalidArgument,
              "generative step needs the shared occupancy estimate");
      OccupancySet view = sample->occupancy;
      view.marginals = detail::gather_occupancies(
          utilities[agent], game.n_agents(), sample->occupancy.marginals[agent], mailbox);
      grad = generative_gradient_given(game, utilities, policy, agent, c.batch_size,
                                       c.horizon, view, rng.split())
                 .table;
      break;
    }
  }
  return project_table(policy[agent] + c.step_multiplier(game.discount()) * grad,
                       GreedyFloor{c.alpha});
}

namespace detail {

template <typename Fn>
void for_each_agent(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n);
  const int workers = std::min(threads, n);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

// Diagnostic row at policy; always computed from exact quantities.
inline TraceRow evaluate(const GameSpec& game, std::span<const UtilitySpec> utilities,
                         const JointPolicy& policy, const LearnerConfig& c, int iter) {
  TraceRow row;
  row.iter = iter;
  const auto occ = exact_marginals(game, policy);
  for (const auto& u : utilities) row.utilities.push_back(eval_utility(u, occ.marginals, &policy));
  if (c.common_interest) {
    row.potential = row.utilities[0];
  } else {
    double total = 0.0;
    for (double v : row.utilities) total += v;
    row.potential = total / static_cast<double>(row.utilities.size());
  }
  auto field = pseudo_gradient_field(game, utilities, policy);
  const double mult = c.step_multiplier(game.discount()) / c.eta;
  for (auto& f : field) f *= mult;
  row.grad_map_norm = stationarity_from_field(policy, field, c.eta, c.alpha).grad_map_norm;
  if (c.eval_ne_gap) {
    const auto gap = ne_gap(game, utilities, policy, c.inner);
    row.ne_gap = gap.max_gap;
    row.ne_gap_converged = gap.all_converged;
  }
  if (c.eval_occupancy_gaps && supports_occupancy_gaps(utilities[0].kind)) {
    bool same = true;
    for (const auto& u : utilities) same = same && u.kind == utilities[0].kind;
    if (same) {
      const auto gaps = occupancy_gaps(utilities, occ.marginals);
      row.occ_gap = gaps.occ_gap;
      row.kl_occ_gap = gaps.kl_occ_gap;
    }
  }
  row.samples = samples_per_iteration(game, c) * iter;
  return row;
}

// Simultaneous projected pseudo-gradient ascent. Every agent's step in
// iteration t reads pi^t and the round-t mailbox only.
inline RunTrace run(const GameSpec& game, std::span<const UtilitySpec> utilities,
                    const LearnerConfig& c, std::optional<JointPolicy> init = std::nullopt) {
  validate_config(c);
  require(static_cast<int>(utilities.size()) == game.n_agents(), ErrorCode::kDimensionMismatch,
          "need one utility per agent");
  for (const auto& u : utilities) validate_utility(u, game);
  JointPolicy policy = init ? std::move(*init) : JointPolicy::uniform(game);
  check_policy(game, policy);

  RunTrace trace;
  const auto bounds = constant_bounds(game, utilities);
  trace.beta = bounds.beta;
  if (c.eta > 1.0 / bounds.beta) {
    const std::string msg = "stepsize eta = " + std::to_string(c.eta) +
                            " exceeds 1/beta = " + std::to_string(1.0 / bounds.beta);
    trace.warnings.push_back(msg);
    if (c.on_warning) c.on_warning(msg);
  }

  const auto start = std::chrono::steady_clock::now();
  auto stamp = [&](TraceRow row) {
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    trace.rows.push_back(std::move(row));
  };
  stamp(evaluate(game, utilities, policy, c, 0));

  const int n = game.n_agents();
  Mailbox mailbox(n);
  for (int t = 0; t < c.iterations; ++t) {
    mailbox.clear();
    std::vector<AgentSample> samples(c.mode == LearnerMode::kExact ? 0 : n);
    if (c.mode == LearnerMode::kOnPolicy) {
      detail::for_each_agent(n, c.threads, [&](int i) {
        Rng rng = agent_stream(c, t, i);
        samples[i] = broadcast(game, policy, i, c, rng, mailbox);
      });
    } else if (c.mode == LearnerMode::kGenerative) {
      Rng rng = agent_stream(c, t, n);
      AgentSample shared;
      shared.batch = sample_batch(game, policy, c.batch_size, c.horizon, Start::initial(), rng);
      shared.occupancy = estimate_occupancy(shared.batch, game, policy);
      shared.batch.clear();
      for (int i = 0; i < n; ++i) {
        mailbox.publish(i, shared.occupancy.marginals[i], policy[i]);
        samples[i].occupancy = shared.occupancy;
      }
    }
    std::vector<Eigen::MatrixXd> next(n);
    detail::for_each_agent(n, c.threads, [&](int i) {
      Rng rng = agent_stream(c, t, i, 1);
      next[i] = step_agent(game, utilities, policy, i, c, mailbox, rng,
                           samples.empty() ? nullptr : &samples[i]);
    });
    policy.tables = std::move(next);
    if ((t + 1) % c.eval_every == 0 || t + 1 == c.iterations)
      stamp(evaluate(game, utilities, policy, c, t + 1));
  }
  trace.final_policy = std::move(policy);
  return trace;
}

}  // namespace gumg

#endif  // GUMG_LEARNER_HPP

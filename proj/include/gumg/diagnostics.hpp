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

#ifndef GUMG_DIAGNOSTICS_HPP
#define GUMG_DIAGNOSTICS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gumg/error.hpp"
#include "gumg/game.hpp"
#include "gumg/gradients.hpp"
#include "gumg/occupancy.hpp"
#include "gumg/projection.hpp"
#include "gumg/utilities.hpp"

namespace gumg {

namespace detail {

// Removes each row's mean. Simplex projections and the surplus ignore
// per-row constants, and dropping them keeps rounding in the simplex sum from
// dominating the sufficient-increase test.
inline Eigen::MatrixXd tangent(Eigen::MatrixXd g) {
  g.colwise() -= g.rowwise().mean();
  return g;
}

}  // namespace detail

// max_{pi'_i} <g, pi'_i - pi_i>; the maximum over each simplex row is attained
// at the vertex of the largest entry.
inline double fos_surplus(const Eigen::MatrixXd& table, const Eigen::MatrixXd& grad) {
  double surplus = 0.0;
  for (Eigen::Index s = 0; s < table.rows(); ++s)
    surplus += grad.row(s).maxCoeff() - table.row(s).dot(grad.row(s));
  return surplus;
}

// Inner best-response solver: projected gradient ascent over Pi_i with
// pi_{-i} frozen. Trial steps follow the Barzilai-Borwein length of the last
// move and are halved until a sufficient-increase test passes; the configured
// stepsize seeds the first trial.
struct InnerSolverConfig {
  double stepsize = 0.05;
  int max_iter = 5000;
  double tol = 1e-6;
  bool uniform_restart = true;  // also start from the uniform row
};

struct BestResponse {
  Eigen::MatrixXd policy;
  double value = 0.0;
  double surplus = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline BestResponse best_response_from(const GameSpec& game,
                                       std::span<const UtilitySpec> utilities,
                                       const JointPolicy& policy, int agent,
                                       Eigen::MatrixXd start,
                                       const InnerSolverConfig& inner) {
  constexpr double kSufficientIncrease = 1e-4;
  constexpr double kMinStep = 1e-14;
  const double max_step = inner.stepsize * 1e8;
  JointPolicy x = policy;
  x[agent] = std::move(start);
  double value = agent_utility(game, utilities, x, agent);
  Eigen::MatrixXd g = detail::tangent(exact_gradient(game, utilities, x, agent).table);
  double step = inner.stepsize;
  BestResponse out;
  for (int k = 0;; ++k) {
    out.surplus = fos_surplus(x[agent], g);
    out.iterations = k;
    if (out.surplus <= inner.tol) {
      out.converged = true;
      break;
    }
    if (k >= inner.max_iter) break;
    bool accepted = false;
    double trial_step = step;
    while (trial_step > kMinStep) {
      JointPolicy trial = x;
      trial[agent] = project_table(x[agent] + trial_step * g, GreedyFloor{0.0});
      const Eigen::MatrixXd move = trial[agent] - x[agent];
      const double predicted = (g.array() * move.array()).sum();
      const double trial_value = agent_utility(game, utilities, trial, agent);
      const double noise = 1e-14 * std::max(1.0, std::abs(value));
      if (trial_value >= value + kSufficientIncrease * predicted - noise) {
        Eigen::MatrixXd g_next =
            detail::tangent(exact_gradient(game, utilities, trial, agent).table);
        const double curvature = -(move.array() * (g_next - g).array()).sum();
        step = curvature > 0.0 ? std::clamp(move.squaredNorm() / curvature, kMinStep, max_step)
                               : std::min(trial_step * 2.0, max_step);
        x = std::move(trial);
        value = trial_value;
        g = std::move(g_next);
        accepted = true;
        break;
      }
      trial_step *= 0.5;
    }
    if (!accepted) break;
  }
  out.policy = x[agent];
  out.value = value;
  return out;
}

inline BestResponse best_response(const GameSpec& game,
                                  std::span<const UtilitySpec> utilities,
                                  const JointPolicy& policy, int agent,
                                  const InnerSolverConfig& inner) {
  BestResponse best =
      best_response_from(game, utilities, policy, agent, policy[agent], inner);
  if (inner.uniform_restart) {
    const Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(
        game.n_states(), game.n_actions(agent), 1.0 / game.n_actions(agent));
    BestResponse other =
        best_response_from(game, utilities, policy, agent, uniform, inner);
    if (other.value > best.value) best = std::move(other);
  }
  return best;
}

struct GapReport {
  std::vector<double> gaps;
  double max_gap = 0.0;
  std::vector<Eigen::MatrixXd> best_responses;
  std::vector<double> best_values;
  std::vector<int> iterations;
  std::vector<double> residual_surplus;
  std::vector<bool> converged;
  bool all_converged = true;  // when false the gaps are lower bounds
};

// NE-Gap_i = max_{pi'_i} u_i(pi'_i, pi_-i) - u_i(pi).
inline GapReport ne_gap(const GameSpec& game, std::span<const UtilitySpec> utilities,
                        const JointPolicy& policy,
                        const InnerSolverConfig& inner = {}) {
  GapReport report;
  report.max_gap = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < game.n_agents(); ++i) {
    const double current = agent_utility(game, utilities, policy, i);
    auto br = best_response(game, utilities, policy, i, inner);
    const double gap = std::max(br.value, current) - current;
    report.gaps.push_back(gap);
    report.max_gap = std::max(report.max_gap, gap);
    report.best_values.push_back(br.value);
    report.iterations.push_back(br.iterations);
    report.residual_surplus.push_back(br.surplus);
    report.converged.push_back(br.converged);
    report.all_converged = report.all_converged && br.converged;
    report.best_responses.push_back(std::move(br.policy));
  }
  return report;
}

struct StationarityReport {
  double eta = 0.0;
  double alpha = 0.0;
  double grad_map_norm = 0.0;      // ||G^{eta,alpha}(pi)||_2
  double fixed_point_residual = 0.0;  // ||pi - Proj_Pi(pi + eta v(pi))||_2
  double fos_surplus = 0.0;        // max_{pi'} <v(pi), pi' - pi>
  std::vector<double> agent_surplus;
};

inline std::vector<Eigen::MatrixXd> pseudo_gradient_field(
    const GameSpec& game, std::span<const UtilitySpec> utilities,
    const JointPolicy& policy) {
  std::vector<Eigen::MatrixXd> v;
  for (int i = 0; i < game.n_agents(); ++i)
    v.push_back(exact_gradient(game, utilities, policy, i).table);
  return v;
}

inline StationarityReport stationarity_from_field(
    const JointPolicy& policy, const std::vector<Eigen::MatrixXd>& field,
    double eta, double alpha = 0.0) {
  StationarityReport r;
  r.eta = eta;
  r.alpha = alpha;
  double residual_sq = 0.0;
  double map_sq = 0.0;
  for (int i = 0; i < policy.n_agents(); ++i) {
    const Eigen::MatrixXd moved = policy[i] + eta * field[i];
    residual_sq += (policy[i] - project_table(moved, GreedyFloor{0.0})).squaredNorm();
    map_sq += (policy[i] - project_table(moved, GreedyFloor{alpha})).squaredNorm();
    const double s = fos_surplus(policy[i], field[i]);
    r.agent_surplus.push_back(s);
    r.fos_surplus += s;
  }
  r.fixed_point_residual = std::sqrt(residual_sq);
  r.grad_map_norm = std::sqrt(map_sq) / eta;
  return r;
}

inline StationarityReport stationarity(const GameSpec& game,
                                       std::span<const UtilitySpec> utilities,
                                       const JointPolicy& policy, double eta,
                                       double alpha = 0.0) {
  require(eta > 0.0, ErrorCode::kInvalidArgument, "eta must be positive");
  return stationarity_from_field(policy, pseudo_gradient_field(game, utilities, policy),
                                 eta, alpha);
}

struct MpeReport {
  std::vector<GapReport> per_state;
  double max_gap = 0.0;
  int worst_state = 0;
};

// NE-gap under every Dirac initial distribution. States that are unreachable
// from s carry zero occupancy; the KL floor keeps utilities finite there, so
// the check is heuristic on such games.
inline MpeReport mpe_check(const GameSpec& game, std::span<const UtilitySpec> utilities,
                           const JointPolicy& policy,
                           const InnerSolverConfig& inner = {}) {
  MpeReport report;
  report.max_gap = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < game.n_states(); ++s) {
    const GameSpec dirac =
        game.with_initial_dist(Eigen::VectorXd::Unit(game.n_states(), s));
    auto gap = ne_gap(dirac, utilities, policy, inner);
    if (gap.max_gap > report.max_gap) {
      report.max_gap = gap.max_gap;
      report.worst_state = s;
    }
    report.per_state.push_back(std::move(gap));
  }
  return report;
}

// Common-interest games report the shared utility; otherwise the mean of the
// agents' utilities.
inline double potential(const GameSpec& game, std::span<const UtilitySpec> utilities,
                        const JointPolicy& policy, bool common_interest) {
  const auto occ = exact_marginals(game, policy);
  if (common_interest) return eval_utility(utilities[0], occ.marginals, &policy);
  double total = 0.0;
  for (const auto& u : utilities) total += eval_utility(u, occ.marginals, &policy);
  return total / static_cast<double>(utilities.size());
}

struct OccupancyGaps {
  double occ_gap = 0.0;
  double kl_occ_gap = 0.0;
};

inline bool supports_occupancy_gaps(UtilityKind kind) {
  return kind == UtilityKind::kImitation || kind == UtilityKind::kTeamCoverage ||
         kind == UtilityKind::kCollectiveExploration;
}

// Imitation: mean_i ||lambda_i - q_i||_1 and mean_i alpha_i KL(lambda_i||q_i).
// Coverage: ||lambda_bar - target||_1 and KL(lambda_bar||target).
// Exploration: ||lambda_bar - uniform||_1 and KL(lambda_bar||uniform), with
// lambda_bar the W-aggregate of agent 0.
inline OccupancyGaps occupancy_gaps(std::span<const UtilitySpec> utilities,
                                    std::span<const Eigen::MatrixXd> occ) {
  require(!utilities.empty(), ErrorCode::kInvalidArgument, "no utilities");
  const UtilityKind kind = utilities[0].kind;
  for (const auto& u : utilities)
    require(u.kind == kind && supports_occupancy_gaps(kind), ErrorCode::kUnsupportedKind,
            "occupancy gaps need imitation, coverage or exploration utilities");
  OccupancyGaps out;
  const double eps = utilities[0].kl_floor;
  if (kind == UtilityKind::kImitation) {
    for (const auto& u : utilities) {
      const auto& li = detail::occupancy_of(occ, u.agent);
      out.occ_gap += (li - u.imitation_target).cwiseAbs().sum();
      out.kl_occ_gap += u.alpha * detail::kl(detail::clamped(li, eps),
                                             detail::clamped(u.imitation_target, eps));
    }
    out.occ_gap /= static_cast<double>(utilities.size());
    out.kl_occ_gap /= static_cast<double>(utilities.size());
    return out;
  }
  const auto& u = utilities[0];
  const Eigen::MatrixXd bar = detail::weighted_sum(
      occ, kind == UtilityKind::kTeamCoverage ? u.weights : u.mixing_row);
  Eigen::MatrixXd reference =
      kind == UtilityKind::kTeamCoverage
          ? u.coverage_target
          : Eigen::MatrixXd::Constant(bar.rows(), bar.cols(), 1.0 / static_cast<double>(bar.size()));
  out.occ_gap = (bar - reference).cwiseAbs().sum();
  out.kl_occ_gap = detail::kl(detail::clamped(bar, eps), detail::clamped(reference, eps));
  return out;
}

struct ConstantBounds {
  double beta = 0.0;
  double c_loose = 0.0;  // +inf when mu lacks full support
  bool c_finite = true;
  double l_inf = 0.0;
  double lipschitz = 0.0;
  bool lipschitz_empirical = false;
};

// beta = N^{3/2} (sum_k |A_k|) / (1-gamma)^2
//        * (3 l_inf + L [(1 + N gamma / (1-gamma)) sqrt|S| + |S|]),
// c_loose = 1 / ((1 - gamma) min_s mu(s)).
inline double smoothness_beta(int n_agents, int sum_actions, int n_states,
                              double discount, double l_inf, double lipschitz) {
  const double n = n_agents;
  const double one_minus = 1.0 - discount;
  const double bracket = (1.0 + n * discount / one_minus) * std::sqrt(static_cast<double>(n_states)) +
                         static_cast<double>(n_states);
  return std::pow(n, 1.5) * sum_actions / (one_minus * one_minus) *
         (3.0 * l_inf + lipschitz * bracket);
}

inline ConstantBounds constant_bounds(const GameSpec& game,
                                      std::span<const UtilitySpec> utilities) {
  ConstantBounds out;
  for (const auto& u : utilities) {
    const auto c = smoothness_constants(u, game);
    out.l_inf = std::max(out.l_inf, c.l_inf);
    out.lipschitz = std::max(out.lipschitz, c.lipschitz);
    out.lipschitz_empirical = out.lipschitz_empirical || c.lipschitz_empirical;
  }
  int sum_actions = 0;
  for (int i = 0; i < game.n_agents(); ++i) sum_actions += game.n_actions(i);
  out.beta = smoothness_beta(game.n_agents(), sum_actions, game.n_states(),
                             game.discount(), out.l_inf, out.lipschitz);
  const double mu_min = game.initial_dist().minCoeff();
  out.c_finite = mu_min > 0.0;
  out.c_loose = out.c_finite ? 1.0 / ((1.0 - game.discount()) * mu_min)
                             : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace gumg

#endif  // GUMG_DIAGNOSTICS_HPP

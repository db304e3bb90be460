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

#ifndef GUMG_UTILITIES_HPP
#define GUMG_UTILITIES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gumg/error.hpp"
#include "gumg/game.hpp"
#include "gumg/rng.hpp"

namespace gumg {

enum class UtilityKind {
  kImitation,
  kConsensusDiversity,
  kTeamAggregate,
  kTeamCoverage,
  kCollectiveExploration,
  kComposite,
  kLinearReward,
};

inline std::string_view to_string(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::kImitation: return "imitation";
    case UtilityKind::kConsensusDiversity: return "consensus_diversity";
    case UtilityKind::kTeamAggregate: return "team_aggregate";
    case UtilityKind::kTeamCoverage: return "team_coverage";
    case UtilityKind::kCollectiveExploration: return "collective_exploration";
    case UtilityKind::kComposite: return "composite";
    case UtilityKind::kLinearReward: return "linear_reward";
  }
  return "unknown";
}

inline std::optional<UtilityKind> utility_kind_from_string(std::string_view s) {
  for (auto k : {UtilityKind::kImitation, UtilityKind::kConsensusDiversity,
                 UtilityKind::kTeamAggregate, UtilityKind::kTeamCoverage,
                 UtilityKind::kCollectiveExploration, UtilityKind::kComposite,
                 UtilityKind::kLinearReward}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

// Concave inner function h applied to the aggregate sum_j W_ij lambda_j.
enum class InnerConcave {
  kEntropy,    // h(x) = -sum x log x
  kQuadratic,  // h(x) = -1/2 ||x - c||^2
};

inline constexpr double kDefaultKlFloor = 1e-6;

// Agent i's utility
//
//   F_i = - alpha KL(lambda_i || q_i) - beta KL(lambda_i || lambda_bar)
//         + gamma h(sum_j W_ij lambda_j) - kappa KL(lambda_bar || target)
//         + sum_j <r_j, lambda_j> + g_i(pi_{-i}),
//
// where lambda_bar = sum_j w_j lambda_j. Each kind is a preset of the term
// coefficients; use the make_* helpers. Occupancies are clamped entrywise to
// max(x, kl_floor) before any log or division.
struct UtilitySpec {
  UtilityKind kind = UtilityKind::kLinearReward;
  int agent = 0;

  double alpha = 0.0;
  Eigen::MatrixXd imitation_target;  // q_i over (s, a_i)

  double beta = 0.0;
  Eigen::VectorXd weights;  // w, length N

  double gamma = 0.0;
  Eigen::VectorXd mixing_row;  // W_{i, .}, length N
  InnerConcave inner = InnerConcave::kEntropy;
  Eigen::MatrixXd quadratic_center;

  double kappa = 0.0;
  Eigen::MatrixXd coverage_target;

  std::vector<Eigen::MatrixXd> linear_rewards;  // per j; empty entries are 0

  // Enters values only; it does not depend on pi_i, so never on gradients.
  std::function<double(const JointPolicy&, int)> policy_penalty;

  double kl_floor = kDefaultKlFloor;

  bool uses_weights() const { return beta != 0.0 || kappa != 0.0; }

  // Whether the gradient needs any lambda_j with j != agent.
  bool couples_agents() const {
    if (uses_weights()) return true;
    if (gamma != 0.0) {
      for (Eigen::Index j = 0; j < mixing_row.size(); ++j)
        if (j != agent && mixing_row[j] != 0.0) return true;
    }
    for (std::size_t j = 0; j < linear_rewards.size(); ++j)
      if (static_cast<int>(j) != agent && linear_rewards[j].size() != 0) return true;
    return false;
  }

  // Whether lambda_j enters F_i at all.
  bool depends_on(int j) const {
    if (j == agent) return true;
    if (uses_weights() && weights[j] != 0.0) return true;
    if (gamma != 0.0 && mixing_row[j] != 0.0) return true;
    return static_cast<std::size_t>(j) < linear_rewards.size() &&
           linear_rewards[j].size() != 0;
  }
};

inline UtilitySpec make_imitation(int agent, Eigen::MatrixXd target,
                                  double alpha = 1.0) {
  UtilitySpec u;
  u.kind = UtilityKind::kImitation;
  u.agent = agent;
  u.alpha = alpha;
  u.imitation_target = std::move(target);
  return u;
}

inline UtilitySpec make_consensus_diversity(int agent, Eigen::VectorXd weights,
                                            double beta = 1.0) {
  UtilitySpec u;
  u.kind = UtilityKind::kConsensusDiversity;
  u.agent = agent;
  u.beta = beta;
  u.weights = std::move(weights);
  return u;
}

inline UtilitySpec make_team_aggregate(int agent, Eigen::VectorXd mixing_row,
                                       double gamma, InnerConcave inner,
                                       Eigen::MatrixXd center = {}) {
  UtilitySpec u;
  u.kind = UtilityKind::kTeamAggregate;
  u.agent = agent;
  u.gamma = gamma;
  u.mixing_row = std::move(mixing_row);
  u.inner = inner;
  u.quadratic_center = std::move(center);
  return u;
}

inline UtilitySpec make_team_coverage(int agent, Eigen::VectorXd weights,
                                      Eigen::MatrixXd target) {
  UtilitySpec u;
  u.kind = UtilityKind::kTeamCoverage;
  u.agent = agent;
  u.kappa = 1.0;
  u.weights = std::move(weights);
  u.coverage_target = std::move(target);
  return u;
}

inline UtilitySpec make_collective_exploration(int agent,
                                               Eigen::VectorXd mixing_row,
                                               double gamma = 1.0) {
  UtilitySpec u = make_team_aggregate(agent, std::move(mixing_row), gamma,
                                      InnerConcave::kEntropy);
  u.kind = UtilityKind::kCollectiveExploration;
  return u;
}

inline UtilitySpec make_linear_reward(int agent,
                                      std::vector<Eigen::MatrixXd> rewards) {
  UtilitySpec u;
  u.kind = UtilityKind::kLinearReward;
  u.agent = agent;
  u.linear_rewards = std::move(rewards);
  return u;
}

namespace detail {

inline Eigen::ArrayXXd clamped(const Eigen::MatrixXd& x, double floor) {
  return x.array().max(floor);
}

inline const Eigen::MatrixXd& occupancy_of(std::span<const Eigen::MatrixXd> occ,
                                           int j) {
  require(j >= 0 && j < static_cast<int>(occ.size()) && occ[j].size() != 0,
          ErrorCode::kDimensionMismatch,
          "occupancy of agent " + std::to_string(j) + " is missing");
  return occ[j];
}

inline Eigen::MatrixXd weighted_sum(std::span<const Eigen::MatrixXd> occ,
                                    const Eigen::VectorXd& coeffs) {
  require(coeffs.size() == static_cast<Eigen::Index>(occ.size()),
          ErrorCode::kDimensionMismatch,
          "weight vector length does not match the number of agents");
  Eigen::MatrixXd sum;
  for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
    if (coeffs[j] == 0.0) continue;
    const auto& lj = occupancy_of(occ, static_cast<int>(j));
    if (sum.size() == 0) {
      sum = coeffs[j] * lj;
    } else {
      require(lj.rows() == sum.rows() && lj.cols() == sum.cols(),
              ErrorCode::kDimensionMismatch,
              "aggregated occupancies need equal action counts");
      sum += coeffs[j] * lj;
    }
  }
  if (sum.size() == 0) sum = Eigen::MatrixXd::Zero(occ[0].rows(), occ[0].cols());
  return sum;
}

inline double kl(const Eigen::ArrayXXd& p, const Eigen::ArrayXXd& q) {
  return (p * (p / q).log()).sum();
}

inline void check_shape(const Eigen::MatrixXd& m, const Eigen::MatrixXd& like,
                        const char* what) {
  require(m.rows() == like.rows() && m.cols() == like.cols(),
          ErrorCode::kDimensionMismatch, std::string(what) + " has wrong shape");
}

}  // namespace detail

// F_i at the given marginals (lambda_1..lambda_N). The policy is consulted
// only by the optional penalty g_i.
inline double eval_utility(const UtilitySpec& spec,
                           std::span<const Eigen::MatrixXd> occ,
                           const JointPolicy* policy = nullptr) {
  const double eps = spec.kl_floor;
  const auto& own = detail::occupancy_of(occ, spec.agent);
  double value = 0.0;

  if (spec.alpha != 0.0) {
    detail::check_shape(spec.imitation_target, own, "imitation target");
    value -= spec.alpha * detail::kl(detail::clamped(own, eps),
                                     detail::clamped(spec.imitation_target, eps));
  }
  Eigen::MatrixXd bar;
  if (spec.uses_weights()) bar = detail::weighted_sum(occ, spec.weights);
  if (spec.beta != 0.0) {
    detail::check_shape(bar, own, "lambda_bar");
    value -= spec.beta *
             detail::kl(detail::clamped(own, eps), detail::clamped(bar, eps));
  }
  if (spec.gamma != 0.0) {
    const Eigen::MatrixXd x = detail::weighted_sum(occ, spec.mixing_row);
    if (spec.inner == InnerConcave::kEntropy) {
      const Eigen::ArrayXXd xc = detail::clamped(x, eps);
      value -= spec.gamma * (xc * xc.log()).sum();
    } else {
      detail::check_shape(spec.quadratic_center, x, "quadratic center");
      value -= 0.5 * spec.gamma * (x - spec.quadratic_center).squaredNorm();
    }
  }
  if (spec.kappa != 0.0) {
    detail::check_shape(spec.coverage_target, bar, "coverage target");
    value -= spec.kappa * detail::kl(detail::clamped(bar, eps),
                                     detail::clamped(spec.coverage_target, eps));
  }
  for (std::size_t j = 0; j < spec.linear_rewards.size(); ++j) {
    const auto& r = spec.linear_rewards[j];
    if (r.size() == 0) continue;
    const auto& lj = detail::occupancy_of(occ, static_cast<int>(j));
    detail::check_shape(r, lj, "linear reward");
    value += (r.array() * lj.array()).sum();
  }
  if (spec.policy_penalty && policy != nullptr)
    value += spec.policy_penalty(*policy, spec.agent);
  return value;
}

// Pseudo-reward nabla_{lambda_j} F_i over (s, a_j), evaluated at the clamped
// occupancies.
inline Eigen::MatrixXd grad_utility(const UtilitySpec& spec, int j,
                                    std::span<const Eigen::MatrixXd> occ) {
  const double eps = spec.kl_floor;
  const int i = spec.agent;
  const auto& lj = detail::occupancy_of(occ, j);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(lj.rows(), lj.cols());

  if (spec.alpha != 0.0 && j == i) {
    detail::check_shape(spec.imitation_target, lj, "imitation target");
    grad.array() -= spec.alpha *
                    ((detail::clamped(lj, eps) /
                      detail::clamped(spec.imitation_target, eps)).log() + 1.0);
  }
  Eigen::MatrixXd bar;
  Eigen::ArrayXXd bar_c;
  if (spec.uses_weights()) {
    bar = detail::weighted_sum(occ, spec.weights);
    bar_c = detail::clamped(bar, eps);
  }
  if (spec.beta != 0.0) {
    const Eigen::ArrayXXd li = detail::clamped(detail::occupancy_of(occ, i), eps);
    const Eigen::ArrayXXd ratio = li / bar_c;
    if (j == i) {
      grad.array() -= spec.beta * (ratio.log() + 1.0 - spec.weights[i] * ratio);
    } else {
      grad.array() += spec.beta * spec.weights[j] * ratio;
    }
  }
  if (spec.gamma != 0.0 && spec.mixing_row[j] != 0.0) {
    const Eigen::MatrixXd x = detail::weighted_sum(occ, spec.mixing_row);
    if (spec.inner == InnerConcave::kEntropy) {
      grad.array() -= spec.gamma * spec.mixing_row[j] *
                      (detail::clamped(x, eps).log() + 1.0);
    } else {
      grad.array() -= spec.gamma * spec.mixing_row[j] *
                      (x - spec.quadratic_center).array();
    }
  }
  if (spec.kappa != 0.0 && spec.weights[j] != 0.0) {
    grad.array() -= spec.kappa * spec.weights[j] *
                    ((bar_c / detail::clamped(spec.coverage_target, eps)).log() + 1.0);
  }
  if (static_cast<std::size_t>(j) < spec.linear_rewards.size() &&
      spec.linear_rewards[j].size() != 0) {
    detail::check_shape(spec.linear_rewards[j], lj, "linear reward");
    grad += spec.linear_rewards[j];
  }
  return grad;
}

struct SmoothnessConstants {
  double l_inf = 0.0;
  double lipschitz = 0.0;
  bool lipschitz_empirical = false;
};

namespace detail {

inline double max_abs_log(const Eigen::MatrixXd& q, double eps) {
  return std::abs(std::log(std::max(q.minCoeff(), eps)));
}

inline double max_abs(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Sampled difference quotients sup ||D_j F(l) - D_j F(l')||_inf / ||l - l'||_1
// over random interior tuples and nearby perturbations.
inline double empirical_lipschitz(const UtilitySpec& spec,
                                  const std::vector<std::pair<int, int>>& shapes,
                                  int samples, std::uint64_t seed) {
  Rng rng(seed, {0x11f5});
  const double eps = spec.kl_floor;
  auto draw = [&]() {
    std::vector<Eigen::MatrixXd> occ;
    for (const auto& [rows, cols] : shapes) {
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index k = 0; k < m.size(); ++k)
        m.data()[k] = -std::log(1.0 - rng.uniform());
      m /= m.sum();
      occ.push_back(m.array().max(eps).matrix());
    }
    return occ;
  };
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    auto a = draw();
    auto b = (k % 2 == 0) ? draw() : a;
    if (k % 2 == 1) {
      for (auto& m : b) {
        for (Eigen::Index e = 0; e < m.size(); ++e)
          m.data()[e] = std::max(eps, m.data()[e] * (1.0 + 1e-3 * (rng.uniform() - 0.5)));
      }
    }
    double dist = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) dist += (a[j] - b[j]).cwiseAbs().sum();
    if (dist <= 0.0) continue;
    for (int j = 0; j < static_cast<int>(a.size()); ++j) {
      if (!spec.depends_on(j)) continue;
      const double diff =
          (grad_utility(spec, j, a) - grad_utility(spec, j, b)).cwiseAbs().maxCoeff();
      worst = std::max(worst, diff / dist);
    }
  }
  return worst;
}

}  // namespace detail

// Bounds on the clamped domain: l_inf on ||D_j F_i||_inf and the Lipschitz
// constant L of D_j F_i w.r.t. ||.||_1. Consensus terms have no closed-form L;
// theirs is a sampled estimate and flagged as such.
inline SmoothnessConstants smoothness_constants(const UtilitySpec& spec,
                                                const GameSpec& game,
                                                double floor) {
  require(floor > 0.0 || (spec.alpha == 0.0 && spec.beta == 0.0 &&
                          spec.kappa == 0.0 && spec.gamma == 0.0),
          ErrorCode::kInvalidArgument, "KL-type utilities need a positive floor");
  UtilitySpec clamped = spec;
  clamped.kl_floor = floor;
  const int i = spec.agent;
  const double log_eps = floor > 0.0 ? std::abs(std::log(floor)) : 0.0;
  SmoothnessConstants out;

  if (spec.alpha != 0.0) {
    out.l_inf += spec.alpha *
                 (log_eps + detail::max_abs_log(spec.imitation_target, floor) + 1.0);
    out.lipschitz += spec.alpha / floor;
  }
  if (spec.beta != 0.0) {
    const double wi = spec.weights[i];
    const double ratio_cap = wi > 0.0 ? std::min(1.0 / wi, 1.0 / floor) : 1.0 / floor;
    double cross = 0.0;
    for (Eigen::Index j = 0; j < spec.weights.size(); ++j)
      if (j != i) cross = std::max(cross, spec.weights[j] * ratio_cap);
    out.l_inf += spec.beta * std::max(log_eps + 1.0, cross);
    out.lipschitz_empirical = true;
  }
  if (spec.gamma != 0.0) {
    const double wmax = detail::max_abs(spec.mixing_row);
    if (spec.inner == InnerConcave::kEntropy) {
      out.l_inf += spec.gamma * wmax * (log_eps + 1.0);
      out.lipschitz += spec.gamma * wmax * wmax / floor;
    } else {
      const double cmax =
          spec.quadratic_center.size() == 0 ? 0.0 : spec.quadratic_center.cwiseAbs().maxCoeff();
      out.l_inf += spec.gamma * wmax * (1.0 + cmax);
      out.lipschitz += spec.gamma * wmax * wmax;
    }
  }
  if (spec.kappa != 0.0) {
    const double wmax = detail::max_abs(spec.weights);
    out.l_inf += spec.kappa * wmax *
                 (log_eps + detail::max_abs_log(spec.coverage_target, floor) + 1.0);
    out.lipschitz += spec.kappa * wmax * wmax / floor;
  }
  double lin = 0.0;
  for (const auto& r : spec.linear_rewards)
    if (r.size() != 0) lin = std::max(lin, r.cwiseAbs().maxCoeff());
  out.l_inf += lin;

  if (out.lipschitz_empirical) {
    std::vector<std::pair<int, int>> shapes;
    for (int j = 0; j < game.n_agents(); ++j)
      shapes.emplace_back(game.n_states(), game.n_actions(j));
    UtilitySpec consensus_only = clamped;
    consensus_only.alpha = consensus_only.gamma = consensus_only.kappa = 0.0;
    consensus_only.linear_rewards.clear();
    out.lipschitz += detail::empirical_lipschitz(consensus_only, shapes, 400, 7);
  }
  return out;
}

inline SmoothnessConstants smoothness_constants(const UtilitySpec& spec,
                                                const GameSpec& game) {
  return smoothness_constants(spec, game, spec.kl_floor);
}

// Checks declared parameters against the game's shapes.
inline void validate_utility(const UtilitySpec& spec, const GameSpec& game) {
  const int n = game.n_agents();
  const int i = spec.agent;
  require(i >= 0 && i < n, ErrorCode::kDimensionMismatch, "agent index out of range");
  require(spec.alpha >= 0.0 && spec.beta >= 0.0 && spec.gamma >= 0.0 &&
              spec.kappa >= 0.0,
          ErrorCode::kInvalidArgument, "coefficients must be nonnegative");
  require(spec.kl_floor > 0.0, ErrorCode::kInvalidArgument, "kl floor must be positive");
  auto check_dist = [&](const Eigen::MatrixXd& m, int cols, const char* what) {
    require(m.rows() == game.n_states() && m.cols() == cols,
            ErrorCode::kDimensionMismatch, std::string(what) + " has wrong shape");
    require((m.array() > 0.0).all(), ErrorCode::kInvalidArgument,
            std::string(what) + " must be strictly positive");
    require(std::abs(m.sum() - 1.0) <= 1e-9, ErrorCode::kNonStochasticRow,
            std::string(what) + " must sum to 1");
  };
  if (spec.alpha != 0.0) check_dist(spec.imitation_target, game.n_actions(i), "imitation target");
  auto check_equal_actions = [&]() {
    for (int j = 1; j < n; ++j)
      require(game.n_actions(j) == game.n_actions(0), ErrorCode::kDimensionMismatch,
              "aggregate utilities need equal action counts");
  };
  if (spec.uses_weights()) {
    require(spec.weights.size() == n, ErrorCode::kDimensionMismatch, "w has wrong length");
    require((spec.weights.array() >= 0.0).all() &&
                std::abs(spec.weights.sum() - 1.0) <= 1e-12,
            ErrorCode::kInvalidArgument, "w must be a probability vector");
    check_equal_actions();
  }
  if (spec.gamma != 0.0) {
    require(spec.mixing_row.size() == n, ErrorCode::kDimensionMismatch,
            "W row has wrong length");
    require((spec.mixing_row.array() >= 0.0).all() &&
                std::abs(spec.mixing_row.sum() - 1.0) <= 1e-12,
            ErrorCode::kInvalidArgument, "W must be row-stochastic");
    check_equal_actions();
    if (spec.inner == InnerConcave::kQuadratic) {
      require(spec.quadratic_center.rows() == game.n_states() &&
                  spec.quadratic_center.cols() == game.n_actions(0),
              ErrorCode::kDimensionMismatch, "quadratic center has wrong shape");
    }
  }
  if (spec.kappa != 0.0) check_dist(spec.coverage_target, game.n_actions(0), "coverage target");
  require(spec.linear_rewards.empty() || static_cast<int>(spec.linear_rewards.size()) == n,
          ErrorCode::kDimensionMismatch, "linear rewards need one slot per agent");
  for (int j = 0; j < static_cast<int>(spec.linear_rewards.size()); ++j) {
    const auto& r = spec.linear_rewards[j];
    if (r.size() == 0) continue;
    require(r.rows() == game.n_states() && r.cols() == game.n_actions(j),
            ErrorCode::kDimensionMismatch, "linear reward has wrong shape");
  }
}

// True when every agent's F is the same function of the occupancy tuple, so
// F itself is a potential.
inline bool identical_interest(std::span<const UtilitySpec> utilities) {
  if (utilities.empty()) return false;
  auto same = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  const auto& u0 = utilities[0];
  for (const auto& u : utilities) {
    if (u.alpha != 0.0 || u.beta != 0.0 || u.policy_penalty) return false;
    if (u.gamma != u0.gamma || u.kappa != u0.kappa || u.kl_floor != u0.kl_floor) return false;
    if (u.gamma != 0.0 && (u.inner != u0.inner || !same(u.mixing_row, u0.mixing_row) ||
                           !same(u.quadratic_center, u0.quadratic_center)))
      return false;
    if (u.kappa != 0.0 &&
        (!same(u.weights, u0.weights) || !same(u.coverage_target, u0.coverage_target)))
      return false;
    if (u.linear_rewards.size() != u0.linear_rewards.size()) return false;
    for (std::size_t j = 0; j < u.linear_rewards.size(); ++j)
      if (!same(u.linear_rewards[j], u0.linear_rewards[j])) return false;
  }
  return true;
}

}  // namespace gumg

#endif  // GUMG_UTILITIES_HPP

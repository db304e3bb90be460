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

#ifndef GUMG_GAME_HPP
#define GUMG_GAME_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gumg/error.hpp"

namespace gumg {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kInputTolerance = 1e-12;
inline constexpr double kArithmeticTolerance = 1e-10;

// Unvalidated game description, as read from a file or produced by a builder.
// transition has n_states * n_joint rows of length n_states; row s * n_joint + a
// holds P(. | s, a).
struct GameDescription {
  int n_agents = 0;
  int n_states = 0;
  std::vector<int> action_counts;
  RowMatrix transition;
  Eigen::VectorXd initial_dist;
  double discount = 0.0;
};

// Mixed-radix joint-action indexing; agent 0 is the fastest-varying digit.
class JointActionCodec {
 public:
  JointActionCodec() = default;
  explicit JointActionCodec(std::vector<int> counts)
      : counts_(std::move(counts)), strides_(counts_.size()) {
    int stride = 1;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      strides_[i] = stride;
      stride *= counts_[i];
    }
    size_ = stride;
  }

  int size() const { return size_; }
  int n_agents() const { return static_cast<int>(counts_.size()); }
  int count(int agent) const { return counts_[agent]; }
  const std::vector<int>& counts() const { return counts_; }

  int action_of(int joint, int agent) const {
    return (joint / strides_[agent]) % counts_[agent];
  }

  int encode(const std::vector<int>& actions) const {
    int joint = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i)
      joint += actions[i] * strides_[i];
    return joint;
  }

  // Replaces agent's digit in joint with action.
  int with_action(int joint, int agent, int action) const {
    return joint + (action - action_of(joint, agent)) * strides_[agent];
  }

 private:
  std::vector<int> counts_;
  std::vector<int> strides_;
  int size_ = 1;
};

// Validated, immutable tabular game (N, S, {A_i}, P, mu, gamma).
class GameSpec {
 public:
  int n_agents() const { return codec_.n_agents(); }
  int n_states() const { return n_states_; }
  int n_actions(int agent) const { return codec_.count(agent); }
  int n_joint() const { return codec_.size(); }
  const std::vector<int>& action_counts() const { return codec_.counts(); }
  const JointActionCodec& codec() const { return codec_; }
  double discount() const { return discount_; }
  const Eigen::VectorXd& initial_dist() const { return initial_dist_; }
  const RowMatrix& transition() const { return transition_; }

  auto transition_row(int state, int joint) const {
    return transition_.row(static_cast<Eigen::Index>(state) * n_joint() + joint);
  }

  // Same dynamics, different initial distribution (validated).
  GameSpec with_initial_dist(const Eigen::VectorXd& mu) const;

  GameDescription description() const {
    return {n_agents(), n_states_, action_counts(), transition_, initial_dist_,
            discount_};
  }

 private:
  friend GameSpec validate_game(const GameDescription& raw);
  GameSpec() = default;

  int n_states_ = 0;
  JointActionCodec codec_;
  RowMatrix transition_;
  Eigen::VectorXd initial_dist_;
  double discount_ = 0.0;
};

namespace detail {

inline void check_distribution(const Eigen::Ref<const Eigen::VectorXd>& p,
                               double tol, const std::string& where) {
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    require(std::isfinite(p[k]) && p[k] >= 0.0, ErrorCode::kNegativeEntry,
            where + " has entry " + std::to_string(k) + " = " +
                std::to_string(p[k]));
  }
  const double total = p.sum();
  require(std::abs(total - 1.0) <= tol, ErrorCode::kNonStochasticRow,
          where + " sums to " + std::to_string(total));
}

}  // namespace detail

inline GameSpec validate_game(const GameDescription& raw) {
  require(raw.n_agents >= 1, ErrorCode::kDimensionMismatch,
          "n_agents must be positive");
  require(raw.n_states >= 1, ErrorCode::kDimensionMismatch,
          "n_states must be positive");
  require(static_cast<int>(raw.action_counts.size()) == raw.n_agents,
          ErrorCode::kDimensionMismatch,
          "action_counts has " + std::to_string(raw.action_counts.size()) +
              " entries for " + std::to_string(raw.n_agents) + " agents");
  for (int i = 0; i < raw.n_agents; ++i) {
    require(raw.action_counts[i] >= 1, ErrorCode::kDimensionMismatch,
            "agent " + std::to_string(i) + " has no actions");
  }
  require(raw.discount > 0.0 && raw.discount < 1.0,
          ErrorCode::kInvalidArgument, "discount must lie in (0, 1)");

  JointActionCodec codec(raw.action_counts);
  const Eigen::Index rows =
      static_cast<Eigen::Index>(raw.n_states) * codec.size();
  require(raw.transition.rows() == rows && raw.transition.cols() == raw.n_states,
          ErrorCode::kDimensionMismatch,
          "transition must be " + std::to_string(rows) + "x" +
              std::to_string(raw.n_states));
  require(raw.initial_dist.size() == raw.n_states,
          ErrorCode::kDimensionMismatch, "mu has wrong length");

  for (int s = 0; s < raw.n_states; ++s) {
    for (int a = 0; a < codec.size(); ++a) {
      const Eigen::VectorXd row =
          raw.transition.row(static_cast<Eigen::Index>(s) * codec.size() + a)
              .transpose();
      for (Eigen::Index k = 0; k < row.size(); ++k) {
        require(std::isfinite(row[k]) && row[k] >= 0.0,
                ErrorCode::kNegativeEntry,
                "P(.|s=" + std::to_string(s) + ",a=" + std::to_string(a) +
                    ") entry " + std::to_string(k));
      }
      require(std::abs(row.sum() - 1.0) <= kInputTolerance,
              ErrorCode::kNonStochasticRow,
              "P(.|s=" + std::to_string(s) + ",a=" + std::to_string(a) +
                  ") sums to " + std::to_string(row.sum()));
    }
  }
  detail::check_distribution(raw.initial_dist, kInputTolerance, "mu");

  GameSpec spec;
  spec.n_states_ = raw.n_states;
  spec.codec_ = std::move(codec);
  spec.transition_ = raw.transition;
  spec.initial_dist_ = raw.initial_dist;
  spec.discount_ = raw.discount;
  return spec;
}

inline GameSpec GameSpec::with_initial_dist(const Eigen::VectorXd& mu) const {
  GameDescription raw = description();
  raw.initial_dist = mu;
  return validate_game(raw);
}

// Per-agent tables pi_i(a_i | s), shape |S| x |A_i|. The joint policy is the
// product of the rows and is only materialized on request.
struct JointPolicy {
  std::vector<Eigen::MatrixXd> tables;

  int n_agents() const { return static_cast<int>(tables.size()); }
  const Eigen::MatrixXd& operator[](int agent) const { return tables[agent]; }
  Eigen::MatrixXd& operator[](int agent) { return tables[agent]; }

  static JointPolicy uniform(const GameSpec& game) {
    JointPolicy policy;
    for (int i = 0; i < game.n_agents(); ++i) {
      policy.tables.push_back(Eigen::MatrixXd::Constant(
          game.n_states(), game.n_actions(i), 1.0 / game.n_actions(i)));
    }
    return policy;
  }

  double joint_prob(const JointActionCodec& codec, int state, int joint) const {
    double p = 1.0;
    for (int i = 0; i < n_agents(); ++i)
      p *= tables[i](state, codec.action_of(joint, i));
    return p;
  }

  // prod_{k != agent} pi_k(a_k | s).
  double others_prob(const JointActionCodec& codec, int state, int joint,
                     int agent) const {
    double p = 1.0;
    for (int k = 0; k < n_agents(); ++k) {
      if (k != agent) p *= tables[k](state, codec.action_of(joint, k));
    }
    return p;
  }

  // Dense |S| x |A| joint table.
  Eigen::MatrixXd dense(const GameSpec& game) const {
    Eigen::MatrixXd joint(game.n_states(), game.n_joint());
    for (int s = 0; s < game.n_states(); ++s)
      for (int a = 0; a < game.n_joint(); ++a)
        joint(s, a) = joint_prob(game.codec(), s, a);
    return joint;
  }

  // Euclidean norm of the stacked tables.
  double norm() const {
    double sq = 0.0;
    for (const auto& t : tables) sq += t.squaredNorm();
    return std::sqrt(sq);
  }
};

inline JointPolicy operator-(const JointPolicy& x, const JointPolicy& y) {
  JointPolicy out = x;
  for (int i = 0; i < x.n_agents(); ++i) out.tables[i] -= y.tables[i];
  return out;
}

// Throws unless policy has the game's shapes and stochastic rows.
inline void check_policy(const GameSpec& game, const JointPolicy& policy,
                         double tol = kArithmeticTolerance) {
  require(policy.n_agents() == game.n_agents(), ErrorCode::kDimensionMismatch,
          "policy has " + std::to_string(policy.n_agents()) + " agents");
  for (int i = 0; i < game.n_agents(); ++i) {
    require(policy[i].rows() == game.n_states() &&
                policy[i].cols() == game.n_actions(i),
            ErrorCode::kDimensionMismatch,
            "policy table of agent " + std::to_string(i) + " has wrong shape");
    for (int s = 0; s < game.n_states(); ++s) {
      detail::check_distribution(
          policy[i].row(s).transpose(), tol,
          "policy row (agent " + std::to_string(i) + ", state " +
              std::to_string(s) + ")");
    }
  }
}

// Pi_i^alpha membership: pi_i(a|s) >= alpha / |A_i|.
struct GreedyFloor {
  double alpha = 0.0;

  double floor_for(int n_actions) const { return alpha / n_actions; }

  bool contains(const Eigen::MatrixXd& table, double tol = 1e-12) const {
    return (table.array() >= floor_for(static_cast<int>(table.cols())) - tol)
        .all();
  }
};

}  // namespace gumg

#endif  // GUMG_GAME_HPP

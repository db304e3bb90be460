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

#include <gtest/gtest.h>

#include <limits>

#include "gumg/gumg.hpp"
#include "oracles.hpp"

namespace gumg {
namespace {

// Exact projection by bisection on the threshold theta of
// x_k = max(v_k - theta, floor).
Eigen::VectorXd bisection_projection(const Eigen::VectorXd& v, double floor) {
  double lo = v.minCoeff() - 1.0;
  double hi = v.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double mass = (v.array() - mid).max(floor).sum();
    (mass > 1.0 ? lo : hi) = mid;
  }
  return (v.array() - 0.5 * (lo + hi)).max(floor);
}

double objective(const Eigen::VectorXd& x, const Eigen::VectorXd& v) { return (x - v).squaredNorm(); }

Eigen::VectorXd random_vector(int k, Rng& rng) {
  Eigen::VectorXd v(k);
  for (int j = 0; j < k; ++j) v[j] = 3.0 * rng.uniform() - 1.5;
  return v;
}

TEST(ProjectSimplex, FeasiblePointUnchanged) {
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(4, 0.25);
  EXPECT_LE((project_simplex_floor(v, 0.0) - v).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ProjectSimplex, DominantCoordinateSaturates) {
  const Eigen::VectorXd x = project_simplex_floor(Eigen::Vector3d(2, 0, 0), 0.0);
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 0.0, 1e-15);
  EXPECT_NEAR(x[2], 0.0, 1e-15);
}

TEST(ProjectSimplex, GridSearchOracleThreeCoordinates) {
  Rng rng(4);
  constexpr double kRes = 1e-3;
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd v = random_vector(3, rng);
    const double floor = 0.02;
    double best = std::numeric_limits<double>::infinity();
    const int steps = static_cast<int>(std::lround((1.0 - 3 * floor) / kRes));
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; i + j <= steps; ++j) {
        const Eigen::Vector3d x(floor + i * kRes, floor + j * kRes,
                                floor + (steps - i - j) * kRes);
        best = std::min(best, objective(x, v));
      }
    EXPECT_LE(objective(project_simplex_floor(v, floor), v), best + 1e-6);
  }
}

TEST(ProjectSimplex, MatchesBisectionOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 1 + trial % 6;
    const Eigen::VectorXd v = random_vector(k, rng);
    const double floor = rng.uniform() / k;
    const Eigen::VectorXd x = project_simplex_floor(v, floor);
    const Eigen::VectorXd ref = bisection_projection(v, floor);
    EXPECT_NEAR(x.sum(), 1.0, 1e-12);
    EXPECT_GE(x.minCoeff(), floor - 1e-15);
    EXPECT_LE(objective(x, v), objective(ref, v) + 1e-6);
    // Random feasible points never beat it.
    for (int p = 0; p < 5; ++p) {
      const Eigen::VectorXd y =
          floor + (1.0 - k * floor) * oracle::random_simplex(k, rng).array();
      EXPECT_LE(objective(x, v), objective(y, v) + 1e-12);
    }
  }
}

TEST(ProjectSimplex, InfeasibleFloorThrows) {
  try {
    project_simplex_floor(Eigen::VectorXd::Zero(4), 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasibleFloor);
  }
}

TEST(ProjectPolicy, FeasiblePolicyUnchanged) {
  const GameSpec game = corpus_game(3);
  Rng rng(1);
  const JointPolicy policy = random_interior_policy(game, rng);
  const JointPolicy out = project_policy(policy.tables, GreedyFloor{0.0});
  EXPECT_LE((out - policy).norm(), 1e-14);
}

TEST(ProjectPolicy, ZeroTablesGiveUniform) {
  const GameSpec game = corpus_game(3);
  std::vector<Eigen::MatrixXd> zeros;
  for (int i = 0; i < game.n_agents(); ++i)
    zeros.push_back(Eigen::MatrixXd::Zero(game.n_states(), game.n_actions(i)));
  const JointPolicy out = project_policy(zeros, GreedyFloor{0.0});
  EXPECT_LE((out - JointPolicy::uniform(game)).norm(), 1e-15);
}

TEST(ProjectPolicy, ImitationStepKeepsInvariants) {
  const GameSpec game = corpus_game(6);
  Rng rng(6);
  const auto utils = oracle::make_utilities(game, oracle::Kind::kImitation, rng);
  for (double alpha : {0.0, 0.1}) {
    const JointPolicy uniform = JointPolicy::uniform(game);
    std::vector<Eigen::MatrixXd> point;
    for (int i = 0; i < game.n_agents(); ++i)
      point.push_back(uniform[i] + 0.01 * exact_gradient(game, utils, uniform, i).table);
    const JointPolicy out = project_policy(point, GreedyFloor{alpha});
    for (int i = 0; i < game.n_agents(); ++i) {
      EXPECT_LE((out[i].rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-14);
      EXPECT_TRUE(GreedyFloor{alpha}.contains(out[i]));
    }
  }
}

}  // namespace
}  // namespace gumg

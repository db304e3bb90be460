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

#ifndef GUMG_PROJECTION_HPP
#define GUMG_PROJECTION_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "gumg/error.hpp"
#include "gumg/game.hpp"

namespace gumg {

// Euclidean projection onto {x : x_k >= floor, sum_k x_k = 1}.
//
// Substituting y = x - floor reduces the problem to projecting v - floor onto
// the simplex of mass 1 - K * floor, solved by sorting and thresholding.
inline Eigen::VectorXd project_simplex_floor(const Eigen::VectorXd& v,
                                             double floor) {
  const Eigen::Index k = v.size();
  require(k >= 1, ErrorCode::kDimensionMismatch, "empty vector");
  require(floor >= 0.0, ErrorCode::kInvalidArgument, "negative floor");
  const double mass = 1.0 - static_cast<double>(k) * floor;
  require(mass >= -1e-15, ErrorCode::kInfeasibleFloor,
          "K * floor = " + std::to_string(k * floor) + " exceeds 1");
  if (mass <= 0.0) return Eigen::VectorXd::Constant(k, floor);

  const Eigen::VectorXd y = v.array() - floor;
  std::vector<double> sorted(y.data(), y.data() + k);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - mass) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  return (y.array() - theta).max(0.0) + floor;
}

// Row-wise projection of one agent's table onto Pi_i^alpha.
inline Eigen::MatrixXd project_table(const Eigen::MatrixXd& table,
                                     GreedyFloor floor) {
  const double f = floor.floor_for(static_cast<int>(table.cols()));
  Eigen::MatrixXd out(table.rows(), table.cols());
  for (Eigen::Index s = 0; s < table.rows(); ++s)
    out.row(s) = project_simplex_floor(table.row(s).transpose(), f).transpose();
  return out;
}

// The joint set is a product of per-agent, per-state simplices, so the
// projection factorizes row by row.
inline JointPolicy project_policy(const std::vector<Eigen::MatrixXd>& point,
                                  GreedyFloor floor) {
  JointPolicy policy;
  policy.tables.reserve(point.size());
  for (const auto& table : point) policy.tables.push_back(project_table(table, floor));
  return policy;
}

}  // namespace gumg

#endif  // GUMG_PROJECTION_HPP

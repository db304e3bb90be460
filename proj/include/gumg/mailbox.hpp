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

#ifndef GUMG_MAILBOX_HPP
#define GUMG_MAILBOX_HPP

#include <Eigen/Dense>

#include <atomic>
#include <optional>
#include <string>
#include <vector>

#include "gumg/error.hpp"

namespace gumg {

// Simulated broadcast channel: one slot per agent holding the latest
// occupancy estimate (and policy) it published. Reads are counted so tests
// can assert that decoupled agents never consult it.
class Mailbox {
 public:
  explicit Mailbox(int n_agents)
      : occupancy_(n_agents), policy_(n_agents) {}

  Mailbox(const Mailbox&) = delete;
  Mailbox& operator=(const Mailbox&) = delete;

  int n_agents() const { return static_cast<int>(occupancy_.size()); }

  void publish(int agent, Eigen::MatrixXd occupancy, Eigen::MatrixXd policy) {
    occupancy_.at(agent) = std::move(occupancy);
    policy_.at(agent) = std::move(policy);
  }

  bool has(int agent) const { return occupancy_.at(agent).has_value(); }

  const Eigen::MatrixXd& read_occupancy(int agent) const {
    reads_.fetch_add(1, std::memory_order_relaxed);
    require(has(agent), ErrorCode::kInvalidArgument,
            "mailbox slot " + std::to_string(agent) + " is empty");
    return *occupancy_[agent];
  }

  const Eigen::MatrixXd& read_policy(int agent) const {
    reads_.fetch_add(1, std::memory_order_relaxed);
    require(policy_.at(agent).has_value(), ErrorCode::kInvalidArgument,
            "mailbox slot " + std::to_string(agent) + " is empty");
    return *policy_[agent];
  }

  long reads() const { return reads_.load(std::memory_order_relaxed); }

  void clear() {
    for (auto& o : occupancy_) o.reset();
    for (auto& p : policy_) p.reset();
  }

 private:
  std::vector<std::optional<Eigen::MatrixXd>> occupancy_;
  std::vector<std::optional<Eigen::MatrixXd>> policy_;
  mutable std::atomic<long> reads_{0};
};

}  // namespace gumg

#endif  // GUMG_MAILBOX_HPP

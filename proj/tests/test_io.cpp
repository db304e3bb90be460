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

#include <filesystem>
#include <sstream>

#include "gumg/gumg.hpp"
#include "gumg/io.hpp"

namespace gumg {
namespace {

namespace fs = std::filesystem;

const fs::path kConfigs = fs::path(GUMG_SOURCE_DIR) / "configs";

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(GameJson, RoundTrips) {
  const GameSpec game = corpus_game(7);
  const GameSpec back = game_from_json(game_to_json(game));
  EXPECT_EQ(back.transition(), game.transition());
  EXPECT_EQ(back.initial_dist(), game.initial_dist());
  EXPECT_EQ(back.action_counts(), game.action_counts());
  EXPECT_EQ(back.discount(), game.discount());
}

TEST(GameJson, MissingAndDuplicateRows) {
  Json j = game_to_json(corpus_game(0));
  Json dup = j;
  dup["transition"].push_back(dup["transition"][0]);
  EXPECT_NE(message_of([&] { game_from_json(dup); }).find("duplicate transition row"), std::string::npos);
  Json missing = j;
  missing["transition"].erase(missing["transition"].begin() + 2);
  EXPECT_NE(message_of([&] { game_from_json(missing); }).find("missing transition row"),
            std::string::npos);
  Json bad = j;
  bad["transition"][0]["probs"] = {0.5, 0.4};
  EXPECT_NE(message_of([&] { game_from_json(bad); }).find("NonStochasticRow"), std::string::npos);
}

TEST(ParseJson, ReportsLineAndColumn) {
  const std::string text = "{\n  // comment\n  \"a\": 1,\n  \"b\": ]\n}\n";
  const std::string msg = message_of([&] { parse_json(text, "cfg.json"); });
  EXPECT_NE(msg.find("ConfigError: cfg.json:4:"), std::string::npos) << msg;
}

TEST(ParseJson, AcceptsComments) {
  const Json j = parse_json("/* block */ {\"x\": 2 // tail\n}", "inline");
  EXPECT_EQ(j["x"].get<int>(), 2);
}

TEST(PolicyCsv, RoundTrips) {
  const GameSpec game = corpus_game(1);
  Rng rng(3);
  const JointPolicy policy = random_interior_policy(game, rng);
  std::stringstream ss;
  write_policy_csv(ss, policy);
  const JointPolicy back = read_policy_csv(ss, game);
  EXPECT_EQ((back - policy).norm(), 0.0);
}

TEST(PolicyCsv, ErrorsNameTheLocation) {
  const GameSpec game = corpus_game(0);
  std::stringstream uniform;
  write_policy_csv(uniform, JointPolicy::uniform(game));
  std::string text = uniform.str();

  std::string skewed = text;
  const auto pos = skewed.find("1,1,0,0.5");
  ASSERT_NE(pos, std::string::npos);
  skewed.replace(pos, 9, "1,1,0,0.7");
  std::stringstream a(skewed);
  const std::string msg = message_of([&] { read_policy_csv(a, game); });
  EXPECT_NE(msg.find("agent 1, state 1"), std::string::npos) << msg;

  std::stringstream b(text.substr(0, text.rfind("0,1,1")));
  EXPECT_NE(message_of([&] { read_policy_csv(b, game); }).find("lacks entries for agent"),
            std::string::npos);
  std::stringstream c("agent,state,action,prob\n0;0;0;1\n");
  EXPECT_NE(message_of([&] { read_policy_csv(c, game); }).find("line 2 is malformed"),
            std::string::npos);
  std::stringstream d("0,5,0,1\n");
  EXPECT_NE(message_of([&] { read_policy_csv(d, game); }).find("out of range"), std::string::npos);
}

TEST(TraceCsv, HeaderAndEmptyColumns) {
  RunTrace trace;
  TraceRow row;
  row.iter = 3;
  row.potential = 0.5;
  row.grad_map_norm = 0.25;
  row.samples = 10;
  trace.rows.push_back(row);
  std::stringstream ss;
  write_trace_csv(ss, trace);
  EXPECT_EQ(ss.str(), "iter,potential,ne_gap,grad_map_norm,occ_gap,kl_occ_gap,samples\n3,0.5,,0.25,,,10\n");
}

TEST(RunConfig, BundledConfigsLoad) {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".cfg") continue;
    const RunConfig rc = load_run_config(entry.path());
    ASSERT_TRUE(rc.game.has_value()) << entry.path();
    EXPECT_EQ(static_cast<int>(rc.utilities.size()), rc.game->n_agents());
  }
}

TEST(RunConfig, ImitationGridStartsNearReportedPotential) {
  const RunConfig rc = load_run_config(kConfigs / "imitation_grid.cfg");
  EXPECT_EQ(rc.learner.mode, LearnerMode::kOnPolicy);
  EXPECT_EQ(rc.learner.batch_size, 512);
  EXPECT_EQ(rc.learner.horizon, 20);
  EXPECT_DOUBLE_EQ(rc.learner.eta, 0.01);
  const JointPolicy init = rc.init.value_or(JointPolicy::uniform(*rc.game));
  const double phi = potential(*rc.game, rc.utilities, init, rc.learner.common_interest);
  EXPECT_NEAR(phi, -1.0712, 0.15);
  const auto gaps = occupancy_gaps(rc.utilities, exact_marginals(*rc.game, init).marginals);
  EXPECT_NEAR(gaps.kl_occ_gap, -phi, 1e-12);
}

TEST(RunConfig, CoverageGridStartsInReportedBand) {
  const RunConfig rc = load_run_config(kConfigs / "coverage_grid.cfg");
  EXPECT_TRUE(rc.learner.common_interest);
  const JointPolicy init = rc.init.value_or(JointPolicy::uniform(*rc.game));
  const double phi = potential(*rc.game, rc.utilities, init, true);
  const auto gaps = occupancy_gaps(rc.utilities, exact_marginals(*rc.game, init).marginals);
  EXPECT_NEAR(phi, -1.8612, 0.15);
  EXPECT_GE(gaps.occ_gap, 1.0);
  EXPECT_LE(gaps.occ_gap, 1.6);
}

TEST(RunConfig, ExplorationGridStartsNearReportedPotential) {
  const RunConfig rc = load_run_config(kConfigs / "exploration_grid.cfg");
  const JointPolicy init = rc.init.value_or(JointPolicy::uniform(*rc.game));
  EXPECT_NEAR(potential(*rc.game, rc.utilities, init, rc.learner.common_interest), 2.9909, 0.15);
}

TEST(RunConfig, RejectsUnknownNames) {
  Json j = load_config_source(kConfigs / "smoke_exploration.cfg").json;
  Json bad_mode = j;
  bad_mode["mode"] = "async";
  EXPECT_NE(message_of([&] { run_config_from_json(bad_mode, kConfigs); }).find("unknown mode"),
            std::string::npos);
  Json bad_kind = j;
  bad_kind["utility"]["kind"] = "mystery";
  EXPECT_NE(message_of([&] { run_config_from_json(bad_kind, kConfigs); }).find("unknown utility kind"),
            std::string::npos);
  Json bad_builder = j;
  bad_builder["game"] = Json{{"builder", "torus"}};
  EXPECT_NE(message_of([&] { run_config_from_json(bad_builder, kConfigs); }).find("unknown game builder"),
            std::string::npos);
}

TEST(Manifest, ReplaysTheSameConfig) {
  RunConfig rc = load_run_config(kConfigs / "smoke_exploration.cfg");
  rc.learner.seed = 99;
  const fs::path dir = fs::temp_directory_path() / "gumg_manifest_test";
  fs::create_directories(dir);
  write_text(dir / "m.json", make_manifest(rc, "2026-01-01T00:00:00Z").dump(2));
  const RunConfig back = load_run_config(dir / "m.json");
  EXPECT_EQ(back.learner.seed, 99u);
  EXPECT_EQ(back.learner.iterations, rc.learner.iterations);
  EXPECT_EQ(back.game->transition(), rc.game->transition());
  fs::remove_all(dir);
}

}  // namespace
}  // namespace gumg

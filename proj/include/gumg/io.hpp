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

#ifndef GUMG_IO_HPP
#define GUMG_IO_HPP

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gumg/envs.hpp"
#include "gumg/error.hpp"
#include "gumg/game.hpp"
#include "gumg/learner.hpp"
#include "gumg/occupancy.hpp"
#include "gumg/utilities.hpp"

#ifndef GUMG_VERSION
#define GUMG_VERSION "0.1.0"
#endif

namespace gumg {

using Json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kTraceHeader =
    "iter,potential,ne_gap,grad_map_norm,occ_gap,kl_occ_gap,samples";

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kConfig, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kConfig, "cannot write " + path.string());
  out << text;
}

// Parses JSON with // and /* */ comments allowed. Syntax errors carry the
// line and column.
inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < limit; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    fail(ErrorCode::kConfig, origin + ":" + std::to_string(line) + ":" +
                                 std::to_string(column) + ": " + e.what());
  }
}

inline Json load_json(const fs::path& path) { return parse_json(read_text(path), path.string()); }

namespace detail {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kConfig, std::string("field '") + key + "': " + e.what());
  }
}

inline const Json& need(const Json& j, const char* key) {
  require(j.is_object() && j.contains(key), ErrorCode::kConfig,
          std::string("missing field '") + key + "'");
  return j[key];
}

inline Eigen::VectorXd vector_from(const Json& j, const char* what) {
  require(j.is_array(), ErrorCode::kConfig, std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    require(j[k].is_number(), ErrorCode::kConfig, std::string(what) + " must hold numbers");
    v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  }
  return v;
}

inline Eigen::MatrixXd matrix_from(const Json& j, const char* what) {
  require(j.is_array() && !j.empty(), ErrorCode::kConfig,
          std::string(what) + " must be a non-empty array of rows");
  const auto cols = vector_from(j[0], what).size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = vector_from(j[r], what);
    require(row.size() == cols, ErrorCode::kConfig, std::string(what) + " is ragged");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

inline Json vector_to(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

}  // namespace detail

// {n_agents, n_states, action_counts, gamma, mu, transition: [{state,
// joint_action: [a_0, ..], probs: [..]}]}; every (state, joint action) row
// must appear exactly once.
inline GameSpec game_from_json(const Json& j) {
  GameDescription raw;
  raw.n_agents = detail::need(j, "n_agents").get<int>();
  raw.n_states = detail::need(j, "n_states").get<int>();
  raw.action_counts = detail::need(j, "action_counts").get<std::vector<int>>();
  raw.discount = detail::need(j, "gamma").get<double>();
  raw.initial_dist = detail::vector_from(detail::need(j, "mu"), "mu");
  require(static_cast<int>(raw.action_counts.size()) == raw.n_agents,
          ErrorCode::kDimensionMismatch, "action_counts length differs from n_agents");
  require(raw.n_states >= 1, ErrorCode::kDimensionMismatch, "n_states must be positive");
  for (int c : raw.action_counts)
    require(c >= 1, ErrorCode::kDimensionMismatch, "action counts must be positive");
  JointActionCodec codec(raw.action_counts);
  const Eigen::Index rows = static_cast<Eigen::Index>(raw.n_states) * codec.size();
  raw.transition = RowMatrix::Zero(rows, raw.n_states);
  std::vector<bool> seen(static_cast<std::size_t>(rows), false);
  for (const auto& entry : detail::need(j, "transition")) {
    const int s = detail::need(entry, "state").get<int>();
    const auto actions = detail::need(entry, "joint_action").get<std::vector<int>>();
    require(s >= 0 && s < raw.n_states, ErrorCode::kDimensionMismatch,
            "transition state out of range");
    require(static_cast<int>(actions.size()) == raw.n_agents, ErrorCode::kDimensionMismatch,
            "joint_action length differs from n_agents");
    for (int i = 0; i < raw.n_agents; ++i)
      require(actions[i] >= 0 && actions[i] < raw.action_counts[i],
              ErrorCode::kDimensionMismatch, "joint_action entry out of range");
    const Eigen::Index r = static_cast<Eigen::Index>(s) * codec.size() + codec.encode(actions);
    require(!seen[r], ErrorCode::kConfig,
            "duplicate transition row for state " + std::to_string(s));
    seen[r] = true;
    const auto probs = detail::vector_from(detail::need(entry, "probs"), "probs");
    require(probs.size() == raw.n_states, ErrorCode::kDimensionMismatch,
            "probs length differs from n_states");
    raw.transition.row(r) = probs.transpose();
  }
  for (Eigen::Index r = 0; r < rows; ++r)
    require(seen[r], ErrorCode::kConfig,
            "missing transition row for state " + std::to_string(r / codec.size()) +
                ", joint action " + std::to_string(r % codec.size()));
  return validate_game(raw);
}

inline Json game_to_json(const GameSpec& game) {
  Json j;
  j["n_agents"] = game.n_agents();
  j["n_states"] = game.n_states();
  j["action_counts"] = game.action_counts();
  j["gamma"] = game.discount();
  j["mu"] = detail::vector_to(game.initial_dist());
  Json rows = Json::array();
  for (int s = 0; s < game.n_states(); ++s) {
    for (int a = 0; a < game.n_joint(); ++a) {
      std::vector<int> actions(game.n_agents());
      for (int i = 0; i < game.n_agents(); ++i) actions[i] = game.codec().action_of(a, i);
      rows.push_back({{"state", s},
                      {"joint_action", actions},
                      {"probs", detail::vector_to(game.transition_row(s, a).transpose())}});
    }
  }
  j["transition"] = std::move(rows);
  return j;
}

// Policy CSV: optional header, then rows "agent,state,action,prob" covering
// every entry.
inline JointPolicy read_policy_csv(std::istream& in, const GameSpec& game) {
  JointPolicy policy;
  std::vector<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> seen;
  for (int i = 0; i < game.n_agents(); ++i) {
    policy.tables.push_back(Eigen::MatrixXd::Zero(game.n_states(), game.n_actions(i)));
    seen.push_back(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
        game.n_states(), game.n_actions(i), false));
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("agent", 0) == 0) continue;
    int agent = 0, state = 0, action = 0;
    double prob = 0.0;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream ss(line);
    ss >> agent >> c1 >> state >> c2 >> action >> c3 >> prob;
    require(!ss.fail() && c1 == ',' && c2 == ',' && c3 == ',', ErrorCode::kConfig,
            "policy line " + std::to_string(line_no) + " is malformed");
    require(agent >= 0 && agent < game.n_agents() && state >= 0 && state < game.n_states() &&
                action >= 0 && action < game.n_actions(agent),
            ErrorCode::kDimensionMismatch,
            "policy line " + std::to_string(line_no) + " is out of range");
    policy[agent](state, action) = prob;
    seen[agent](state, action) = true;
  }
  for (int i = 0; i < game.n_agents(); ++i)
    for (int s = 0; s < game.n_states(); ++s)
      require(seen[i].row(s).all(), ErrorCode::kConfig,
              "policy file lacks entries for agent " + std::to_string(i) + ", state " +
                  std::to_string(s));
  check_policy(game, policy);
  return policy;
}

inline void write_policy_csv(std::ostream& out, const JointPolicy& policy) {
  out << "agent,state,action,prob\n";
  for (int i = 0; i < policy.n_agents(); ++i)
    for (Eigen::Index s = 0; s < policy[i].rows(); ++s)
      for (Eigen::Index a = 0; a < policy[i].cols(); ++a)
        out << i << ',' << s << ',' << a << ',' << format_number(policy[i](s, a)) << '\n';
}

inline void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    out << r.iter << ',' << format_number(r.potential) << ',' << opt(r.ne_gap) << ','
        << format_number(r.grad_map_norm) << ',' << opt(r.occ_gap) << ',' << opt(r.kl_occ_gap)
        << ',' << r.samples << '\n';
  }
}

// Everything a run needs, resolved against the game.
struct RunConfig {
  std::optional<GameSpec> game;
  std::vector<UtilitySpec> utilities;
  LearnerConfig learner;
  std::optional<JointPolicy> init;
  Json source;  // the configuration as read, with overrides applied
  fs::path base_dir;
};

// Game block: {"file": path} | {"builder": "grid", side, n_agents, slip,
// start: uniform|corner, gamma} | {"builder": "random", seed, n_states,
// action_counts, gamma, concentration} | {"builder": "corpus", index}.
inline GameSpec game_from_config(const Json& j, const fs::path& base_dir) {
  if (j.is_string()) return game_from_json(load_json(base_dir / j.get<std::string>()));
  if (j.contains("file")) return game_from_json(load_json(base_dir / j["file"].get<std::string>()));
  const auto builder = detail::get_or<std::string>(j, "builder", "");
  if (builder == "grid") {
    GridSpec g;
    g.side = detail::get_or(j, "side", g.side);
    g.n_agents = detail::get_or(j, "n_agents", g.n_agents);
    g.slip = detail::get_or(j, "slip", g.slip);
    g.discount = detail::get_or(j, "gamma", g.discount);
    const auto start = detail::get_or<std::string>(j, "start", "uniform");
    require(start == "uniform" || start == "corner", ErrorCode::kConfig,
            "grid start must be uniform or corner");
    g.start = start == "corner" ? GridStart::kCorner : GridStart::kUniform;
    return build_grid(g);
  }
  if (builder == "random") {
    return random_game(detail::get_or<std::uint64_t>(j, "seed", 1),
                       detail::need(j, "n_states").get<int>(),
                       detail::need(j, "action_counts").get<std::vector<int>>(),
                       detail::need(j, "gamma").get<double>(),
                       detail::get_or(j, "concentration", 1.0));
  }
  if (builder == "corpus") return corpus_game(detail::need(j, "index").get<int>());
  fail(ErrorCode::kConfig, "unknown game builder '" + builder + "'");
}

inline JointPolicy read_policy_file(const fs::path& path, const GameSpec& game) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kConfig, "cannot open " + path.string());
  return read_policy_csv(in, game);
}

// Policy block: "uniform" | {"file": csv} | {"builder": "grid_goal", goals,
// mix} | {"builder": "stay_biased", stay} | {"builder": "random_interior",
// seed, floor_mix}.
inline JointPolicy policy_from_config(const Json& j, const GameSpec& game,
                                      const fs::path& base_dir) {
  if (j.is_string()) {
    require(j.get<std::string>() == "uniform", ErrorCode::kConfig,
            "policy string must be 'uniform'");
    return JointPolicy::uniform(game);
  }
  if (j.contains("file")) return read_policy_file(base_dir / j["file"].get<std::string>(), game);
  const auto builder = detail::get_or<std::string>(j, "builder", "uniform");
  JointPolicy policy;
  if (builder == "uniform") {
    policy = JointPolicy::uniform(game);
  } else if (builder == "grid_goal") {
    const int side = static_cast<int>(std::lround(std::sqrt(game.n_states())));
    require(side * side == game.n_states(), ErrorCode::kConfig,
            "grid_goal needs a square grid game");
    auto goals = detail::need(j, "goals").get<std::vector<int>>();
    require(static_cast<int>(goals.size()) == game.n_agents(), ErrorCode::kConfig,
            "grid_goal needs one goal per agent");
    policy = grid_goal_policy(side, goals, detail::get_or(j, "mix", 0.2));
  } else if (builder == "stay_biased") {
    policy = stay_biased_policy(game, detail::get_or(j, "stay", 0.8));
  } else if (builder == "random_interior") {
    Rng rng(detail::get_or<std::uint64_t>(j, "seed", 1));
    policy = random_interior_policy(game, rng, detail::get_or(j, "floor_mix", 0.1));
  } else {
    fail(ErrorCode::kConfig, "unknown policy builder '" + builder + "'");
  }
  check_policy(game, policy);
  return policy;
}

namespace detail {

inline Eigen::VectorXd weights_or_uniform(const Json& j, const char* key, int n) {
  if (j.contains(key)) return vector_from(j[key], key);
  return Eigen::VectorXd::Constant(n, 1.0 / n);
}

inline Eigen::MatrixXd uniform_table(const GameSpec& game, int agent) {
  const double cells = static_cast<double>(game.n_states()) * game.n_actions(agent);
  return Eigen::MatrixXd::Constant(game.n_states(), game.n_actions(agent), 1.0 / cells);
}

}  // namespace detail

// Utility block for one agent. Targets given as {"policy": <policy block>}
// resolve to that policy's exact occupancy in this game.
inline UtilitySpec utility_from_config(const Json& j, int agent, const GameSpec& game,
                                       const fs::path& base_dir, double kl_floor) {
  const auto name = detail::need(j, "kind").get<std::string>();
  const auto kind = utility_kind_from_string(name);
  require(kind.has_value(), ErrorCode::kConfig, "unknown utility kind '" + name + "'");
  const int n = game.n_agents();
  auto target_occupancy = [&](const Json& t, bool aggregate, const Eigen::VectorXd& w) {
    if (t.is_string() && t.get<std::string>() == "uniform") return detail::uniform_table(game, agent);
    if (t.contains("table")) return detail::matrix_from(t["table"], "target table");
    const auto pol = policy_from_config(detail::need(t, "policy"), game, base_dir);
    const auto occ = exact_marginals(game, pol);
    return aggregate ? detail::weighted_sum(occ.marginals, w) : occ.marginals[agent];
  };
  UtilitySpec u;
  switch (*kind) {
    case UtilityKind::kImitation:
      u = make_imitation(agent, target_occupancy(detail::need(j, "target"), false, {}),
                         detail::get_or(j, "alpha", 1.0));
      break;
    case UtilityKind::kConsensusDiversity:
      u = make_consensus_diversity(agent, detail::weights_or_uniform(j, "weights", n),
                                   detail::get_or(j, "beta", 1.0));
      break;
    case UtilityKind::kTeamAggregate: {
      const auto inner = detail::get_or<std::string>(j, "inner", "entropy");
      require(inner == "entropy" || inner == "quadratic", ErrorCode::kConfig,
              "inner must be entropy or quadratic");
      Eigen::MatrixXd center;
      if (inner == "quadratic")
        center = j.contains("center") ? detail::matrix_from(j["center"], "center")
                                      : detail::uniform_table(game, 0);
      u = make_team_aggregate(agent, detail::weights_or_uniform(j, "mixing", n),
                              detail::get_or(j, "gamma", 1.0),
                              inner == "entropy" ? InnerConcave::kEntropy : InnerConcave::kQuadratic,
                              std::move(center));
      break;
    }
    case UtilityKind::kTeamCoverage: {
      const auto w = detail::weights_or_uniform(j, "weights", n);
      u = make_team_coverage(agent, w, target_occupancy(detail::need(j, "target"), true, w));
      u.kappa = detail::get_or(j, "kappa", 1.0);
      break;
    }
    case UtilityKind::kCollectiveExploration:
      u = make_collective_exploration(agent, detail::weights_or_uniform(j, "mixing", n),
                                      detail::get_or(j, "gamma", 1.0));
      break;
    case UtilityKind::kLinearReward: {
      std::vector<Eigen::MatrixXd> rewards(n);
      if (j.contains("tables")) {
        const auto& tables = j["tables"];
        require(tables.is_array() && static_cast<int>(tables.size()) == n, ErrorCode::kConfig,
                "linear reward tables need one entry per agent");
        for (int k = 0; k < n; ++k)
          if (!tables[k].is_null()) rewards[k] = detail::matrix_from(tables[k], "reward table");
      } else {
        // Shared reward r(s, a_k) = U[-1, 1] per agent slot, same for every agent.
        Rng rng(detail::get_or<std::uint64_t>(j, "seed", 1));
        for (int k = 0; k < n; ++k) {
          rewards[k].resize(game.n_states(), game.n_actions(k));
          for (Eigen::Index e = 0; e < rewards[k].size(); ++e)
            rewards[k].data()[e] = 2.0 * rng.uniform() - 1.0;
        }
      }
      u = make_linear_reward(agent, std::move(rewards));
      break;
    }
    case UtilityKind::kComposite:
      fail(ErrorCode::kConfig, "composite utilities are built in code, not from config");
  }
  u.kl_floor = kl_floor;
  validate_utility(u, game);
  return u;
}

inline LearnerConfig learner_from_config(const Json& j) {
  LearnerConfig c;
  const auto mode = detail::get_or<std::string>(j, "mode", "exact");
  const auto parsed = learner_mode_from_string(mode);
  require(parsed.has_value(), ErrorCode::kConfig, "unknown mode '" + mode + "'");
  c.mode = *parsed;
  c.eta = detail::get_or(j, "eta", c.eta);
  c.iterations = detail::get_or(j, "T", c.iterations);
  c.batch_size = detail::get_or(j, "M", c.batch_size);
  c.horizon = detail::get_or(j, "H", c.horizon);
  c.alpha = detail::get_or(j, "alpha", c.alpha);
  c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
  c.eval_every = detail::get_or(j, "eval_every", c.eval_every);
  const auto scale = detail::get_or<std::string>(j, "gradient_scale", "return");
  const auto parsed_scale = gradient_scale_from_string(scale);
  require(parsed_scale.has_value(), ErrorCode::kConfig,
          "gradient_scale must be return or occupancy");
  c.scale = *parsed_scale;
  c.eval_ne_gap = detail::get_or(j, "eval_ne_gap", c.eval_ne_gap);
  if (j.contains("inner")) {
    const auto& in = j["inner"];
    c.inner.stepsize = detail::get_or(in, "stepsize", c.inner.stepsize);
    c.inner.max_iter = detail::get_or(in, "max_iter", c.inner.max_iter);
    c.inner.tol = detail::get_or(in, "tol", c.inner.tol);
    c.inner.uniform_restart = detail::get_or(in, "uniform_restart", c.inner.uniform_restart);
  }
  c.threads = detail::get_or(j, "threads", c.threads);
  validate_config(c);
  return c;
}

// Utilities come from "utility" (one block for every agent) or "utilities"
// (one block per agent). common_interest defaults to whether all agents share
// one F.
inline RunConfig run_config_from_json(const Json& j, const fs::path& base_dir) {
  RunConfig rc;
  rc.source = j;
  rc.base_dir = base_dir;
  rc.game = game_from_config(detail::need(j, "game"), base_dir);
  const GameSpec& game = *rc.game;
  const double kl_floor = detail::get_or(j, "epsilon_kl", kDefaultKlFloor);
  if (j.contains("utilities")) {
    const auto& blocks = j["utilities"];
    require(blocks.is_array() && static_cast<int>(blocks.size()) == game.n_agents(),
            ErrorCode::kConfig, "utilities needs one block per agent");
    for (int i = 0; i < game.n_agents(); ++i)
      rc.utilities.push_back(utility_from_config(blocks[i], i, game, base_dir, kl_floor));
  } else {
    const auto& block = detail::need(j, "utility");
    for (int i = 0; i < game.n_agents(); ++i)
      rc.utilities.push_back(utility_from_config(block, i, game, base_dir, kl_floor));
  }
  rc.learner = learner_from_config(j);
  rc.learner.common_interest =
      detail::get_or(j, "common_interest", identical_interest(rc.utilities));
  if (j.contains("init")) rc.init = policy_from_config(j["init"], game, base_dir);
  return rc;
}

struct ConfigSource {
  Json json;
  fs::path base_dir;
};

// Accepts a run config or a manifest written beside a trace.
inline ConfigSource load_config_source(const fs::path& path) {
  ConfigSource src{load_json(path), fs::absolute(path).parent_path()};
  if (src.json.contains("config") && src.json.contains("version")) {
    if (src.json.contains("base_dir")) src.base_dir = src.json["base_dir"].get<std::string>();
    Json inner = src.json["config"];
    src.json = std::move(inner);
  }
  return src;
}

inline RunConfig load_run_config(const fs::path& path) {
  auto src = load_config_source(path);
  return run_config_from_json(src.json, src.base_dir);
}

inline Json make_manifest(const RunConfig& rc, const std::string& started_at) {
  Json m;
  m["version"] = GUMG_VERSION;
  m["seed"] = rc.learner.seed;
  m["started_at"] = started_at;
  m["base_dir"] = fs::absolute(rc.base_dir).string();
  Json config = rc.source;
  config["seed"] = rc.learner.seed;
  m["config"] = std::move(config);
  return m;
}

}  // namespace gumg

#endif  // GUMG_IO_HPP

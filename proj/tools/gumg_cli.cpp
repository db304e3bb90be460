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


#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gumg/gumg.hpp"
#include "gumg/io.hpp"

namespace {

namespace fs = std::filesystem;
using gumg::Json;

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("GUMG_LOG");
  if (env == nullptr) return LogLevel::kInfo;
  const std::string v = env;
  if (v == "error") return LogLevel::kError;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

std::mutex log_mutex;

void log(LogLevel level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  static constexpr const char* kNames[] = {"error", "info", "debug"};
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "[" << kNames[static_cast<int>(level)] << "] " << msg << '\n';
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<int> iterations;
  std::optional<double> eta;
  std::optional<int> batch_size;
  std::optional<int> horizon;
  std::optional<double> alpha;
  std::optional<int> eval_every;
  std::optional<bool> eval_ne_gap;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed (overrides the config)");
    cmd->add_option("--mode", mode, "exact, onpolicy or generative");
    cmd->add_option("--T", iterations, "Iterations");
    cmd->add_option("--eta", eta, "Stepsize");
    cmd->add_option("--M", batch_size, "Trajectories per batch");
    cmd->add_option("--H", horizon, "Trajectory horizon");
    cmd->add_option("--alpha", alpha, "Greedy floor");
    cmd->add_option("--eval-every", eval_every, "Evaluation cadence");
    cmd->add_option("--ne-gap", eval_ne_gap, "Evaluate the NE-gap (true/false)");
  }

  void apply(Json& j) const {
    if (seed) j["seed"] = *seed;
    if (mode) j["mode"] = *mode;
    if (iterations) j["T"] = *iterations;
    if (eta) j["eta"] = *eta;
    if (batch_size) j["M"] = *batch_size;
    if (horizon) j["H"] = *horizon;
    if (alpha) j["alpha"] = *alpha;
    if (eval_every) j["eval_every"] = *eval_every;
    if (eval_ne_gap) j["eval_ne_gap"] = *eval_ne_gap;
  }
};

gumg::RunTrace execute(gumg::RunConfig& rc, int threads) {
  rc.learner.threads = threads;
  rc.learner.on_warning = [](const std::string& m) { log(LogLevel::kInfo, "warning: " + m); };
  log(LogLevel::kDebug, "mode " + std::string(gumg::to_string(rc.learner.mode)) + ", T = " +
                            std::to_string(rc.learner.iterations));
  auto trace = gumg::run(*rc.game, rc.utilities, rc.learner, rc.init);
  log(LogLevel::kDebug, "finished in " + std::to_string(trace.rows.back().wall_seconds) + " s");
  return trace;
}

void write_outputs(const fs::path& dir, const std::string& stem, const gumg::RunConfig& rc,
                   const gumg::RunTrace& trace, const std::string& started_at) {
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / (stem + ".csv"), std::ios::binary);
    gumg::write_trace_csv(csv, trace);
  }
  {
    std::ofstream pol(dir / (stem + "_policy.csv"), std::ios::binary);
    gumg::write_policy_csv(pol, trace.final_policy);
  }
  gumg::write_text(dir / (stem + "_manifest.json"),
                   gumg::make_manifest(rc, started_at).dump(2) + "\n");
}

int cmd_run(const std::string& config_path, const fs::path& out_dir, const Overrides& ov,
            int threads) {
  const std::string started_at = utc_timestamp();
  auto src = gumg::load_config_source(config_path);
  ov.apply(src.json);
  auto rc = gumg::run_config_from_json(src.json, src.base_dir);
  const auto trace = execute(rc, threads);
  write_outputs(out_dir, "trace", rc, trace, started_at);
  const auto& last = trace.rows.back();
  std::ostringstream msg;
  msg << "iter " << last.iter << " potential " << gumg::format_number(last.potential);
  if (last.ne_gap) msg << " ne_gap " << gumg::format_number(*last.ne_gap);
  log(LogLevel::kInfo, msg.str());
  return 0;
}

Json gap_json(const gumg::GapReport& gap) {
  Json j;
  j["ne_gap"] = gap.gaps;
  j["max_ne_gap"] = gap.max_gap;
  j["inner_iterations"] = gap.iterations;
  j["inner_surplus"] = gap.residual_surplus;
  j["converged"] = gap.all_converged;
  return j;
}

int cmd_eval(const std::string& config_path, const std::string& game_path,
             const std::string& policy_path, const std::vector<double>& etas, bool mpe) {
  auto src = gumg::load_config_source(config_path);
  if (!game_path.empty()) src.json["game"] = Json{{"file", fs::absolute(game_path).string()}};
  src.json.erase("init");
  auto rc = gumg::run_config_from_json(src.json, src.base_dir);
  const auto& game = *rc.game;
  const auto policy = gumg::read_policy_file(policy_path, game);

  Json report;
  report["potential"] =
      gumg::potential(game, rc.utilities, policy, rc.learner.common_interest);
  report["gap"] = gap_json(gumg::ne_gap(game, rc.utilities, policy, rc.learner.inner));
  Json st = Json::array();
  for (double eta : etas) {
    const auto s = gumg::stationarity(game, rc.utilities, policy, eta, rc.learner.alpha);
    st.push_back({{"eta", eta},
                  {"grad_map_norm", s.grad_map_norm},
                  {"fixed_point_residual", s.fixed_point_residual},
                  {"fos_surplus", s.fos_surplus}});
  }
  report["stationarity"] = std::move(st);
  const auto bounds = gumg::constant_bounds(game, rc.utilities);
  report["beta"] = bounds.beta;
  report["c_loose"] = bounds.c_finite ? Json(bounds.c_loose) : Json("inf");
  if (mpe) {
    const auto m = gumg::mpe_check(game, rc.utilities, policy, rc.learner.inner);
    report["mpe_max_gap"] = m.max_gap;
    report["mpe_worst_state"] = m.worst_state;
  }
  std::cout << std::setprecision(17) << report.dump(2) << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, const fs::path& out_dir, const std::string& axis,
              const std::vector<double>& values, const Overrides& ov, int threads) {
  static const std::map<std::string, std::string> kKeys = {
      {"T", "T"}, {"M", "M"}, {"H", "H"}, {"alpha", "alpha"}, {"eta", "eta"}};
  const auto key = kKeys.find(axis);
  if (key == kKeys.end()) gumg::fail(gumg::ErrorCode::kConfig, "unknown sweep axis " + axis);
  for (double v : values)
    gumg::require(v > 0.0, gumg::ErrorCode::kConfig, "sweep values must be positive");
  const std::string started_at = utc_timestamp();
  auto src = gumg::load_config_source(config_path);
  ov.apply(src.json);

  const bool integral = axis == "T" || axis == "M" || axis == "H";
  std::vector<std::string> rows(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  auto job = [&](std::size_t k) {
    try {
      Json j = src.json;
      if (integral) {
        j[key->second] = static_cast<long long>(std::llround(values[k]));
      } else {
        j[key->second] = values[k];
      }
      auto rc = gumg::run_config_from_json(j, src.base_dir);
      const auto trace = execute(rc, 1);
      std::ostringstream label;
      label << axis << "_" << gumg::format_number(values[k]);
      write_outputs(out_dir, "trace_" + label.str(), rc, trace, started_at);
      double gap_total = 0.0;
      int gap_count = 0;
      for (const auto& r : trace.rows) {
        if (r.ne_gap && r.iter > 0) {
          gap_total += *r.ne_gap;
          ++gap_count;
        }
      }
      const auto& last = trace.rows.back();
      auto opt = [](const std::optional<double>& x) {
        return x ? gumg::format_number(*x) : std::string();
      };
      std::ostringstream row;
      row << gumg::format_number(values[k]) << ',' << gumg::format_number(last.potential) << ','
          << opt(last.ne_gap) << ','
          << (gap_count ? gumg::format_number(gap_total / gap_count) : std::string()) << ','
          << gumg::format_number(last.grad_map_norm) << ',' << opt(last.occ_gap) << ','
          << opt(last.kl_occ_gap) << ',' << last.samples;
      rows[k] = row.str();
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, values.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < values.size(); k += workers) job(k);
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  fs::create_directories(out_dir);
  std::ofstream summary(out_dir / "summary.csv", std::ios::binary);
  summary << "value,potential,ne_gap,avg_ne_gap,grad_map_norm,occ_gap,kl_occ_gap,samples\n";
  for (const auto& r : rows) summary << r << '\n';
  log(LogLevel::kInfo, "wrote " + std::to_string(values.size()) + " traces to " + out_dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy gradient learning in general-utility Markov games"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  int threads = 1;
  Overrides overrides;

  auto* run = app.add_subcommand("run", "Run the learner and write a trace");
  run->add_option("--config", config, "Run configuration file")->required();
  run->add_option("--out-dir", out_dir, "Output directory");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  overrides.add_to(run);

  std::string game_path;
  std::string policy_path;
  std::vector<double> etas = {0.01, 0.1, 1.0};
  bool mpe = false;
  auto* eval = app.add_subcommand("eval", "Evaluate equilibrium metrics of a policy");
  eval->add_option("--config", config, "Configuration holding the utilities")->required();
  eval->add_option("--game", game_path, "Game file (overrides the config's game)");
  eval->add_option("--policy", policy_path, "Policy CSV")->required();
  eval->add_option("--eta", etas, "Stepsizes for the stationarity residual");
  eval->add_flag("--mpe", mpe, "Also check every Dirac initial state");

  std::string axis;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Run one trace per parameter value");
  sweep->add_option("--config", config, "Run configuration file")->required();
  sweep->add_option("--out-dir", out_dir, "Output directory");
  sweep->add_option("--axis", axis, "T, M, H, alpha or eta")->required();
  sweep->add_option("--values", values, "Parameter values")->required()->delimiter(',');
  sweep->add_option("--threads", threads, "Parallel configurations")->check(CLI::PositiveNumber);
  overrides.add_to(sweep);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out_dir, overrides, threads);
    if (*eval) return cmd_eval(config, game_path, policy_path, etas, mpe);
    if (*sweep) return cmd_sweep(config, out_dir, axis, values, overrides, threads);
  } catch (const gumg::Error& e) {
    log(LogLevel::kError, e.what());
    return 2;
  } catch (const std::exception& e) {
    log(LogLevel::kError, e.what());
    return 1;
  }
  return 0;
}

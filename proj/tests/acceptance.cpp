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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gumg/gumg.hpp"
#include "gumg/io.hpp"
#include "oracles.hpp"

#ifndef GUMG_SOURCE_DIR
#define GUMG_SOURCE_DIR "."
#endif

namespace {

using namespace gumg;
using oracle::Kind;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double sup_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

LearnerConfig quiet_exact(double eta, int iterations) {
  LearnerConfig c;
  c.mode = LearnerMode::kExact;
  c.eta = eta;
  c.iterations = iterations;
  c.scale = GradientScale::kOccupancy;
  c.eval_ne_gap = false;
  c.eval_occupancy_gaps = false;
  return c;
}

// 1. Exact gradient against central differences.
Outcome gradient_correctness() {
  constexpr double kTol = 1e-5;
  constexpr double kStep = 1e-6;
  double worst = 0.0;
  std::string where;
  int checks = 0;
  for (int g = 0; g < kCorpusSize; ++g) {
    const GameSpec game = corpus_game(g);
    for (Kind kind : oracle::kAllKinds) {
      Rng rng(1000 + g, {static_cast<std::uint64_t>(kind)});
      const auto utils = oracle::make_utilities(game, kind, rng);
      for (int p = 0; p < 3; ++p) {
        const JointPolicy policy = random_interior_policy(game, rng);
        for (int i = 0; i < game.n_agents(); ++i) {
          const auto exact = exact_gradient(game, utils, policy, i).table;
          const auto fd = finite_difference_gradient(game, utils, policy, i, kStep).table;
          const double rel = sup_norm(exact - fd) / std::max(sup_norm(fd), 1e-300);
          ++checks;
          if (rel > worst) {
            worst = rel;
            where = fmt("game %d %s agent %d", g, oracle::name(kind), i);
          }
        }
      }
    }
  }
  return {worst <= kTol, fmt("max relative sup-norm error %.3g over %d checks (%s), tol %g",
                             worst, checks, where.c_str(), kTol)};
}

// 2. Linear-solve occupancy against the truncated power series.
Outcome occupancy_oracle() {
  double worst_excess = -1.0;
  double worst_err = 0.0;
  for (int g = 0; g < kCorpusSize; ++g) {
    const GameSpec game = corpus_game(g);
    Rng rng(2000 + g);
    for (int p = 0; p < 3; ++p) {
      const JointPolicy policy = p == 0 ? JointPolicy::uniform(game)
                                        : random_interior_policy(game, rng, 0.0);
      const Eigen::VectorXd d = exact_state_occupancy(game, policy);
      const Eigen::VectorXd series = oracle::series_occupancy(game, policy, 200);
      const double err = (d - series).cwiseAbs().maxCoeff();
      const double gm = game.discount();
      const double bound = std::pow(gm, 200) / (1.0 - gm) + 1e-9;
      worst_err = std::max(worst_err, err);
      worst_excess = std::max(worst_excess, err - bound);
    }
  }
  return {worst_excess <= 0.0,
          fmt("max sup-norm error %.3g, bound gamma^200/(1-gamma) + 1e-9 respected on all %d games",
              worst_err, kCorpusSize)};
}

// 3. Expectation of the score-function estimator by exhaustive enumeration.
Outcome estimator_bias() {
  constexpr double kTol = 1e-10;
  double worst = 0.0;
  int cases = 0;
  for (int g = 0; g < kCorpusSize; ++g) {
    const GameSpec game = corpus_game(g);
    if (game.n_states() > 3) continue;
    Rng rng(3000 + g);
    const Kind kind = oracle::kAllKinds[g % 6];
    const auto utils = oracle::make_utilities(game, kind, rng);
    const JointPolicy policy = random_interior_policy(game, rng);
    const auto occ = exact_marginals(game, policy);
    for (int horizon = 1; horizon <= 3; ++horizon) {
      std::vector<std::vector<Eigen::MatrixXd>> rewards;
      std::vector<Eigen::MatrixXd> expected;
      for (int i = 0; i < game.n_agents(); ++i) {
        rewards.push_back(pseudo_rewards(utils[i], occ.marginals));
        expected.push_back(Eigen::MatrixXd::Zero(game.n_states(), game.n_actions(i)));
      }
      oracle::enumerate_trajectories(game, policy, horizon, [&](const Trajectory& t, double prob) {
        std::span<const Trajectory> one(&t, 1);
        for (int i = 0; i < game.n_agents(); ++i)
          expected[i] += prob * onpolicy_estimate(game, policy, i, one, rewards[i]);
      });
      for (int i = 0; i < game.n_agents(); ++i) {
        const auto truth = oracle::truncated_gradient(game, policy, i, rewards[i], horizon);
        worst = std::max(worst, sup_norm(expected[i] - truth));
        ++cases;
      }
    }
  }
  return {worst <= kTol,
          fmt("max |E[estimate] - truncated gradient| = %.3g over %d cases, tol %g", worst,
              cases, kTol)};
}

// 4. Potential ascent in exact mode at eta = 1 / beta.
Outcome monotone_potential() {
  constexpr double kTol = 1e-12;
  constexpr Kind kKinds[] = {Kind::kLinear, Kind::kCoverage, Kind::kExploration};
  double worst_drop = 0.0;
  double min_rise = std::numeric_limits<double>::infinity();
  int runs = 0;
  for (int g = 0; g < kCorpusSize; ++g) {
    const GameSpec game = corpus_game(g);
    for (Kind kind : kKinds) {
      Rng rng(4000 + g, {static_cast<std::uint64_t>(kind)});
      const auto utils = oracle::make_utilities(game, kind, rng, true);
      if (!identical_interest(utils)) return {false, "corpus utilities are not common-interest"};
      const double beta = constant_bounds(game, utils).beta;
      LearnerConfig c = quiet_exact(1.0 / beta, 500);
      c.common_interest = true;
      const auto trace = run(game, utils, c, random_interior_policy(game, rng));
      for (std::size_t t = 1; t < trace.rows.size(); ++t)
        worst_drop = std::max(worst_drop, trace.rows[t - 1].potential - trace.rows[t].potential);
      min_rise = std::min(min_rise, trace.rows.back().potential - trace.rows.front().potential);
      ++runs;
    }
  }
  return {worst_drop <= kTol,
          fmt("%d runs x 500 steps, largest one-step decrease %.3g (tol %g), smallest total rise %.3g",
              runs, worst_drop, kTol, min_rise)};
}

// 5. Averaged NE-gap over growing horizons.
Outcome averaged_gap_trend() {
  constexpr double kMaxRatio = 0.75;
  const GameSpec game = corpus_game(1);  // 3 agents, 3 states, 2 actions
  Rng rng(5000);
  const auto utils = oracle::make_utilities(game, Kind::kCoverage, rng, true);
  const JointPolicy init = random_interior_policy(game, rng, 0.05);
  std::vector<double> averages;
  for (int horizon : {100, 400, 1600}) {
    LearnerConfig c = quiet_exact(0.05, horizon);
    c.common_interest = true;
    c.eval_ne_gap = true;
    const auto trace = run(game, utils, c, init);
    double total = 0.0;
    for (std::size_t t = 0; t + 1 < trace.rows.size(); ++t) total += *trace.rows[t].ne_gap;
    averages.push_back(total / horizon);
  }
  const double r1 = averages[1] / averages[0];
  const double r2 = averages[2] / averages[1];
  return {r1 <= kMaxRatio && r2 <= kMaxRatio,
          fmt("averaged gaps %.4g, %.4g, %.4g for T = 100, 400, 1600; ratios %.3f, %.3f (max %.2f)",
              averages[0], averages[1], averages[2], r1, r2, kMaxRatio)};
}

// 6. Converged policies are fixed points for every stepsize and are Nash.
Outcome fixed_point() {
  constexpr double kResidualTol = 1e-5;
  constexpr double kGapTol = 1e-4;
  double worst_residual = 0.0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  int cases = 0;
  int unconverged = 0;
  for (int g = 0; g < kCorpusSize; ++g) {
    const GameSpec game = corpus_game(g);
    for (int variant = 0; variant < 2; ++variant) {
      Rng rng(6000 + g, {static_cast<std::uint64_t>(variant)});
      std::vector<UtilitySpec> utils;
      if (variant == 0) {
        utils = oracle::make_utilities(game, Kind::kExploration, rng, true);
      } else {
        // Coverage of a target realized by some interior policy.
        const JointPolicy realizer = random_interior_policy(game, rng, 0.2);
        const auto occ = exact_marginals(game, realizer);
        const Eigen::VectorXd w = oracle::random_simplex(game.n_agents(), rng);
        Eigen::MatrixXd target = Eigen::MatrixXd::Zero(game.n_states(), game.n_actions(0));
        for (int j = 0; j < game.n_agents(); ++j) target += w[j] * occ.marginals[j];
        for (int i = 0; i < game.n_agents(); ++i) utils.push_back(make_team_coverage(i, w, target));
      }
      JointPolicy policy = random_interior_policy(game, rng);
      // The learner stepsize is halved whenever a chunk fails to shrink the
      // residual.
      double eta = 0.5;
      double residual = stationarity(game, utils, policy, 1.0).fixed_point_residual;
      bool done = false;
      for (int chunk = 0; chunk < 100 && !done; ++chunk) {
        const auto trace = run(game, utils, quiet_exact(eta, 500), policy);
        const double next = stationarity(game, utils, trace.final_policy, 1.0).fixed_point_residual;
        if (next >= residual) {
          eta *= 0.5;
          continue;
        }
        policy = trace.final_policy;
        residual = next;
        done = residual <= 1e-8;
      }
      if (!done) ++unconverged;
      for (double eta : {0.01, 0.1, 1.0})
        worst_residual =
            std::max(worst_residual, stationarity(game, utils, policy, eta).fixed_point_residual);
      worst_gap = std::max(worst_gap, ne_gap(game, utils, policy, InnerSolverConfig{}).max_gap);
      ++cases;
    }
  }
  return {worst_residual <= kResidualTol && worst_gap <= kGapTol,
          fmt("%d converged runs (%d hit the iteration cap): max residual %.3g (tol %g) over "
              "eta in {0.01, 0.1, 1}, max NE-gap %.3g (tol %g)",
              cases, unconverged, worst_residual, kResidualTol, worst_gap, kGapTol)};
}

// 7. Grid experiments over five seeds.
Outcome grid_trends() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(GUMG_SOURCE_DIR) / "configs";
  constexpr int kSeeds = 5;
  auto run_seeds = [&](const char* file) {
    std::vector<RunTrace> traces;
    for (int seed = 1; seed <= kSeeds; ++seed) {
      RunConfig rc = load_run_config(dir / file);
      rc.learner.seed = static_cast<std::uint64_t>(seed);
      traces.push_back(run(*rc.game, rc.utilities, rc.learner, rc.init));
    }
    return traces;
  };
  auto mean_at = [](const std::vector<RunTrace>& traces, std::size_t row, auto field) {
    double total = 0.0;
    for (const auto& t : traces) total += field(t.rows[row]);
    return total / static_cast<double>(traces.size());
  };
  auto potential = [](const TraceRow& r) { return r.potential; };
  std::vector<std::string> notes;
  bool pass = true;

  {
    const auto traces = run_seeds("imitation_grid.cfg");
    const std::size_t last = traces[0].rows.size() - 1;
    const double rise = mean_at(traces, last, potential) - mean_at(traces, 0, potential);
    double identity = 0.0;
    for (const auto& t : traces)
      for (const auto& r : t.rows) identity = std::max(identity, std::abs(*r.kl_occ_gap + r.potential));
    const bool ok = rise >= 0.6 && identity <= 1e-12 && traces[0].rows[last].iter == 200;
    pass = pass && ok;
    notes.push_back(fmt("imitation %s: potential %.4f -> %.4f (rise %.3f >= 0.6), |kl + potential| <= %.1e",
                        ok ? "ok" : "FAIL", mean_at(traces, 0, potential),
                        mean_at(traces, last, potential), rise, identity));
  }
  {
    const auto traces = run_seeds("coverage_grid.cfg");
    const auto& rows = traces[0].rows;
    auto gap = [](const TraceRow& r) { return *r.ne_gap; };
    std::vector<double> windows;
    for (int w = 0; w < 10; ++w) {
      double total = 0.0;
      int count = 0;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].iter > 20 * w && rows[k].iter <= 20 * (w + 1)) {
          total += mean_at(traces, k, gap);
          ++count;
        }
      }
      windows.push_back(total / count);
    }
    bool monotone = true;
    for (std::size_t w = 1; w < windows.size(); ++w) monotone = monotone && windows[w] < windows[w - 1];
    const std::size_t last = rows.size() - 1;
    const double first_gap = mean_at(traces, 0, gap);
    const double last_gap = mean_at(traces, last, gap);
    const double last_kl = mean_at(traces, last, [](const TraceRow& r) { return *r.kl_occ_gap; });
    const bool ok = monotone && last_gap <= 0.2 * first_gap && last_kl <= 0.05;
    pass = pass && ok;
    std::ostringstream ws;
    for (double w : windows) ws << ' ' << fmt("%.3g", w);
    notes.push_back(fmt("coverage %s: NE-gap %.4f -> %.4f (<= 20%% of initial), windows%s %s, "
                        "kl_occ_gap ends %.4f (<= 0.05)",
                        ok ? "ok" : "FAIL", first_gap, last_gap, ws.str().c_str(),
                        monotone ? "decreasing" : "not decreasing", last_kl));
  }
  {
    const auto traces = run_seeds("exploration_grid.cfg");
    const std::size_t last = traces[0].rows.size() - 1;
    const double rise = mean_at(traces, last, potential) - mean_at(traces, 0, potential);
    const double occ = mean_at(traces, last, [](const TraceRow& r) { return *r.occ_gap; });
    const bool ok = rise >= 1.2 && occ <= 0.25;
    pass = pass && ok;
    notes.push_back(fmt("exploration %s: potential %.4f -> %.4f (rise %.3f >= 1.2), "
                        "occupancy gap ends %.4f (<= 0.25)",
                        ok ? "ok" : "FAIL", mean_at(traces, 0, potential),
                        mean_at(traces, last, potential), rise, occ));
  }
  std::string detail = "5-seed means";
  for (const auto& n : notes) detail += "\n    " + n;
  return {pass, detail};
}

// 8. NE-gap bounded by the loose constant times the stationarity surplus.
Outcome gradient_domination() {
  constexpr double kSlack = 1e-10;
  int violations = 0;
  int checks = 0;
  double worst_ratio = 0.0;
  for (int g = 0; g < kCorpusSize; ++g) {
    const GameSpec game = corpus_game(g);
    const double c_bar = constant_bounds(game, {}).c_loose;
    Rng rng(8000 + g);
    const auto utils = oracle::make_utilities(game, oracle::kAllKinds[g % 6], rng);
    for (int p = 0; p < 100; ++p) {
      const JointPolicy policy = random_interior_policy(game, rng, 0.05 + 0.3 * rng.uniform());
      const auto field = pseudo_gradient_field(game, utils, policy);
      const auto gaps = ne_gap(game, utils, policy, InnerSolverConfig{});
      for (int i = 0; i < game.n_agents(); ++i) {
        const double surplus = fos_surplus(policy[i], field[i]);
        const double bound = c_bar * surplus + kSlack;
        JointPolicy deviation = policy;
        deviation[i] = random_interior_policy(game, rng, 0.0)[i];
        const double base = agent_utility(game, utils, policy, i);
        const double random_gain = agent_utility(game, utils, deviation, i) - base;
        for (double gain : {gaps.gaps[i], random_gain}) {
          ++checks;
          if (gain > bound) ++violations;
          if (surplus > 0.0) worst_ratio = std::max(worst_ratio, gain / (c_bar * surplus));
        }
      }
    }
  }
  return {violations == 0,
          fmt("%d violations in %d checks; largest gain / (C * surplus) = %.3g", violations,
              checks, worst_ratio)};
}

// 9. Truncation bias of the occupancy estimate and 1/M variance.
Outcome envelopes() {
  const GameSpec game = corpus_game(13);  // 3 agents, 3 states, gamma 0.75
  Rng rng(9000);
  const JointPolicy policy = random_interior_policy(game, rng);
  const auto truth = exact_marginals(game, policy);
  const double gm = game.discount();
  constexpr int kSeeds = 20;
  bool pass = true;
  std::ostringstream note;

  note << "H-sweep:";
  for (int horizon : {5, 10, 20, 40}) {
    const Eigen::VectorXd d_h = oracle::series_occupancy(game, policy, horizon);
    const auto expected = marginals_from_state(d_h, policy);
    double exact_bias = 0.0;
    for (int j = 0; j < game.n_agents(); ++j)
      exact_bias = std::max(exact_bias, (expected[j] - truth.marginals[j]).cwiseAbs().sum());
    // Empirical mean over seeds with a 3 standard-error allowance per cell.
    double empirical_excess = -1.0;
    double empirical_bias = 0.0;
    for (int j = 0; j < game.n_agents(); ++j) {
      std::vector<Eigen::MatrixXd> draws;
      for (int seed = 0; seed < kSeeds; ++seed) {
        Rng r(9100 + seed, {static_cast<std::uint64_t>(horizon)});
        const auto batch = sample_batch(game, policy, 1024, horizon, Start::initial(), r);
        draws.push_back(estimate_occupancy(batch, game, policy).marginals[j]);
      }
      Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(draws[0].rows(), draws[0].cols());
      for (const auto& d : draws) mean += d / kSeeds;
      Eigen::MatrixXd var = Eigen::MatrixXd::Zero(mean.rows(), mean.cols());
      for (const auto& d : draws) var += (d - mean).cwiseAbs2() / (kSeeds - 1);
      const double se = (var / kSeeds).cwiseSqrt().sum();
      const double bias = (mean - truth.marginals[j]).cwiseAbs().sum();
      empirical_bias = std::max(empirical_bias, bias);
      empirical_excess = std::max(empirical_excess, bias - (2.0 * std::pow(gm, horizon) + 3.0 * se));
    }
    const double envelope = 2.0 * std::pow(gm, horizon);
    const bool ok = exact_bias <= envelope && empirical_excess <= 0.0;
    pass = pass && ok;
    note << fmt(" H=%d exact %.3g empirical %.3g envelope %.3g%s;", horizon, exact_bias,
                empirical_bias, envelope, ok ? "" : " FAIL");
  }

  Rng urng(9200);
  const auto utils = oracle::make_utilities(game, Kind::kCoverage, urng, true);
  std::vector<double> scaled;
  std::vector<int> sizes = {64, 256, 1024};
  for (int m : sizes) {
    std::vector<Eigen::MatrixXd> draws;
    for (int seed = 0; seed < kSeeds; ++seed) {
      Mailbox mailbox(game.n_agents());
      std::vector<std::vector<Trajectory>> batches;
      for (int j = 0; j < game.n_agents(); ++j) {
        Rng r(9300 + seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(j)});
        batches.push_back(sample_batch(game, policy, m, 20, Start::initial(), r));
        mailbox.publish(j, estimate_occupancy(batches[j], game, policy).marginals[j], policy[j]);
      }
      draws.push_back(
          onpolicy_gradient_from_batch(game, utils, policy, 0, batches[0], mailbox).table);
    }
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(draws[0].rows(), draws[0].cols());
    for (const auto& d : draws) mean += d / kSeeds;
    double var = 0.0;
    for (const auto& d : draws) var += (d - mean).squaredNorm() / (kSeeds - 1);
    scaled.push_back(var * m);
  }
  double log_mean = 0.0;
  for (double s : scaled) log_mean += std::log(s) / scaled.size();
  const double fit = std::exp(log_mean);
  bool within = true;
  for (double s : scaled) within = within && s <= 2.0 * fit && s >= fit / 2.0;
  const double slope = std::log(scaled[2] / sizes[2] / (scaled[0] / sizes[0])) /
                       std::log(static_cast<double>(sizes[2]) / sizes[0]);
  pass = pass && within;
  note << fmt("\n    M-sweep: M*variance %.4g, %.4g, %.4g vs fit %.4g (within x2: %s), log-log slope %.3f",
              scaled[0], scaled[1], scaled[2], fit, within ? "yes" : "no", slope);
  return {pass, note.str()};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number; default runs all.
  std::vector<bool> selected(10, argc <= 1);
  for (int k = 1; k < argc; ++k) {
    const int idx = std::atoi(argv[k]);
    if (idx >= 1 && idx <= 9) selected[idx] = true;
  }
  struct Criterion {
    const char* name;
    std::function<Outcome()> body;
    double time_limit = 0.0;  // seconds, 0 for none
  };
  const std::vector<Criterion> criteria = {
      {"gradient correctness", gradient_correctness, 120.0},
      {"occupancy oracle equivalence", occupancy_oracle, 10.0},
      {"estimator bias", estimator_bias, 60.0},
      {"monotone potential", monotone_potential},
      {"averaged NE-gap trend", averaged_gap_trend},
      {"fixed-point characterization", fixed_point},
      {"grid experiment trends", grid_trends, 900.0},
      {"gradient domination", gradient_domination},
      {"bias and variance envelopes", envelopes},
  };
  int failures = 0;
  int ran = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected[k + 1]) continue;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[k].body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[k].time_limit > 0.0 && secs > criteria[k].time_limit) {
      out.pass = false;
      out.detail += fmt(" [over the %.0f s budget]", criteria[k].time_limit);
    }
    if (!out.pass) ++failures;
    std::printf("[%s] criterion %zu %s (%.1f s): %s\n", out.pass ? "PASS" : "FAIL", k + 1,
                criteria[k].name, secs, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}

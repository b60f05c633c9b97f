// Copyright 2026 The pdalab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: train, track, theory, compare and eval.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pdalab/cli/run.hpp"

using namespace pdalab;
using cli::RunConfig;

namespace {

struct RunFlags {
  std::string config_path;
  std::string algo;
  std::string env;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double sigma0 = 0.0;
  std::string smoothing;
  std::string noise;
  int iters = 0;
  std::size_t steps = 0;
  int checkpoint_every = 0;
  std::string out;
  std::vector<CLI::Option*> opts;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run config; flags override its values");
    opts = {
        app->add_option("--algo", algo, "pda or ppo"),
        app->add_option("--env", env, "pendulum, newsvendor or synthetic:<family>"),
        app->add_option("--seed", seed, "run seed"),
        app->add_option("--lambda", lambda, "PDA regularization weight"),
        app->add_option("--sigma0", sigma0, "PDA initial exploration std"),
        app->add_option("--smoothing", smoothing, "dual_averaging or exponential[:alpha]"),
        app->add_option("--noise", noise, "PDA noise schedule: decaying or constant"),
        app->add_option("--iters", iters, "training iterations"),
        app->add_option("--steps", steps, "environment steps per iteration"),
        app->add_option("--checkpoint-every", checkpoint_every, "checkpoint period, 0 for final only"),
        app->add_option("--out", out, "output root (default $PDA_LAB_OUT or ./runs)"),
    };
  }

  bool given(std::size_t i) const { return opts[i]->count() > 0; }

  RunConfig build() const {
    RunConfig c;
    c.out_dir = cli::default_out_root();
    if (!config_path.empty()) c = cli::load_config(config_path);
    if (given(0)) c.algo = cli::parse_algo(algo);
    if (given(1)) c.env = env;
    if (given(2)) c.seed = seed;
    if (given(3)) c.pda.lambda = lambda;
    if (given(4)) c.pda.sigma0 = sigma0;
    if (given(5)) c.pda.smoothing = pda::SmoothingMode::parse(smoothing);
    if (given(6)) {
      if (noise == "decaying") c.pda.noise = pda::NoiseMode::decaying;
      else if (noise == "constant") c.pda.noise = pda::NoiseMode::constant;
      else throw std::invalid_argument("unknown noise mode '" + noise + "'");
    }
    if (given(7)) c.iterations = iters;
    if (given(8)) c.steps_per_collect = steps;
    if (given(9)) c.checkpoint_every = checkpoint_every;
    if (given(10)) c.out_dir = out;
    c.validate();
    return c;
  }
};

void print_row(const cli::MetricsRow& row) {
  std::printf("iter %d  steps %zu  test %.2f\n", row.stats.iter, row.stats.env_steps,
              row.test_return_mean);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pda_lab: policy dual averaging experiments"};
  app.require_subcommand(1);

  RunFlags train_flags;
  auto* train = app.add_subcommand("train", "train one run");
  train_flags.attach(train);

  RunFlags track_flags;
  cli::TrackOptions track_opts;
  auto* track = app.add_subcommand("track", "train PDA on pendulum and record optimum tracking");
  track_flags.attach(track);
  track->add_option("--dump-epochs", track_opts.dump_epochs, "epochs with landscape dumps")
      ->delimiter(',');
  track->add_option("--theta-dots", track_opts.theta_dots, "theta_dot values of the MAE grid")
      ->delimiter(',');
  track->add_option("--landscape-theta-dot", track_opts.landscape_theta_dot,
                    "theta_dot of the landscape dumps");
  track->add_option("--theta-points", track_opts.theta_points, "theta grid size");
  track->add_option("--grid", track_opts.solver.grid_n, "sub-problem solver grid size");

  std::vector<std::string> cases = theorylab::default_case_ids();
  theorylab::TheorySettings theory_settings;
  double eps_inject = 1e-3;
  std::string theory_out;
  auto* theory = app.add_subcommand("theory", "verify the convergence bounds on exact instances");
  theory->add_option("--cases", cases, "family:schedule ids")->delimiter(',');
  theory->add_option("--K", theory_settings.K, "iterations per instance");
  theory->add_option("--eps", eps_inject, "injected sub-problem error (also run with 0)");
  theory->add_option("--out", theory_out, "report directory (default output root)");

  RunFlags compare_flags;
  std::vector<std::string> algos{"pda", "ppo"};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  auto* compare = app.add_subcommand("compare", "train several algorithms and seeds");
  compare_flags.attach(compare);
  compare->add_option("--algos", algos, "algorithms")->delimiter(',');
  compare->add_option("--seeds", seeds, "seeds")->delimiter(',');

  std::string eval_run;
  int eval_episodes = 10;
  std::uint64_t eval_seed = 12345;
  auto* eval = app.add_subcommand("eval", "evaluate the final checkpoint of a run");
  eval->add_option("--run", eval_run, "run directory")->required();
  eval->add_option("--episodes", eval_episodes, "test episodes");
  eval->add_option("--eval-seed", eval_seed, "seed of the test episodes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      const auto config = train_flags.build();
      std::cout << cli::cmd_train(config).string() << "\n";
      const auto rows = cli::read_metrics(config.run_dir() / "metrics.csv");
      print_row(rows.front());
      print_row(rows.back());
      return 0;
    }
    if (track->parsed()) {
      const auto epochs = cli::cmd_track(track_flags.build(), track_opts);
      for (const auto& e : epochs) {
        std::printf("epoch %d  mae %.4f  test %.2f\n", e.epoch, e.mae, e.test_return_mean);
      }
      return 0;
    }
    if (theory->parsed()) {
      theory_settings.eps_values = {0.0};
      if (eps_inject > 0) theory_settings.eps_values.push_back(eps_inject);
      const std::string dir = theory_out.empty() ? cli::default_out_root() : theory_out;
      const auto outcome = cli::cmd_theory(cases, theory_settings, dir);
      for (const auto& e : outcome.entries) {
        std::printf("%s %s:%s %s max_violation %.3e\n", e.passed ? "PASS" : "FAIL",
                    e.instance.c_str(), theorylab::to_string(e.schedule).c_str(), e.check.c_str(),
                    e.max_violation);
      }
      return outcome.all_passed ? 0 : 1;
    }
    if (compare->parsed()) {
      std::vector<cli::Algo> parsed;
      for (const auto& a : algos) parsed.push_back(cli::parse_algo(a));
      const auto table = cli::cmd_compare(compare_flags.build(), parsed, seeds);
      std::printf("algo,n_seeds,mean,std\n");
      for (const auto& row : table) {
        std::printf("%s,%zu,%.3f,%.3f\n", cli::to_string(row.algo).c_str(), row.seeds.size(),
                    row.mean, row.std);
      }
      return 0;
    }
    if (eval->parsed()) {
      const auto res = cli::cmd_eval(eval_run, eval_episodes, eval_seed);
      std::printf("mean %.4f  std %.4f  episodes %zu\n", res.mean, res.std, res.returns.size());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "pda_lab: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

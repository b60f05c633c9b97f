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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pdalab/cli/run.hpp"

using namespace pdalab;
using namespace pdalab::cli;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "pdalab_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_config(const fs::path& out, const std::string& env = "synthetic:cosine") {
  RunConfig c;
  c.env = env;
  c.iterations = 3;
  c.steps_per_collect = 256;
  c.out_dir = out.string();
  c.checkpoint_every = 2;
  return c;
}

}  // namespace

TEST_CASE("config survives a JSON round trip") {
  RunConfig c;
  c.algo = Algo::ppo;
  c.env = "newsvendor";
  c.seed = 17;
  c.iterations = 7;
  c.pda.lambda = 0.25;
  c.pda.smoothing = pda::SmoothingMode::exponential(0.3);
  c.pda.noise = pda::NoiseMode::constant;
  c.pda.prox = pda::ProxMode::snapshot;
  c.pda.hidden = {32, 16};
  c.ppo.lr_decay = true;
  c.ppo.clip = 0.1;
  const auto j = to_json(c);
  const RunConfig back = config_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back == c);
  CHECK(back.pda.smoothing.alpha == 0.3);
  CHECK(back.pda.hidden == std::vector<std::size_t>{32, 16});
  CHECK_FALSE(back == RunConfig{});
}

TEST_CASE("defaults follow the hyperparameter table") {
  RunConfig c;
  CHECK(c.steps_per_collect == 2048);
  CHECK(c.eval_episodes == 10);
  CHECK(c.pda.lambda == 0.5);
  CHECK(c.pda.sigma0 == 1.3);
  CHECK(c.pda.lr == 1e-3);
  CHECK(c.pda.max_grad_norm == 0.1);
  CHECK(c.ppo.clip == 0.2);
  CHECK(c.ppo.vf_coeff == 0.25);
  CHECK(c.ppo.lr == 3e-4);
  CHECK_FALSE(c.ppo.lr_decay);
}

TEST_CASE("unknown config keys are rejected") {
  CHECK_THROWS_AS(config_from_json({{"seeed", 3}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"pda", {{"lamda", 0.1}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"ppo", {{"clip_range", 0.1}}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"algo", "trpo"}}), std::invalid_argument);
  const auto partial = config_from_json({{"seed", 4}, {"pda", {{"lambda", 0.1}}}});
  CHECK(partial.seed == 4);
  CHECK(partial.pda.lambda == 0.1);
  CHECK(partial.pda.sigma0 == 1.3);
}

TEST_CASE("invalid env id is rejected before training") {
  auto c = small_config(scratch_dir("badenv"), "cartpole");
  CHECK_THROWS_AS(cmd_train(c), std::invalid_argument);
}

TEST_CASE("output root comes from the environment variable") {
  ::setenv("PDA_LAB_OUT", "/tmp/somewhere", 1);
  CHECK(default_out_root() == "/tmp/somewhere");
  ::unsetenv("PDA_LAB_OUT");
  CHECK(default_out_root() == "runs");
}

TEST_CASE("train writes config, metrics and checkpoints") {
  const auto out = scratch_dir("train");
  const auto config = small_config(out);
  const auto dir = cmd_train(config);
  CHECK(dir == out / "pda-synthetic_cosine-s0");
  CHECK(fs::exists(dir / "checkpoint_iter2.json"));
  CHECK(fs::exists(dir / "checkpoint_final.json"));
  CHECK(load_config(dir / "config.json") == config);

  std::ifstream in(dir / "metrics.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,env_steps,beta,sigma,value_loss,psi_loss,actor_loss,train_return_mean,"
                  "test_return_mean,test_return_std");
  const auto rows = read_metrics(dir / "metrics.csv");
  REQUIRE(rows.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(rows[i].stats.iter == i);
  CHECK(rows[0].stats.env_steps == 0);
  CHECK(std::isnan(rows[0].stats.value_loss));
  CHECK(rows[3].stats.env_steps == 768);
  CHECK(rows[3].stats.beta == 3.0);

  const auto ev = cmd_eval(dir, config.eval_episodes, config.eval_seed);
  CHECK(ev.mean == rows.back().test_return_mean);
}

TEST_CASE("repeated runs give byte-identical metrics") {
  for (auto algo : {Algo::pda, Algo::ppo}) {
    auto a = small_config(scratch_dir("det_a"), "pendulum");
    a.algo = algo;
    a.iterations = 2;
    auto b = a;
    b.out_dir = scratch_dir("det_b").string();
    const auto da = cmd_train(a);
    const auto db = cmd_train(b);
    const auto ma = slurp(da / "metrics.csv");
    CHECK(ma.size() > 100);
    CHECK(ma == slurp(db / "metrics.csv"));
  }
}

TEST_CASE("ppo rows mark the missing schedule fields") {
  auto c = small_config(scratch_dir("ppo"));
  c.algo = Algo::ppo;
  const auto rows = read_metrics(cmd_train(c) / "metrics.csv");
  for (const auto& r : rows) {
    CHECK(std::isnan(r.stats.beta));
    CHECK(std::isnan(r.stats.psi_loss));
  }
}

TEST_CASE("last-five mean skips the untrained row") {
  std::vector<MetricsRow> rows;
  for (int i = 0; i <= 7; ++i) {
    MetricsRow r;
    r.stats.iter = i;
    r.test_return_mean = 10.0 * i;
    rows.push_back(r);
  }
  CHECK(last5_mean(rows) == doctest::Approx(50.0));
  rows.resize(3);
  CHECK(last5_mean(rows) == doctest::Approx(15.0));
  rows.resize(1);
  CHECK_THROWS(last5_mean(rows));
}

TEST_CASE("compare reports per-algorithm mean and population std across seeds") {
  const auto out = scratch_dir("compare");
  auto base = small_config(out);
  auto one = cmd_compare(base, {Algo::pda}, {5});
  REQUIRE(one.size() == 1);
  CHECK(one[0].std == 0.0);

  auto table = cmd_compare(base, {Algo::pda, Algo::ppo}, {1, 2});
  REQUIRE(table.size() == 2);
  for (const auto& row : table) {
    std::vector<double> direct;
    for (auto seed : row.seeds) {
      auto cfg = base;
      cfg.algo = row.algo;
      cfg.seed = seed;
      direct.push_back(last5_mean(read_metrics(cfg.run_dir() / "metrics.csv")));
    }
    const double mean = 0.5 * (direct[0] + direct[1]);
    CHECK(row.mean == doctest::Approx(mean));
    CHECK(row.std == doctest::Approx(0.5 * std::abs(direct[0] - direct[1])));
  }
  std::ifstream in(out / "comparison.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 3);
}

TEST_CASE("track records one MAE per epoch and the requested landscapes") {
  auto c = small_config(scratch_dir("track"), "pendulum");
  TrackOptions opts;
  opts.dump_epochs = {1, 3};
  opts.theta_points = 9;
  opts.theta_dots = {0.0};
  opts.tau_points = 5;
  opts.solver.grid_n = 41;
  opts.solver.refine_iters = 10;
  const auto epochs = cmd_track(c, opts);
  REQUIRE(epochs.size() == 3);
  for (const auto& e : epochs) CHECK(e.mae >= 0.0);
  const auto dir = c.run_dir();
  CHECK(fs::exists(dir / "landscape_epoch1.csv"));
  CHECK(fs::exists(dir / "landscape_epoch3.csv"));
  CHECK_FALSE(fs::exists(dir / "landscape_epoch2.csv"));
  CHECK(fs::exists(dir / "tracking.csv"));
  CHECK_THROWS_AS(cmd_track(small_config(scratch_dir("track_bad")), opts), std::invalid_argument);
}

TEST_CASE("theory command writes one entry per case and check") {
  const auto out = scratch_dir("theory");
  theorylab::TheorySettings s;
  s.K = 40;
  const auto outcome = cmd_theory(theorylab::default_case_ids(), s, out);
  CHECK(outcome.all_passed);
  CHECK(outcome.entries.size() == 6);
  std::ifstream in(out / "theory-report.json");
  const auto report = nlohmann::json::parse(in);
  CHECK(report.at("checks").size() == 6);
  CHECK(report.at("all_passed").get<bool>());
  for (const auto& e : report.at("checks")) {
    CHECK(e.contains("instance"));
    CHECK(e.contains("schedule_case"));
    CHECK(e.contains("K"));
    CHECK(e.contains("max_violation"));
    CHECK(e.at("runs").at(0).contains("margins"));
  }
  CHECK_THROWS_AS(cmd_theory({"cosine:mu_pos"}, s, out), std::invalid_argument);
  CHECK_THROWS_AS(cmd_theory({"bogus"}, s, out), std::invalid_argument);
}

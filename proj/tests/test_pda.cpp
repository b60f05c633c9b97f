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
#include <vector>

#include "pdalab/envs/pendulum.hpp"
#include "pdalab/envs/synthetic.hpp"
#include "pdalab/pda/pda.hpp"
#include "support/oracles.hpp"

using namespace pdalab;
using namespace pdalab::pda;

namespace {

std::vector<double> snapshot(const ad::Mlp& net) {
  std::vector<double> out;
  for (const auto& p : net.parameters()) out.insert(out.end(), p.data().begin(), p.data().end());
  return out;
}

rollout::Batch random_batch(Rng& rng, std::size_t n, std::size_t obs_dim, std::size_t act_dim) {
  rollout::Batch b;
  b.obs_dim = obs_dim;
  b.act_dim = act_dim;
  for (std::size_t i = 0; i < n; ++i) {
    rollout::Transition t;
    for (std::size_t j = 0; j < obs_dim; ++j) t.obs.push_back(uniform(rng, -1, 1));
    for (std::size_t j = 0; j < act_dim; ++j) t.action.push_back(uniform(rng, -1, 1));
    t.reward = uniform(rng, -1, 1);
    t.value = uniform(rng, -1, 1);
    b.push(t);
  }
  b.segments.push_back({0, n, 0.0});
  rollout::finalize(b, 0.99, 0.95);
  return b;
}

}  // namespace

TEST_CASE("schedule identities") {
  PdaSchedule s;
  CHECK(s.beta == 1.0);
  CHECK(s.beta_sum == 1.0);
  CHECK(s.regularizer_coeff() == 0.5);
  s.advance();
  CHECK(s.beta == 2.0);
  CHECK(s.beta_sum == 3.0);
  s.advance();
  s.advance();
  CHECK(s.regularizer_coeff() == doctest::Approx(0.4).epsilon(1e-15));
  for (int k = 4; k <= 10000; ++k) {
    s.advance();
    const double kk = k;
    REQUIRE(s.beta == kk + 1);
    REQUIRE(s.beta_sum == (kk + 1) * (kk + 2) / 2);
    // lambda_k / sum beta with lambda_k = lambda (k+1)^1.5.
    REQUIRE(s.regularizer_coeff() == 0.5 * std::pow(kk + 1, 1.5) / ((kk + 1) * (kk + 2) / 2));
    REQUIRE((s.beta_sum - s.beta) / s.beta_sum + s.beta / s.beta_sum == 1.0);
  }
}

TEST_CASE("sigma schedule") {
  PdaSchedule s;
  CHECK(sigma(s) == 1.3);
  s.beta = 1024;
  CHECK(sigma(s) == 1.3 / 8);
  s.noise = NoiseMode::constant;
  CHECK(sigma(s) == 1.3);
  s.noise = NoiseMode::decaying;
  double prev = 10;
  for (double b = 1; b < 500; b += 1) {
    s.beta = b;
    CHECK(sigma(s) <= prev);
    prev = sigma(s);
  }
}

TEST_CASE("bregman divergence") {
  std::vector<double> a{1, 0}, z{0, 0}, b{0.3, -2};
  CHECK(bregman(a, a) == 0.0);
  CHECK(bregman(a, z) == 0.5);
  CHECK(bregman(a, b) == doctest::Approx(0.5 * (0.49 + 4)));
  std::vector<double> one{1};
  CHECK_THROWS_AS(bregman(a, one), std::invalid_argument);
}

TEST_CASE("psi_sum_target weights") {
  std::vector<double> old{2, -1, 5}, adv{0, 3, 1};
  PdaSchedule s;
  CHECK(psi_sum_target(old, adv, s, SmoothingMode::dual_averaging()) == adv);
  s.advance();
  auto t = psi_sum_target(old, adv, s, SmoothingMode::dual_averaging());
  for (int i = 0; i < 3; ++i) CHECK(t[i] == doctest::Approx(old[i] / 3 + 2 * adv[i] / 3));
  std::vector<double> two{2}, zero{0};
  CHECK(psi_sum_target(two, zero, s, SmoothingMode::exponential(0.5))[0] == 1.0);
  CHECK_THROWS_AS(SmoothingMode::exponential(1.0), std::invalid_argument);
  CHECK(SmoothingMode::parse("exponential:0.25").alpha == 0.25);
  CHECK(SmoothingMode::parse(SmoothingMode::exponential(0.3).to_string()).alpha == 0.3);
  CHECK_THROWS_AS(SmoothingMode::parse("exponential:abc"), std::invalid_argument);
}

TEST_CASE("exponential smoothing targets on random batches") {
  Rng rng(12);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double alpha = uniform(rng, 0.01, 0.99);
    std::vector<double> old(64), adv(64);
    for (auto& v : old) v = uniform(rng, -5, 5);
    for (auto& v : adv) v = uniform(rng, -5, 5);
    PdaSchedule s;
    s.k = trial;
    auto t = psi_sum_target(old, adv, s, SmoothingMode::exponential(alpha));
    for (int i = 0; i < 64; ++i) worst = std::max(worst, std::abs(t[i] - ((1 - alpha) * old[i] + alpha * adv[i])));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("tabular recursion reproduces the beta-weighted average") {
  Rng rng(99);
  const std::size_t cells = 20;
  std::vector<std::size_t> keys(cells);
  for (std::size_t i = 0; i < cells; ++i) keys[i] = i;
  std::vector<std::vector<double>> history(cells);
  TabularPsiSum table;
  PdaSchedule s;
  for (int k = 0; k < 50; ++k) {
    std::vector<double> adv(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      adv[i] = uniform(rng, -3, 3);
      history[i].push_back(adv[i]);
    }
    table.update(keys, adv, s, SmoothingMode::dual_averaging());
    s.advance();
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    worst = std::max(worst, std::abs(table.get(i) - oracle::beta_weighted_average(history[i])));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("actor objective is strongly convex with tabular quadratic psi") {
  Rng rng(5);
  PdaSchedule s;
  for (int k = 0; k < 7; ++k) s.advance();
  const double coeff = s.regularizer_coeff();
  for (int trial = 0; trial < 200; ++trial) {
    const double c = uniform(rng, 0, 3), m0 = uniform(rng, -1, 1), m1 = uniform(rng, -1, 1);
    std::vector<double> center{uniform(rng, -1, 1), uniform(rng, -1, 1)};
    auto objective = [&](double x, double y) {
      std::vector<double> a{x, y};
      return c * ((x - m0) * (x - m0) + (y - m1) * (y - m1)) + coeff * 2 * bregman(a, center);
    };
    const double x = uniform(rng, -1, 1), y = uniform(rng, -1, 1);
    const double th = uniform(rng, 0, 6.28), h = 1e-2;
    const double dx = std::cos(th) * h, dy = std::sin(th) * h;
    const double second = objective(x + dx, y + dy) - 2 * objective(x, y) + objective(x - dx, y - dy);
    CHECK(second / (h * h) >= 2 * coeff - 1e-6);
  }
}

TEST_CASE("value update with zero targets and zero output leaves the net unchanged") {
  Rng rng(1);
  PdaConfig cfg;
  cfg.passes = 2;
  cfg.minibatch = 16;
  PdaAgent agent(3, 1, cfg, 7);
  auto& params = agent.value_net().parameters();
  for (double& v : params[params.size() - 2].mutable_data()) v = 0.0;
  for (double& v : params.back().mutable_data()) v = 0.0;
  auto batch = random_batch(rng, 40, 3, 1);
  std::fill(batch.returns.begin(), batch.returns.end(), 0.0);
  auto before = snapshot(agent.value_net());
  auto trace = agent.update_value(batch);
  CHECK(trace.per_pass == std::vector<double>{0.0, 0.0});
  CHECK(snapshot(agent.value_net()) == before);
}

TEST_CASE("value update loss decreases on a toy regression") {
  Rng rng(2);
  PdaConfig cfg;
  cfg.passes = 1;
  cfg.minibatch = 64;
  cfg.normalize_returns = false;
  PdaAgent agent(3, 1, cfg, 3);
  auto batch = random_batch(rng, 64, 3, 1);
  for (std::size_t i = 0; i < 64; ++i) batch.returns[i] = batch.obs_row(i)[0] > 0 ? 1.0 : -1.0;
  const double first = agent.update_value(batch).last();
  const double second = agent.update_value(batch).last();
  CHECK(second < first);
}

TEST_CASE("sum-advantage update with self-consistent targets is a no-op") {
  Rng rng(3);
  PdaConfig cfg;
  cfg.passes = 3;
  cfg.minibatch = 32;
  PdaAgent agent(3, 1, cfg, 4);
  auto batch = random_batch(rng, 50, 3, 1);
  auto current = agent.psi_sum(batch.obs, batch.actions, 50);
  for (std::size_t i = 0; i < 50; ++i) batch.advantages[i] = -current[i];
  auto before = snapshot(agent.psi_sum_net());
  auto trace = agent.update_psi_sum(batch);
  for (double l : trace.per_pass) CHECK(l == 0.0);
  CHECK(snapshot(agent.psi_sum_net()) == before);

  // Zero advantages at k = 0 give zero targets.
  std::fill(batch.advantages.begin(), batch.advantages.end(), 0.0);
  auto t = psi_sum_target(current, std::vector<double>(50, 0.0), agent.schedule(),
                          SmoothingMode::dual_averaging());
  for (double v : t) CHECK(v == 0.0);
}

TEST_CASE("actor update touches only the actor") {
  Rng rng(4);
  PdaConfig cfg;
  cfg.passes = 2;
  cfg.minibatch = 25;
  PdaAgent agent(3, 1, cfg, 5);
  auto batch = random_batch(rng, 50, 3, 1);
  auto psi_before = snapshot(agent.psi_sum_net());
  auto value_before = snapshot(agent.value_net());
  auto actor_before = snapshot(agent.actor());
  agent.update_actor(batch);
  CHECK(snapshot(agent.psi_sum_net()) == psi_before);
  CHECK(snapshot(agent.value_net()) == value_before);
  CHECK(snapshot(agent.actor()) != actor_before);
}

TEST_CASE("with zero psi the actor loss is the pure regularizer") {
  Rng rng(6);
  PdaConfig cfg;
  cfg.passes = 30;
  cfg.minibatch = 100;
  cfg.max_grad_norm = 10.0;
  cfg.lr = 1e-2;
  PdaAgent agent(3, 1, cfg, 8);
  for (auto& p : agent.psi_sum_net().parameters()) {
    for (double& v : p.mutable_data()) v = 0.0;
  }
  auto batch = random_batch(rng, 100, 3, 1);
  auto means = agent.actor_mean(batch.obs, 100);
  double expected = 0.0;
  for (double a : means) expected += a * a;
  expected *= agent.schedule().regularizer_coeff() / 100.0;
  cfg.passes = 1;
  PdaAgent probe(3, 1, cfg, 8);
  for (auto& p : probe.psi_sum_net().parameters()) {
    for (double& v : p.mutable_data()) v = 0.0;
  }
  // A single full-batch step reports the loss at the starting parameters.
  CHECK(probe.update_actor(batch).last() == doctest::Approx(expected).epsilon(1e-12));

  auto trace = agent.update_actor(batch);
  CHECK(trace.last() < trace.per_pass.front());
  double after = 0.0;
  for (double a : agent.actor_mean(batch.obs, 100)) after += a * a;
  CHECK(after < expected * 100.0 / agent.schedule().regularizer_coeff());
}

TEST_CASE("act: deterministic mean, clipping, noise") {
  PdaConfig cfg;
  PdaAgent agent(3, 1, cfg, 9);
  std::vector<double> obs{0.1, 0.2, 0.3};
  Rng r1(1), r2(2);
  auto a = agent.act(obs, false, r1);
  auto b = agent.act(obs, false, r2);
  CHECK(a.action == b.action);
  CHECK(a.action == agent.actor_mean(obs, 1));

  cfg.sigma0 = 0.0;
  PdaAgent silent(3, 1, cfg, 9);
  CHECK(silent.act(obs, true, r1).action == a.action);

  cfg.sigma0 = 1e6;
  PdaAgent loud(3, 1, cfg, 9);
  int at_edge = 0;
  for (int i = 0; i < 100; ++i) {
    const double v = loud.act(obs, true, r1).action[0];
    CHECK(std::abs(v) <= 1.0);
    at_edge += std::abs(v) == 1.0;
  }
  CHECK(at_edge == 100);
}

TEST_CASE("pda_iteration ordering, schedule and determinism") {
  envs::PendulumEnv env;
  PdaConfig cfg;
  cfg.passes = 2;
  auto run = [&](int iters) {
    PdaAgent agent(3, 1, cfg, 21);
    rollout::Collector collector(env, 1, 21);
    std::vector<IterationStats> out;
    for (int i = 0; i < iters; ++i) out.push_back(pda_iteration(agent, collector, 256));
    return std::make_pair(out, agent.schedule());
  };
  auto [a, sa] = run(3);
  auto [b, sb] = run(3);
  CHECK(sa.beta == 4.0);
  CHECK(sa.beta_sum == 10.0);
  CHECK(a[0].beta == 1.0);
  CHECK(a[1].beta == 2.0);
  CHECK(a[1].sigma == doctest::Approx(1.3 / std::pow(2.0, 0.3)));
  CHECK(a[2].env_steps == 768);
  for (int i = 0; i < 3; ++i) {
    CHECK(a[i].value_loss == b[i].value_loss);
    CHECK(a[i].psi_loss == b[i].psi_loss);
    CHECK(a[i].actor_loss == b[i].actor_loss);
  }
}

TEST_CASE("checkpoint round trip") {
  envs::PendulumEnv env;
  PdaConfig cfg;
  cfg.passes = 1;
  PdaAgent agent(3, 1, cfg, 2);
  rollout::Collector collector(env, 1, 2);
  pda_iteration(agent, collector, 200);
  auto doc = agent.checkpoint();
  PdaAgent other(3, 1, cfg, 99);
  other.restore(doc);
  CHECK(snapshot(other.actor()) == snapshot(agent.actor()));
  CHECK(snapshot(other.psi_sum_net()) == snapshot(agent.psi_sum_net()));
  CHECK(other.schedule().beta == 2.0);
  CHECK(other.return_scale() == doctest::Approx(agent.return_scale()));
}

TEST_CASE("snapshot prox center is the initial actor") {
  PdaConfig cfg;
  cfg.prox = ProxMode::snapshot;
  PdaAgent agent(3, 1, cfg, 4);
  std::vector<double> obs{0.5, -0.5, 0.1};
  CHECK(agent.prox_center(obs, 1) == agent.actor_mean(obs, 1));
  cfg.prox = ProxMode::zero;
  PdaAgent zero(3, 1, cfg, 4);
  CHECK(zero.prox_center(obs, 1) == std::vector<double>{0.0});
  CHECK(zero.subproblem_objective(obs, std::vector<double>{0.0}) ==
        zero.psi_sum(obs, std::vector<double>{0.0}, 1)[0]);
}

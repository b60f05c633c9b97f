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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "pdalab/common/random.hpp"
#include "pdalab/envs/env.hpp"
#include "pdalab/envs/newsvendor.hpp"
#include "pdalab/envs/pendulum.hpp"
#include "pdalab/envs/synthetic.hpp"

using namespace pdalab;
using namespace pdalab::envs;

TEST_CASE("pendulum upright equilibrium is a fixed point with zero reward") {
  auto out = pendulum_step({0.0, 0.0}, 0.0);
  CHECK(out.next.theta == 0.0);
  CHECK(out.next.theta_dot == 0.0);
  CHECK(out.reward == 0.0);
}

TEST_CASE("pendulum Euler step from horizontal") {
  auto out = pendulum_step({std::numbers::pi / 2, 0.0}, 0.0);
  CHECK(out.next.theta_dot == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(out.next.theta == doctest::Approx(std::numbers::pi / 2 + 0.0375).epsilon(1e-12));
  const double expected = -(std::pow(std::numbers::pi / 2, 2) + 0.1 * 0.75 * 0.75);
  CHECK(out.reward == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pendulum torque saturates and speed stays bounded") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    PendulumState s{uniform(rng, -10.0, 10.0), uniform(rng, -8.0, 8.0)};
    const double tau = uniform(rng, 2.0, 50.0);
    auto big = pendulum_step(s, tau);
    auto capped = pendulum_step(s, 2.0);
    CHECK(big.next.theta == capped.next.theta);
    CHECK(big.next.theta_dot == capped.next.theta_dot);
    CHECK(big.reward == capped.reward);
    CHECK(std::abs(big.next.theta_dot) <= 8.0);
    CHECK(big.reward <= 0.0);
  }
  auto s5 = pendulum_step({1.0, 0.5}, 5.0);
  auto s2 = pendulum_step({1.0, 0.5}, 2.0);
  CHECK(s5.next.theta == s2.next.theta);
}

TEST_CASE("pendulum reward is negative away from the equilibrium") {
  CHECK(pendulum_step({0.0, 0.0}, 0.1).reward < 0.0);
  CHECK(pendulum_step({0.01, 0.0}, 0.0).reward < 0.0);
  CHECK(pendulum_step({0.0, 0.01}, 0.0).reward < 0.0);
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
  CHECK(wrap_angle(0.25) == doctest::Approx(0.25));
}

TEST_CASE("pendulum env reset, observation and horizon") {
  PendulumEnv env;
  auto obs = env.reset(3);
  REQUIRE(obs.size() == 3);
  CHECK(std::abs(env.state().theta_dot) <= 1.0);
  CHECK(std::abs(env.state().theta) <= std::numbers::pi);
  CHECK(obs[0] == doctest::Approx(std::cos(env.state().theta)));
  CHECK(obs[1] == doctest::Approx(std::sin(env.state().theta)));
  CHECK(obs[2] == env.state().theta_dot);

  std::vector<double> a{0.0};
  int steps = 0;
  bool done = false;
  while (!done) {
    done = env.step(a).done;
    ++steps;
  }
  CHECK(steps == 200);
}

TEST_CASE("non-finite and wrong-size actions are rejected") {
  PendulumEnv pendulum;
  pendulum.reset(1);
  std::vector<double> nan{std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(pendulum.step(nan), std::invalid_argument);
  std::vector<double> two{0.0, 0.0};
  CHECK_THROWS_AS(pendulum.step(two), std::invalid_argument);

  NewsvendorEnv nv;
  nv.reset(1);
  std::vector<double> inf{std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(nv.step(inf), std::invalid_argument);
}

TEST_CASE("newsvendor reward examples") {
  NewsvendorParams p;
  p.lead_time = 1;
  p.price = 10;
  p.cost = 0;
  p.holding = 1;
  p.penalty = 0;
  NewsvendorState s{{5.0}, 50.0, 0};
  CHECK(newsvendor_step(s, 0.0, 3.0, p).reward == doctest::Approx(28.0));

  p.penalty = 2;
  NewsvendorState empty{{0.0}, 50.0, 0};
  CHECK(newsvendor_step(empty, 0.0, 4.0, p).reward == doctest::Approx(-8.0));
}

TEST_CASE("newsvendor order clipping and pipeline shift") {
  NewsvendorParams p;
  NewsvendorState s{{1, 2, 3, 4, 5}, 50.0, 0};
  auto out = newsvendor_step(s, 500.0, 0.0, p);
  CHECK(out.delivered == 1.0);
  CHECK(s.pipeline == std::vector<double>{2, 3, 4, 5, 200});
  newsvendor_step(s, -3.0, 0.0, p);
  CHECK(s.pipeline.back() == 0.0);
}

TEST_CASE("newsvendor conserves units through the pipeline") {
  NewsvendorEnv env;
  env.reset(11);
  CHECK(env.state().pipeline == std::vector<double>(5, 0.0));
  Rng rng(5);
  std::vector<double> placed;
  double delivered = 0.0;
  bool done = false;
  while (!done) {
    const auto before = env.state().pipeline.front();
    const double q = std::round(uniform(rng, -20.0, 250.0));
    placed.push_back(std::clamp(q, 0.0, 200.0));
    std::vector<double> a{q};
    done = env.step(a).done;
    delivered += before;
  }
  const int L = env.params().lead_time;
  double ordered_early = 0.0;
  for (std::size_t t = 0; t + L < placed.size(); ++t) ordered_early += placed[t];
  CHECK(delivered == doctest::Approx(ordered_early));
  double in_pipe = 0.0;
  for (double q : env.state().pipeline) in_pipe += q;
  double total = 0.0;
  for (double q : placed) total += q;
  CHECK(delivered + in_pipe == doctest::Approx(total));
}

TEST_CASE("same seed gives identical trajectories") {
  for (const char* id : {"pendulum", "newsvendor", "synthetic:cosine"}) {
    auto a = make_env(id);
    auto b = make_env(id);
    auto oa = a->reset(42);
    auto ob = b->reset(42);
    CHECK(oa == ob);
    Rng rng(9);
    for (int t = 0; t < a->spec().horizon; ++t) {
      std::vector<double> act{uniform(rng, a->spec().act_low[0], a->spec().act_high[0])};
      auto ra = a->step(act);
      auto rb = b->step(act);
      CHECK(ra.obs == rb.obs);
      CHECK(ra.reward == rb.reward);
      CHECK(ra.done == rb.done);
    }
  }
  NewsvendorEnv x, y;
  x.reset(1);
  y.reset(2);
  CHECK(x.state().demand_mean != y.state().demand_mean);
}

TEST_CASE("synthetic instances") {
  auto quad = SyntheticInstance::quadratic(0.3);
  SyntheticEnv env(quad);
  env.reset(0);
  std::vector<double> at{0.3};
  auto r = env.step(at);
  CHECK(r.reward == doctest::Approx(0.0));
  CHECK(r.done);
  std::vector<double> off{1.3};
  CHECK(env.step(off).reward == doctest::Approx(-1.0));

  auto cosine = SyntheticInstance::cosine();
  SyntheticEnv cenv(cosine);
  std::vector<double> pi{std::numbers::pi};
  CHECK(cenv.step(pi).reward == doctest::Approx(1.0));
  CHECK(cosine.minimizer() == doctest::Approx(std::numbers::pi));
  CHECK(cosine.curvature() == -1.0);
  CHECK(cosine.lipschitz() == 1.0);

  auto pw = SyntheticInstance::piecewise_linear();
  CHECK(pw.minimizer() == 1.2);
  CHECK(pw.curvature() == 0.0);
  CHECK(quad.curvature() == 2.0);
  CHECK(quad.lipschitz() == doctest::Approx(4.6));

  // Grid search agrees with the closed-form minimizers.
  for (auto inst : {quad, pw, cosine}) {
    double best = inst.low;
    for (int i = 0; i <= 100000; ++i) {
      const double a = inst.low + (inst.high - inst.low) * i / 100000.0;
      if (inst.cost(a) < inst.cost(best)) best = a;
    }
    CHECK(std::abs(best - inst.minimizer()) < 1e-4);
  }
}

TEST_CASE("env registry and spec validation") {
  CHECK(make_env("pendulum")->spec().obs_dim == 3);
  CHECK(make_env("newsvendor")->spec().obs_dim == 10);
  CHECK(make_env("synthetic:piecewise")->id() == "synthetic:piecewise");
  CHECK_THROWS_AS(make_env("cartpole"), std::invalid_argument);
  CHECK_THROWS_AS(make_env("synthetic:sine"), std::invalid_argument);

  EnvSpec bad;
  bad.act_low = {1.0};
  bad.act_high = {1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.act_high = {2.0};
  bad.validate();
  bad.gamma = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  nlohmann::json j = make_env("pendulum")->spec();
  CHECK(j["horizon"] == 200);
  CHECK(j["act_high"][0] == 2.0);
}

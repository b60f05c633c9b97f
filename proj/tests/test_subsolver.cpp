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
#include <filesystem>
#include <limits>
#include <fstream>
#include <map>

#include "pdalab/envs/pendulum.hpp"
#include "pdalab/subsolver/subsolver.hpp"

using namespace pdalab;
using namespace pdalab::subsolver;

namespace {

envs::EnvSpec unit_box(std::size_t act_dim) {
  envs::EnvSpec spec;
  spec.obs_dim = 1;
  spec.act_dim = act_dim;
  spec.act_low.assign(act_dim, -1.0);
  spec.act_high.assign(act_dim, 1.0);
  return spec;
}

// Quadratic landscape centered at m(s) = 0.4 * s, actor offset by `shift`.
StateProblem shifted_quadratic(double shift) {
  StateProblem p;
  p.obs_dim = 1;
  p.act_dim = 1;
  p.psi = [](std::span<const double> s, std::span<const double> a) {
    return (a[0] - 0.4 * s[0]) * (a[0] - 0.4 * s[0]);
  };
  p.objective = p.psi;
  p.actor = [shift](std::span<const double> s) { return std::vector<double>{0.4 * s[0] + shift}; };
  return p;
}

}  // namespace

TEST_CASE("quadratic minimizer is recovered") {
  SubProblem p{[](std::span<const double> a) { return (a[0] - 0.3) * (a[0] - 0.3); }, {-2}, {2}};
  auto r = exact_argmin(p, 401, 30);
  CHECK(std::abs(r.action[0] - 0.3) < 1e-4);
  CHECK(r.action_tol > 0.0);
}

TEST_CASE("random strongly convex quadratics in one and two dimensions") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const double c0 = uniform(rng, -1.5, 1.5), c1 = uniform(rng, -1.5, 1.5);
    const double w0 = uniform(rng, 0.1, 5), w1 = uniform(rng, 0.1, 5), cross = uniform(rng, -0.3, 0.3);
    SubProblem one{[=](std::span<const double> a) { return w0 * (a[0] - c0) * (a[0] - c0); }, {-2}, {2}};
    CHECK(std::abs(exact_argmin(one, 401, 30).action[0] - c0) < 1e-4);

    const double k = cross * std::sqrt(w0 * w1);
    SubProblem two{[=](std::span<const double> a) {
                     const double x = a[0] - c0, y = a[1] - c1;
                     return w0 * x * x + w1 * y * y + 2 * k * x * y;
                   },
                   {-2, -2}, {2, 2}};
    auto r = exact_argmin(two, 101, 30);
    CHECK(std::abs(r.action[0] - c0) < 1e-4);
    CHECK(std::abs(r.action[1] - c1) < 1e-4);
  }
}

TEST_CASE("flat and boundary landscapes") {
  SubProblem flat{[](std::span<const double>) { return 3.5; }, {-1}, {1}};
  auto r = exact_argmin(flat, 11, 5);
  CHECK(r.value == 3.5);
  CHECK(std::abs(r.action[0]) <= 1.0);

  SubProblem cosine{[](std::span<const double> a) { return std::cos(a[0]); }, {-2}, {2}};
  auto c = exact_argmin(cosine, 401, 30);
  CHECK(std::abs(std::abs(c.action[0]) - 2.0) < 1e-3);
  CHECK(c.value == doctest::Approx(std::cos(2.0)));
}

TEST_CASE("result never exceeds any grid point") {
  auto f = [](std::span<const double> a) { return std::sin(5 * a[0]) + 0.3 * a[0] * a[0]; };
  SubProblem p{f, {-3}, {3}};
  auto r = exact_argmin(p, 61, 10);
  for (int i = 0; i < 61; ++i) {
    std::vector<double> x{-3 + 6.0 * i / 60};
    CHECK(r.value <= f(x));
  }
  std::vector<double> seed{-0.3141};
  auto seeded = exact_argmin(p, 5, 0, {seed});
  CHECK(seeded.value <= f(seed));
}

TEST_CASE("invalid inputs") {
  SubProblem bad{[](std::span<const double> a) {
                   return a[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
                 },
                 {-1}, {1}};
  CHECK_THROWS_AS(exact_argmin(bad), std::domain_error);
  SubProblem three{[](std::span<const double>) { return 0.0; }, {0, 0, 0}, {1, 1, 1}};
  CHECK_THROWS_AS(exact_argmin(three), std::invalid_argument);
  SubProblem ok{[](std::span<const double>) { return 0.0; }, {0}, {1}};
  CHECK_THROWS_AS(exact_argmin(ok, 2, 1), std::invalid_argument);
}

TEST_CASE("tracking MAE") {
  auto states = linspace(-1, 1, 21);
  CHECK(tracking_mae(shifted_quadratic(0.0), states, unit_box(1)).mae < 1e-6);
  CHECK(tracking_mae(shifted_quadratic(0.5), states, unit_box(1)).mae == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_THROWS_AS(tracking_mae(shifted_quadratic(0.0), {}, unit_box(1)), std::invalid_argument);
  // Env units scale with the box half-width.
  envs::EnvSpec torque = unit_box(1);
  torque.act_low = {-2};
  torque.act_high = {2};
  CHECK(tracking_mae(shifted_quadratic(0.25), states, torque).mae == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("landscape dump on a pendulum agent") {
  envs::PendulumEnv env;
  pda::PdaConfig cfg;
  pda::PdaAgent agent(3, 1, cfg, 3);
  auto problem = pda_state_problem(agent);
  auto thetas = linspace(-3.14159, 3.14159, 50);
  auto taus = linspace(-2, 2, 50);
  auto rows = landscape_dump(problem, env.spec(), thetas, taus, 0.2, {101, 20});
  REQUIRE(rows.size() == 2500);
  std::map<double, double> min_psi;
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.psi_prime));
    CHECK(std::isfinite(r.argmin_tau));
    CHECK(std::isfinite(r.actor_tau));
    CHECK(std::abs(r.argmin_tau) <= 2.0);
    auto it = min_psi.find(r.theta);
    if (it == min_psi.end() || r.psi_prime < it->second) min_psi[r.theta] = r.psi_prime;
  }
  for (std::size_t i = 0; i < rows.size(); i += 50) {
    std::vector<double> obs{std::cos(rows[i].theta), std::sin(rows[i].theta), 0.2};
    std::vector<double> a{rows[i].argmin_tau / 2.0};
    CHECK(problem.objective(obs, a) <= min_psi[rows[i].theta] + 1e-12);
  }
  const auto path = (std::filesystem::temp_directory_path() / "pdalab_test_landscape.csv").string();
  write_landscape_csv(path, rows);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "theta,tau,psi_prime,argmin_tau,actor_tau");
}

TEST_CASE("assumption measurements") {
  StateProblem square;
  square.obs_dim = 1;
  square.act_dim = 1;
  square.psi = [](std::span<const double>, std::span<const double> a) { return a[0] * a[0]; };
  square.objective = square.psi;
  square.actor = [](std::span<const double>) { return std::vector<double>{0.0}; };
  auto states = linspace(-1, 1, 5);
  auto rep = measure_assumptions(square, states);
  CHECK(rep.lipschitz == doctest::Approx(2.0).epsilon(0.01));
  CHECK(rep.curvature == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(rep.eps_opt_max) <= 1e-12);
  CHECK(rep.eps_opt_min >= -rep.solver_tol);

  // An actor that solves exactly leaves only solver tolerance.
  auto exact = shifted_quadratic(0.0);
  auto r2 = measure_assumptions(exact, states);
  CHECK(r2.eps_opt_max <= 1e-12);
  CHECK(r2.eps_opt_min >= -1e-12);

  pda::PdaConfig cfg;
  pda::PdaAgent agent(3, 1, cfg, 5);
  auto grid = pendulum_state_grid(linspace(-3, 3, 7), std::vector<double>{0.2});
  auto r3 = measure_assumptions(pda_state_problem(agent), grid, {101, 20});
  CHECK(std::isfinite(r3.lipschitz));
  CHECK(std::isfinite(r3.curvature));
  CHECK(std::isfinite(r3.eps_opt_mean));
  CHECK(r3.eps_opt_min >= -r3.solver_tol);
  CHECK(r3.states == 7);
}

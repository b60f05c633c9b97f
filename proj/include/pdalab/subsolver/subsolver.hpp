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

#ifndef PDALAB_SUBSOLVER_SUBSOLVER_HPP_
#define PDALAB_SUBSOLVER_SUBSOLVER_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pdalab/envs/env.hpp"
#include "pdalab/pda/pda.hpp"

namespace pdalab::subsolver {

using Objective = std::function<double(std::span<const double>)>;

struct SubProblem {
  Objective objective;
  std::vector<double> low;
  std::vector<double> high;
};

struct ArgminResult {
  std::vector<double> action;
  double value = 0.0;
  // Half-width of the final refinement bracket, in action units.
  double action_tol = 0.0;
  // Local slope times action_tol: a bound on the value error when the
  // objective is Lipschitz near the minimizer.
  double value_tol = 0.0;
};

// Grid scan with grid_n points per dimension followed by refine_iters rounds
// of golden-section search around the best cell (coordinate-wise in 2-D).
// `seeds` are extra candidate points. The returned value is never above the
// best grid or seed value. Supports act_dim 1 and 2; throws
// std::domain_error when the objective is not finite on the box.
ArgminResult exact_argmin(const SubProblem& problem, int grid_n = 401, int refine_iters = 30,
                          const std::vector<std::vector<double>>& seeds = {});

// Per-state sub-problem family in the agent's normalized action box.
struct StateProblem {
  std::size_t obs_dim = 0;
  std::size_t act_dim = 0;
  std::function<double(std::span<const double> obs, std::span<const double> a)> psi;
  std::function<double(std::span<const double> obs, std::span<const double> a)> objective;
  std::function<std::vector<double>(std::span<const double> obs)> actor;
};

// psi_sum, scaled objective and actor of a PDA agent.
StateProblem pda_state_problem(const pda::PdaAgent& agent);

struct SolverSettings {
  int grid_n = 401;
  int refine_iters = 30;
};

struct TrackingResult {
  double mae = 0.0;        // environment action units
  double max_action_tol = 0.0;
};

// Mean over states and action dimensions of |actor(s) - argmin(s)|,
// measured after mapping both to the environment box.
TrackingResult tracking_mae(const StateProblem& problem, std::span<const double> states,
                            const envs::EnvSpec& spec, const SolverSettings& settings = {});

// Pendulum observations [cos theta, sin theta, theta_dot] over a theta grid
// for each listed theta_dot.
std::vector<double> pendulum_state_grid(std::span<const double> thetas,
                                        std::span<const double> theta_dots);
std::vector<double> linspace(double lo, double hi, std::size_t n);

struct LandscapeRow {
  double theta = 0.0;
  double tau = 0.0;
  double psi_prime = 0.0;
  double argmin_tau = 0.0;
  double actor_tau = 0.0;
};

// Sub-problem landscape on a pendulum theta x torque grid at fixed theta_dot.
// Torques are in environment units.
std::vector<LandscapeRow> landscape_dump(const StateProblem& problem, const envs::EnvSpec& spec,
                                         std::span<const double> thetas,
                                         std::span<const double> taus, double theta_dot,
                                         const SolverSettings& settings = {});
void write_landscape_csv(const std::string& path, const std::vector<LandscapeRow>& rows);

struct AssumptionReport {
  double eps_opt_min = 0.0;
  double eps_opt_mean = 0.0;
  double eps_opt_max = 0.0;
  double solver_tol = 0.0;     // largest value_tol seen
  double lipschitz = 0.0;      // max finite-difference slope of psi
  double curvature = 0.0;      // min second difference of psi / h^2
  std::size_t states = 0;
};

// Empirical suboptimality of the actor, and Lipschitz and curvature
// estimates of psi along each action axis on a grid_n grid through the
// box center.
AssumptionReport measure_assumptions(const StateProblem& problem, std::span<const double> states,
                                     const SolverSettings& settings = {});

}  // namespace pdalab::subsolver

#endif  // PDALAB_SUBSOLVER_SUBSOLVER_HPP_

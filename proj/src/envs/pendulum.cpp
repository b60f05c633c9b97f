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

#include "pdalab/envs/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pdalab::envs {

double wrap_angle(double theta) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::fmod(theta + std::numbers::pi, kTwoPi);
  if (r < 0) r += kTwoPi;
  // r in [0, 2pi) maps to [-pi, pi); move the left end to the right.
  double w = r - std::numbers::pi;
  return w == -std::numbers::pi ? std::numbers::pi : w;
}

PendulumTransition pendulum_step(const PendulumState& state, double torque,
                                 const PendulumParams& p) {
  const double u = std::clamp(torque, -p.max_torque, p.max_torque);
  const double accel = 3.0 * p.gravity / (2.0 * p.length) * std::sin(state.theta) +
                       3.0 / (p.mass * p.length * p.length) * u;
  PendulumTransition out;
  out.next.theta_dot = std::clamp(state.theta_dot + accel * p.dt, -p.max_speed, p.max_speed);
  out.next.theta = state.theta + out.next.theta_dot * p.dt;
  const double th = wrap_angle(state.theta);
  out.reward = -(th * th + 0.1 * out.next.theta_dot * out.next.theta_dot + 0.001 * u * u);
  return out;
}

std::array<double, 3> pendulum_observation(const PendulumState& s) {
  return {std::cos(s.theta), std::sin(s.theta), s.theta_dot};
}

PendulumEnv::PendulumEnv(PendulumParams params) : params_(params) {
  spec_.obs_dim = 3;
  spec_.act_dim = 1;
  spec_.act_low = {-params_.max_torque};
  spec_.act_high = {params_.max_torque};
  spec_.horizon = params_.horizon;
  spec_.gamma = 0.99;
  spec_.validate();
}

std::vector<double> PendulumEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  state_.theta = uniform(rng, -std::numbers::pi, std::numbers::pi);
  state_.theta_dot = uniform(rng, -1.0, 1.0);
  t_ = 0;
  auto obs = pendulum_observation(state_);
  return {obs.begin(), obs.end()};
}

StepResult PendulumEnv::step(std::span<const double> action) {
  require_finite_action(action, 1, "pendulum");
  auto tr = pendulum_step(state_, action[0], params_);
  state_ = tr.next;
  ++t_;
  auto obs = pendulum_observation(state_);
  return {{obs.begin(), obs.end()}, tr.reward, t_ >= params_.horizon};
}

std::unique_ptr<Env> PendulumEnv::clone() const {
  return std::make_unique<PendulumEnv>(*this);
}

}  // namespace pdalab::envs

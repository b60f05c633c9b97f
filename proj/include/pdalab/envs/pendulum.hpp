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

#ifndef PDALAB_ENVS_PENDULUM_HPP_
#define PDALAB_ENVS_PENDULUM_HPP_

#include <array>

#include "pdalab/common/random.hpp"
#include "pdalab/envs/env.hpp"

namespace pdalab::envs {

// Swing-up pendulum with the Pendulum-v1 constants. theta = 0 is upright.
struct PendulumParams {
  double gravity = 10.0;
  double mass = 1.0;
  double length = 1.0;
  double dt = 0.05;
  double max_speed = 8.0;
  double max_torque = 2.0;
  int horizon = 200;
};

struct PendulumState {
  double theta = 0.0;      // rad
  double theta_dot = 0.0;  // rad/s
};

struct PendulumTransition {
  PendulumState next;
  double reward = 0.0;
};

// Maps an angle into (-pi, pi].
double wrap_angle(double theta);

// One explicit Euler step. Torque is clipped to [-max_torque, max_torque];
// the reward charges the pre-step angle, the post-step velocity and the
// applied torque.
PendulumTransition pendulum_step(const PendulumState& state, double torque,
                                 const PendulumParams& params = {});

std::array<double, 3> pendulum_observation(const PendulumState& state);

class PendulumEnv final : public Env {
 public:
  explicit PendulumEnv(PendulumParams params = {});

  std::string id() const override { return "pendulum"; }
  const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  std::unique_ptr<Env> clone() const override;

  const PendulumState& state() const { return state_; }
  void set_state(const PendulumState& state) { state_ = state; }
  const PendulumParams& params() const { return params_; }

 private:
  PendulumParams params_;
  EnvSpec spec_;
  PendulumState state_;
  int t_ = 0;
};

}  // namespace pdalab::envs

#endif  // PDALAB_ENVS_PENDULUM_HPP_

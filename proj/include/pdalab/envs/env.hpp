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

#ifndef PDALAB_ENVS_ENV_HPP_
#define PDALAB_ENVS_ENV_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace pdalab::envs {

// Continuous-action MDP description. Actions live in the box
// [act_low, act_high].
struct EnvSpec {
  std::size_t obs_dim = 1;
  std::size_t act_dim = 1;
  std::vector<double> act_low;
  std::vector<double> act_high;
  int horizon = 1;
  double gamma = 0.99;

  // Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

void to_json(nlohmann::json& j, const EnvSpec& spec);

struct StepResult {
  std::vector<double> obs;
  double reward = 0.0;
  bool done = false;
};

// Rewards follow the usual maximization convention: reward = -cost.
class Env {
 public:
  virtual ~Env() = default;

  virtual std::string id() const = 0;
  virtual const EnvSpec& spec() const = 0;
  // Deterministic under seed.
  virtual std::vector<double> reset(std::uint64_t seed) = 0;
  // Action in environment units; every env clips to its own box.
  virtual StepResult step(std::span<const double> action) = 0;
  virtual std::unique_ptr<Env> clone() const = 0;
};

// "pendulum", "newsvendor", or "synthetic:<quadratic|piecewise|cosine>".
std::unique_ptr<Env> make_env(const std::string& id);

// Shared argument check for all step functions.
void require_finite_action(std::span<const double> action, std::size_t act_dim,
                           const char* env_name);

}  // namespace pdalab::envs

#endif  // PDALAB_ENVS_ENV_HPP_

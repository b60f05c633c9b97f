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

#ifndef PDALAB_ROLLOUT_ROLLOUT_HPP_
#define PDALAB_ROLLOUT_ROLLOUT_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pdalab/common/random.hpp"
#include "pdalab/envs/env.hpp"

namespace pdalab::rollout {

// Agents act in the normalized box [-1, 1]^act_dim. These map between that
// space and the environment's own box.
std::vector<double> to_env_action(std::span<const double> agent_action,
                                  const envs::EnvSpec& spec);
std::vector<double> to_agent_action(std::span<const double> env_action,
                                    const envs::EnvSpec& spec);

struct ActionSample {
  // Stored in the batch; for Gaussian policies this is the unclipped sample.
  std::vector<double> action;
  // Point in [-1, 1]^act_dim sent to the environment after mapping.
  std::vector<double> applied;
  double log_prob = 0.0;
};

// What collection needs from an algorithm: an action sampler and a critic.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::size_t obs_dim() const = 0;
  virtual std::size_t act_dim() const = 0;
  virtual ActionSample act(std::span<const double> obs, bool explore, Rng& rng) const = 0;
  virtual double value(std::span<const double> obs) const = 0;
};

struct Transition {
  std::vector<double> obs;
  std::vector<double> action;
  double reward = 0.0;
  bool done = false;
  double value = 0.0;
  double log_prob = 0.0;
};

// Contiguous run of transitions from one environment. The bootstrap value
// stands in for V at the state after the last transition (0 when it ended
// an episode).
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  double bootstrap_value = 0.0;
};

// Row-major structure-of-arrays view of collected experience.
struct Batch {
  std::size_t obs_dim = 0;
  std::size_t act_dim = 0;
  std::vector<double> obs;
  std::vector<double> actions;
  std::vector<double> rewards;
  std::vector<bool> dones;
  std::vector<double> values;
  std::vector<double> log_probs;
  std::vector<Segment> segments;

  // Filled by finalize.
  std::vector<double> advantages_raw;
  std::vector<double> returns;
  std::vector<double> advantages;

  std::size_t size() const { return rewards.size(); }
  void push(const Transition& t);
  Transition transition(std::size_t i) const;
  std::span<const double> obs_row(std::size_t i) const;
  std::span<const double> action_row(std::size_t i) const;
};

// Generalized advantage estimation over one segment. `values` has length
// rewards.size() + 1; the last entry is the bootstrap value.
std::vector<double> compute_gae(std::span<const double> rewards,
                                std::span<const double> values,
                                const std::vector<bool>& dones, double gamma,
                                double gae_lambda);

// Standardizes in place: (x - mean) / max(std, 1e-8), population std.
void normalize(std::vector<double>& x);

// Computes raw advantages per segment, lambda-returns G = A + V and the
// standardized advantages.
void finalize(Batch& batch, double gamma, double gae_lambda);

// Steps a fixed set of environments round-robin. Episodes persist across
// collect calls and reset automatically, each reset drawing a fresh seed
// derived from the collector seed, env index and episode count.
class Collector {
 public:
  Collector(const envs::Env& prototype, std::size_t n_envs, std::uint64_t seed);

  Batch collect(const Agent& agent, std::size_t n_steps, bool explore);

  const envs::EnvSpec& spec() const { return slots_.front().env->spec(); }
  std::size_t total_steps() const { return total_steps_; }
  // Undiscounted returns of the episodes finished since the last call.
  std::vector<double> take_finished_returns();

 private:
  struct Slot {
    std::unique_ptr<envs::Env> env;
    std::vector<double> obs;
    std::uint64_t episodes = 0;
    double episode_return = 0.0;
  };

  void reset_slot(std::size_t index);

  std::vector<Slot> slots_;
  std::uint64_t seed_;
  Rng rng_;
  std::size_t total_steps_ = 0;
  std::vector<double> finished_;
};

struct EvalResult {
  std::vector<double> returns;
  double mean = 0.0;
  double std = 0.0;  // population
};

// Runs `episodes` noise-free episodes on clones of `prototype`. Episode i is
// reset with mix_seed(seed, i), so repeated calls see the same start states.
EvalResult evaluate(const Agent& agent, const envs::Env& prototype, int episodes,
                    std::uint64_t seed);

}  // namespace pdalab::rollout

#endif  // PDALAB_ROLLOUT_ROLLOUT_HPP_

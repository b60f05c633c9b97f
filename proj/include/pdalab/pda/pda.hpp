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

#ifndef PDALAB_PDA_PDA_HPP_
#define PDALAB_PDA_PDA_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pdalab/autodiff/adam.hpp"
#include "pdalab/autodiff/mlp.hpp"
#include "pdalab/common/batching.hpp"
#include "pdalab/common/metrics.hpp"
#include "pdalab/common/random.hpp"
#include "pdalab/envs/env.hpp"
#include "pdalab/rollout/rollout.hpp"

namespace pdalab::pda {

enum class NoiseMode { decaying, constant };

struct SmoothingMode {
  enum class Kind { dual_averaging, exponential };
  Kind kind = Kind::dual_averaging;
  double alpha = 0.5;  // used by exponential only

  static SmoothingMode dual_averaging() { return {}; }
  static SmoothingMode exponential(double alpha);
  // "dual_averaging", or "exponential" / "exponential:<alpha>".
  static SmoothingMode parse(const std::string& text);
  std::string to_string() const;
  void validate() const;
};

// Iteration counter with beta = k + 1 and beta_sum = sum_{i<=k} beta_i.
struct PdaSchedule {
  int k = 0;
  double beta = 1.0;
  double beta_sum = 1.0;
  double lambda = 0.5;
  double sigma0 = 1.3;
  NoiseMode noise = NoiseMode::decaying;

  // beta += 1, beta_sum += beta.
  void advance();
  // Weight lambda * beta^1.5 / beta_sum on ||a - prox||^2 in the actor loss.
  double regularizer_coeff() const;
};

// Exploration standard deviation: sigma0 / beta^0.3, or sigma0 when constant.
double sigma(const PdaSchedule& schedule);

// Euclidean Bregman divergence 0.5 * ||a - a0||^2.
double bregman(std::span<const double> a, std::span<const double> a0);

// Regression targets for the sum-advantage network.
//   dual averaging: (beta_sum - beta)/beta_sum * old + beta/beta_sum * adv
//   exponential:    (1 - alpha) * old + alpha * adv
std::vector<double> psi_sum_target(std::span<const double> old, std::span<const double> adv,
                                   const PdaSchedule& schedule, const SmoothingMode& mode);

// Exact lookup-table stand-in for the sum-advantage network: each update
// writes the regression target directly.
class TabularPsiSum {
 public:
  double get(std::size_t key) const;
  void update(std::span<const std::size_t> keys, std::span<const double> adv,
              const PdaSchedule& schedule, const SmoothingMode& mode);

 private:
  std::map<std::size_t, double> table_;
};

enum class ProxMode { zero, snapshot };

struct PdaConfig {
  double lambda = 0.5;
  double sigma0 = 1.3;
  NoiseMode noise = NoiseMode::decaying;
  SmoothingMode smoothing;
  ProxMode prox = ProxMode::zero;
  std::size_t passes = 10;
  std::size_t minibatch = 250;
  double lr = 1e-3;
  double max_grad_norm = 0.1;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  // Regress V onto G divided by the running std of G.
  bool normalize_returns = true;
  std::vector<std::size_t> hidden = ad::kDefaultHidden;

  void validate() const;
};

// Mean loss of the final pass and the per-pass trace.
struct LossTrace {
  std::vector<double> per_pass;
  double last() const { return per_pass.empty() ? 0.0 : per_pass.back(); }
};

// Networks, optimizers and schedule of one run. Actions live in the
// normalized box [-1, 1]^act_dim; the actor output is tanh-squashed.
class PdaAgent final : public rollout::Agent {
 public:
  PdaAgent(std::size_t obs_dim, std::size_t act_dim, const PdaConfig& config,
           std::uint64_t seed);

  std::size_t obs_dim() const override { return obs_dim_; }
  std::size_t act_dim() const override { return act_dim_; }
  rollout::ActionSample act(std::span<const double> obs, bool explore, Rng& rng) const override;
  double value(std::span<const double> obs) const override;

  // Deterministic actor output for `rows` observations.
  std::vector<double> actor_mean(std::span<const double> obs, std::size_t rows) const;
  // Prox center pi_0 for `rows` observations.
  std::vector<double> prox_center(std::span<const double> obs, std::size_t rows) const;
  // psi_sum(s, a) for matching rows of observations and actions.
  std::vector<double> psi_sum(std::span<const double> obs, std::span<const double> actions,
                              std::size_t rows) const;
  // Scaled sub-problem objective psi_sum(s, a) + coeff * ||a - pi_0(s)||^2.
  double subproblem_objective(std::span<const double> obs, std::span<const double> action) const;

  // Individual update steps; callers normally use iterate().
  LossTrace update_value(const rollout::Batch& batch);
  LossTrace update_psi_sum(const rollout::Batch& batch);
  LossTrace update_actor(const rollout::Batch& batch);

  const PdaSchedule& schedule() const { return schedule_; }
  PdaSchedule& mutable_schedule() { return schedule_; }
  const PdaConfig& config() const { return config_; }
  ad::Mlp& actor() { return actor_; }
  ad::Mlp& value_net() { return value_; }
  ad::Mlp& psi_sum_net() { return psi_; }
  const ad::Mlp& actor() const { return actor_; }
  const ad::Mlp& value_net() const { return value_; }
  const ad::Mlp& psi_sum_net() const { return psi_; }
  double return_scale() const;
  void observe_returns(std::span<const double> returns);

  nlohmann::json checkpoint() const;
  void restore(const nlohmann::json& j);

 private:
  std::size_t obs_dim_;
  std::size_t act_dim_;
  PdaConfig config_;
  PdaSchedule schedule_;
  ad::Mlp actor_;
  ad::Mlp value_;
  ad::Mlp psi_;
  ad::Mlp prox_;  // frozen initial actor, used in snapshot mode
  ad::AdamState actor_opt_;
  ad::AdamState value_opt_;
  ad::AdamState psi_opt_;
  RunningStat return_stat_;
  Rng rng_;
};

// One training-loop iteration: collect, finalize, update value, update
// sum-advantage, update actor, advance the schedule.
IterationStats pda_iteration(PdaAgent& agent, rollout::Collector& collector,
                             std::size_t steps_per_collect);

}  // namespace pdalab::pda

#endif  // PDALAB_PDA_PDA_HPP_

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

#ifndef PDALAB_PPO_PPO_HPP_
#define PDALAB_PPO_PPO_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "pdalab/autodiff/adam.hpp"
#include "pdalab/autodiff/mlp.hpp"
#include "pdalab/autodiff/tensor.hpp"
#include "pdalab/common/batching.hpp"
#include "pdalab/common/metrics.hpp"
#include "pdalab/rollout/rollout.hpp"

namespace pdalab::ppo {

struct PpoConfig {
  double clip = 0.2;
  double vf_coeff = 0.25;
  double ent_coeff = 0.0;
  double lr = 3e-4;
  std::size_t minibatch = 64;
  std::size_t passes = 10;
  double max_grad_norm = 0.5;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  // Linear decay of the learning rate to zero over `decay_iterations`.
  bool lr_decay = false;
  int decay_iterations = 0;
  double init_log_std = -0.5;
  bool normalize_returns = true;
  std::vector<std::size_t> hidden = ad::kDefaultHidden;

  void validate() const;
};

// Diagonal Gaussian with an unbounded mean network and state-independent
// log standard deviations.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(std::size_t obs_dim, std::size_t act_dim, Rng& rng,
                 const std::vector<std::size_t>& hidden, double init_log_std);

  // [rows, act_dim] means, recorded on the tape.
  ad::Tensor mean(const ad::Tensor& obs) const;
  // [rows, 1] log densities of `actions` under the policy at `obs`.
  ad::Tensor log_prob(const ad::Tensor& obs, const ad::Tensor& actions) const;
  // Differential entropy of the (state-independent) Gaussian.
  ad::Tensor entropy() const;

  std::vector<double> mean_values(std::span<const double> obs, std::size_t rows) const;
  std::span<const double> log_std_values() const { return log_std_.data(); }

  ad::Mlp& mean_net() { return mean_; }
  const ad::Mlp& mean_net() const { return mean_; }
  ad::Tensor& log_std() { return log_std_; }
  const ad::Tensor& log_std() const { return log_std_; }

 private:
  ad::Mlp mean_;
  ad::Tensor log_std_;
};

// Reference diagonal Gaussian log density.
double gaussian_log_prob(std::span<const double> x, std::span<const double> mean,
                         std::span<const double> log_std);

struct PpoLoss {
  ad::Tensor total;  // -policy_term + vf_coeff * value_mse - ent_coeff * entropy
  double policy_term = 0.0;
  double value_mse = 0.0;
  double entropy = 0.0;
};

// Clipped surrogate on one minibatch. `log_probs` and `values` are [m, 1]
// tensors; the remaining arrays hold m entries. Throws ad::NonFiniteError
// when a ratio overflows.
PpoLoss ppo_loss(const ad::Tensor& log_probs, std::span<const double> old_log_probs,
                 std::span<const double> advantages, const ad::Tensor& values,
                 std::span<const double> returns, const ad::Tensor& entropy, double clip,
                 double vf_coeff, double ent_coeff);

class PpoAgent final : public rollout::Agent {
 public:
  PpoAgent(std::size_t obs_dim, std::size_t act_dim, const PpoConfig& config, std::uint64_t seed);

  std::size_t obs_dim() const override { return obs_dim_; }
  std::size_t act_dim() const override { return act_dim_; }
  // Stores the raw Gaussian sample and its log density; the applied action
  // is clipped to [-1, 1]. Without exploration the clipped mean is used.
  rollout::ActionSample act(std::span<const double> obs, bool explore, Rng& rng) const override;
  double value(std::span<const double> obs) const override;

  struct UpdateStats {
    double policy_term = 0.0;
    double value_mse = 0.0;
  };
  UpdateStats update(const rollout::Batch& batch);

  int iterations() const { return iterations_; }
  double current_lr() const { return opt_.lr; }
  const PpoConfig& config() const { return config_; }
  GaussianPolicy& policy() { return policy_; }
  const GaussianPolicy& policy() const { return policy_; }
  ad::Mlp& critic() { return critic_; }
  double return_scale() const;
  void observe_returns(std::span<const double> returns);

  nlohmann::json checkpoint() const;
  void restore(const nlohmann::json& j);

 private:
  std::vector<ad::Tensor> all_parameters();

  std::size_t obs_dim_;
  std::size_t act_dim_;
  PpoConfig config_;
  GaussianPolicy policy_;
  ad::Mlp critic_;
  ad::AdamState opt_;
  RunningStat return_stat_;
  Rng rng_;
  int iterations_ = 0;
};

// Collect, compute GAE and returns, run the minibatch epochs.
IterationStats ppo_iteration(PpoAgent& agent, rollout::Collector& collector,
                             std::size_t steps_per_collect);

}  // namespace pdalab::ppo

#endif  // PDALAB_PPO_PPO_HPP_

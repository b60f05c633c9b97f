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

#include "pdalab/ppo/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "pdalab/autodiff/checkpoint.hpp"

namespace pdalab::ppo {

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}  // namespace

void PpoConfig::validate() const {
  if (!(clip > 0 && clip < 1)) throw std::invalid_argument("ppo: clip must lie in (0, 1)");
  if (vf_coeff < 0 || ent_coeff < 0) throw std::invalid_argument("ppo: loss coefficients must be >= 0");
  if (!(lr > 0)) throw std::invalid_argument("ppo: lr must be positive");
  if (minibatch == 0 || passes == 0) throw std::invalid_argument("ppo: passes and minibatch must be >= 1");
  if (!(max_grad_norm > 0)) throw std::invalid_argument("ppo: max_grad_norm must be positive");
  if (!(gamma >= 0 && gamma < 1)) throw std::invalid_argument("ppo: gamma must lie in [0, 1)");
  if (!(gae_lambda >= 0 && gae_lambda <= 1)) throw std::invalid_argument("ppo: gae_lambda must lie in [0, 1]");
  if (lr_decay && decay_iterations < 1) throw std::invalid_argument("ppo: lr decay needs decay_iterations >= 1");
}

GaussianPolicy::GaussianPolicy(std::size_t obs_dim, std::size_t act_dim, Rng& rng,
                               const std::vector<std::size_t>& hidden, double init_log_std)
    : mean_(obs_dim, act_dim, rng, hidden),
      log_std_(ad::Tensor::full({act_dim}, init_log_std, true)) {}

ad::Tensor GaussianPolicy::mean(const ad::Tensor& obs) const { return mean_.forward(obs); }

ad::Tensor GaussianPolicy::log_prob(const ad::Tensor& obs, const ad::Tensor& actions) const {
  const double d = static_cast<double>(log_std_.size());
  auto z = (actions - mean(obs)) * ad::exp(ad::scale(log_std_, -1.0));
  auto quad = ad::scale(ad::sum_cols(ad::square(z)), -0.5);
  return quad - ad::shift(ad::sum(log_std_), d * kHalfLog2Pi);
}

ad::Tensor GaussianPolicy::entropy() const {
  const double d = static_cast<double>(log_std_.size());
  return ad::shift(ad::sum(log_std_), d * (0.5 + kHalfLog2Pi));
}

std::vector<double> GaussianPolicy::mean_values(std::span<const double> obs,
                                                std::size_t rows) const {
  return mean_.evaluate(obs, rows);
}

double gaussian_log_prob(std::span<const double> x, std::span<const double> mean,
                         std::span<const double> log_std) {
  if (x.size() != mean.size() || x.size() != log_std.size()) {
    throw std::invalid_argument("gaussian_log_prob: dimension mismatch");
  }
  double lp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = (x[i] - mean[i]) / std::exp(log_std[i]);
    lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi;
  }
  return lp;
}

PpoLoss ppo_loss(const ad::Tensor& log_probs, std::span<const double> old_log_probs,
                 std::span<const double> advantages, const ad::Tensor& values,
                 std::span<const double> returns, const ad::Tensor& entropy, double clip,
                 double vf_coeff, double ent_coeff) {
  const std::size_t m = old_log_probs.size();
  if (log_probs.shape() != ad::Shape{m, 1} || values.shape() != ad::Shape{m, 1} ||
      advantages.size() != m || returns.size() != m) {
    throw std::invalid_argument("ppo_loss: inputs must describe the same minibatch");
  }
  auto old = ad::Tensor::from({m, 1}, {old_log_probs.begin(), old_log_probs.end()});
  auto adv = ad::Tensor::from({m, 1}, {advantages.begin(), advantages.end()});
  auto ret = ad::Tensor::from({m, 1}, {returns.begin(), returns.end()});
  auto ratio = ad::exp(log_probs - old);
  auto unclipped = ratio * adv;
  auto clipped = ad::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv;
  auto policy_term = ad::mean(ad::minimum(unclipped, clipped));
  auto value_mse = ad::mean(ad::square(values - ret));
  PpoLoss out;
  out.total = ad::scale(policy_term, -1.0) + ad::scale(value_mse, vf_coeff) -
              ad::scale(entropy, ent_coeff);
  out.policy_term = policy_term.item();
  out.value_mse = value_mse.item();
  out.entropy = entropy.item();
  return out;
}

PpoAgent::PpoAgent(std::size_t obs_dim, std::size_t act_dim, const PpoConfig& config,
                   std::uint64_t seed)
    : obs_dim_(obs_dim), act_dim_(act_dim), config_(config), rng_(mix_seed(seed, 0x70706f)) {
  config_.validate();
  if (obs_dim == 0 || act_dim == 0) throw std::invalid_argument("PpoAgent: dimensions must be positive");
  Rng init(mix_seed(seed, 0x696e6974));
  policy_ = GaussianPolicy(obs_dim, act_dim, init, config_.hidden, config_.init_log_std);
  critic_ = ad::Mlp(obs_dim, 1, init, config_.hidden);
  opt_ = ad::make_adam_state(all_parameters(), config_.lr);
}

std::vector<ad::Tensor> PpoAgent::all_parameters() {
  std::vector<ad::Tensor> params = policy_.mean_net().parameters();
  params.push_back(policy_.log_std());
  for (auto& p : critic_.parameters()) params.push_back(p);
  return params;
}

rollout::ActionSample PpoAgent::act(std::span<const double> obs, bool explore, Rng& rng) const {
  if (obs.size() != obs_dim_) throw std::invalid_argument("PpoAgent::act: observation has wrong size");
  rollout::ActionSample s;
  auto mean = policy_.mean_values(obs, 1);
  auto log_std = policy_.log_std_values();
  s.action = mean;
  if (explore) {
    for (std::size_t i = 0; i < act_dim_; ++i) {
      s.action[i] = mean[i] + std::exp(log_std[i]) * standard_normal(rng);
    }
  }
  s.log_prob = gaussian_log_prob(s.action, mean, log_std);
  s.applied = s.action;
  for (double& a : s.applied) a = std::clamp(a, -1.0, 1.0);
  return s;
}

double PpoAgent::return_scale() const {
  return config_.normalize_returns ? std::sqrt(return_stat_.var() + 1e-8) : 1.0;
}

void PpoAgent::observe_returns(std::span<const double> returns) {
  if (config_.normalize_returns) return_stat_.update(returns);
}

double PpoAgent::value(std::span<const double> obs) const {
  return critic_.evaluate(obs, 1)[0] * return_scale();
}

PpoAgent::UpdateStats PpoAgent::update(const rollout::Batch& batch) {
  const std::size_t n = batch.size();
  if (batch.advantages.size() != n || batch.returns.size() != n) {
    throw std::invalid_argument("PpoAgent::update: batch is not finalized");
  }
  if (config_.lr_decay) {
    const double frac = 1.0 - static_cast<double>(iterations_) / config_.decay_iterations;
    opt_.lr = config_.lr * std::max(frac, 0.0);
  }
  const double inv_scale = 1.0 / return_scale();
  auto params = all_parameters();
  UpdateStats stats;
  double policy_total = 0.0, value_total = 0.0;
  std::size_t count = 0;
  for (std::size_t pass = 0; pass < config_.passes; ++pass) {
    for (const auto& idx : shuffled_minibatches(n, config_.minibatch, rng_)) {
      const std::size_t m = idx.size();
      auto obs = ad::Tensor::from({m, obs_dim_}, gather_rows(batch.obs, obs_dim_, idx));
      auto actions = ad::Tensor::from({m, act_dim_}, gather_rows(batch.actions, act_dim_, idx));
      std::vector<double> old(m), adv(m), ret(m);
      for (std::size_t i = 0; i < m; ++i) {
        old[i] = batch.log_probs[idx[i]];
        adv[i] = batch.advantages[idx[i]];
        ret[i] = batch.returns[idx[i]] * inv_scale;
      }
      auto loss = ppo_loss(policy_.log_prob(obs, actions), old, adv, critic_.forward(obs), ret,
                           policy_.entropy(), config_.clip, config_.vf_coeff, config_.ent_coeff);
      ad::zero_grads(params);
      loss.total.backward();
      ad::clip_grad_norm(params, config_.max_grad_norm);
      ad::adam_step(params, opt_);
      policy_total += loss.policy_term;
      value_total += loss.value_mse;
      ++count;
    }
  }
  ++iterations_;
  stats.policy_term = policy_total / static_cast<double>(count);
  stats.value_mse = value_total / static_cast<double>(count);
  return stats;
}

nlohmann::json PpoAgent::checkpoint() const {
  ad::NamedTensors named = policy_.mean_net().named_parameters("policy.mean.");
  named.emplace_back("policy.log_std", policy_.log_std());
  for (auto& p : critic_.named_parameters("critic.")) named.push_back(p);
  return {{"iterations", iterations_},
          {"return_stat", {{"count", return_stat_.count()}, {"mean", return_stat_.mean()},
                           {"var", return_stat_.var()}}},
          {"parameters", ad::parameters_to_json(named)}};
}

void PpoAgent::restore(const nlohmann::json& j) {
  ad::NamedTensors named = policy_.mean_net().named_parameters("policy.mean.");
  named.emplace_back("policy.log_std", policy_.log_std());
  for (auto& p : critic_.named_parameters("critic.")) named.push_back(p);
  ad::parameters_from_json(j.at("parameters"), named);
  iterations_ = j.at("iterations").get<int>();
  const auto& r = j.at("return_stat");
  return_stat_.restore(r.at("count").get<double>(), r.at("mean").get<double>(),
                       r.at("var").get<double>());
}

IterationStats ppo_iteration(PpoAgent& agent, rollout::Collector& collector,
                             std::size_t steps_per_collect) {
  IterationStats stats;
  stats.iter = agent.iterations() + 1;
  stats.beta = std::numeric_limits<double>::quiet_NaN();
  stats.psi_loss = std::numeric_limits<double>::quiet_NaN();
  const auto log_std = agent.policy().log_std_values();
  double sd = 0.0;
  for (double l : log_std) sd += std::exp(l);
  stats.sigma = sd / static_cast<double>(log_std.size());

  auto batch = collector.collect(agent, steps_per_collect, true);
  rollout::finalize(batch, agent.config().gamma, agent.config().gae_lambda);
  agent.observe_returns(batch.returns);
  auto upd = agent.update(batch);
  stats.value_loss = upd.value_mse;
  stats.actor_loss = -upd.policy_term;

  stats.env_steps = collector.total_steps();
  auto finished = collector.take_finished_returns();
  stats.train_return_mean =
      finished.empty() ? std::numeric_limits<double>::quiet_NaN()
                       : std::accumulate(finished.begin(), finished.end(), 0.0) /
                             static_cast<double>(finished.size());
  return stats;
}

}  // namespace pdalab::ppo

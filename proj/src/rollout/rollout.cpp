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

#include "pdalab/rollout/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pdalab::rollout {

std::vector<double> to_env_action(std::span<const double> agent_action,
                                  const envs::EnvSpec& spec) {
  if (agent_action.size() != spec.act_dim) {
    throw std::invalid_argument("to_env_action: action has wrong dimension");
  }
  std::vector<double> out(spec.act_dim);
  for (std::size_t i = 0; i < spec.act_dim; ++i) {
    const double a = std::clamp(agent_action[i], -1.0, 1.0);
    out[i] = spec.act_low[i] + 0.5 * (a + 1.0) * (spec.act_high[i] - spec.act_low[i]);
  }
  return out;
}

std::vector<double> to_agent_action(std::span<const double> env_action,
                                    const envs::EnvSpec& spec) {
  if (env_action.size() != spec.act_dim) {
    throw std::invalid_argument("to_agent_action: action has wrong dimension");
  }
  std::vector<double> out(spec.act_dim);
  for (std::size_t i = 0; i < spec.act_dim; ++i) {
    out[i] = 2.0 * (env_action[i] - spec.act_low[i]) / (spec.act_high[i] - spec.act_low[i]) - 1.0;
  }
  return out;
}

void Batch::push(const Transition& t) {
  if (t.obs.size() != obs_dim || t.action.size() != act_dim) {
    throw std::invalid_argument("Batch::push: transition dimensions do not match the batch");
  }
  if (!std::isfinite(t.value)) throw std::invalid_argument("Batch::push: non-finite value estimate");
  obs.insert(obs.end(), t.obs.begin(), t.obs.end());
  actions.insert(actions.end(), t.action.begin(), t.action.end());
  rewards.push_back(t.reward);
  dones.push_back(t.done);
  values.push_back(t.value);
  log_probs.push_back(t.log_prob);
}

Transition Batch::transition(std::size_t i) const {
  auto o = obs_row(i);
  auto a = action_row(i);
  return {{o.begin(), o.end()}, {a.begin(), a.end()}, rewards[i], dones[i], values[i], log_probs[i]};
}

std::span<const double> Batch::obs_row(std::size_t i) const {
  return std::span<const double>(obs).subspan(i * obs_dim, obs_dim);
}

std::span<const double> Batch::action_row(std::size_t i) const {
  return std::span<const double>(actions).subspan(i * act_dim, act_dim);
}

std::vector<double> compute_gae(std::span<const double> rewards,
                                std::span<const double> values,
                                const std::vector<bool>& dones, double gamma,
                                double gae_lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1 || dones.size() != n) {
    throw std::invalid_argument("compute_gae: expected values of length " + std::to_string(n + 1) +
                                " and dones of length " + std::to_string(n));
  }
  std::vector<double> adv(n);
  double next = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * live * values[t + 1] - values[t];
    next = delta + gamma * gae_lambda * live * next;
    adv[t] = next;
  }
  return adv;
}

void normalize(std::vector<double>& x) {
  if (x.empty()) return;
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double std = std::max(std::sqrt(var / n), 1e-8);
  for (double& v : x) v = (v - mean) / std;
}

void finalize(Batch& batch, double gamma, double gae_lambda) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("finalize: empty batch");
  if (batch.segments.empty()) batch.segments.push_back({0, n, 0.0});
  batch.advantages_raw.assign(n, 0.0);
  std::size_t covered = 0;
  for (const auto& seg : batch.segments) {
    if (seg.begin != covered || seg.end < seg.begin || seg.end > n) {
      throw std::invalid_argument("finalize: segments must tile the batch in order");
    }
    const std::size_t len = seg.end - seg.begin;
    std::vector<double> values(batch.values.begin() + seg.begin, batch.values.begin() + seg.end);
    values.push_back(seg.bootstrap_value);
    std::vector<bool> dones(batch.dones.begin() + seg.begin, batch.dones.begin() + seg.end);
    auto adv = compute_gae(std::span<const double>(batch.rewards).subspan(seg.begin, len), values,
                           dones, gamma, gae_lambda);
    std::copy(adv.begin(), adv.end(), batch.advantages_raw.begin() + seg.begin);
    covered = seg.end;
  }
  if (covered != n) throw std::invalid_argument("finalize: segments must tile the batch in order");
  batch.returns.resize(n);
  for (std::size_t i = 0; i < n; ++i) batch.returns[i] = batch.advantages_raw[i] + batch.values[i];
  batch.advantages = batch.advantages_raw;
  normalize(batch.advantages);
}

Collector::Collector(const envs::Env& prototype, std::size_t n_envs, std::uint64_t seed)
    : seed_(seed), rng_(mix_seed(seed, 0x6e6f697365)) {
  if (n_envs == 0) throw std::invalid_argument("Collector: need at least one environment");
  slots_.resize(n_envs);
  for (std::size_t i = 0; i < n_envs; ++i) {
    slots_[i].env = prototype.clone();
    reset_slot(i);
  }
}

void Collector::reset_slot(std::size_t index) {
  auto& slot = slots_[index];
  const std::uint64_t tag = (static_cast<std::uint64_t>(index) << 40) | slot.episodes;
  slot.obs = slot.env->reset(mix_seed(seed_, tag));
  ++slot.episodes;
  slot.episode_return = 0.0;
}

Batch Collector::collect(const Agent& agent, std::size_t n_steps, bool explore) {
  if (n_steps == 0) throw std::invalid_argument("collect: n_steps must be >= 1");
  const auto& sp = spec();
  if (agent.obs_dim() != sp.obs_dim || agent.act_dim() != sp.act_dim) {
    throw std::invalid_argument("collect: agent dimensions do not match the environment");
  }
  std::vector<Batch> per_env(slots_.size());
  for (auto& b : per_env) {
    b.obs_dim = sp.obs_dim;
    b.act_dim = sp.act_dim;
  }
  for (std::size_t step = 0; step < n_steps; ++step) {
    const std::size_t i = step % slots_.size();
    auto& slot = slots_[i];
    auto sample = agent.act(slot.obs, explore, rng_);
    Transition t;
    t.obs = slot.obs;
    t.value = agent.value(slot.obs);
    t.log_prob = sample.log_prob;
    auto result = slot.env->step(to_env_action(sample.applied, sp));
    t.action = std::move(sample.action);
    t.reward = result.reward;
    t.done = result.done;
    per_env[i].push(t);
    slot.episode_return += result.reward;
    ++total_steps_;
    if (result.done) {
      finished_.push_back(slot.episode_return);
      reset_slot(i);
    } else {
      slot.obs = std::move(result.obs);
    }
  }

  Batch batch;
  batch.obs_dim = sp.obs_dim;
  batch.act_dim = sp.act_dim;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const auto& part = per_env[i];
    if (part.size() == 0) continue;
    Segment seg;
    seg.begin = batch.size();
    for (std::size_t r = 0; r < part.size(); ++r) batch.push(part.transition(r));
    seg.end = batch.size();
    seg.bootstrap_value = part.dones.back() ? 0.0 : agent.value(slots_[i].obs);
    batch.segments.push_back(seg);
  }
  return batch;
}

std::vector<double> Collector::take_finished_returns() {
  std::vector<double> out;
  out.swap(finished_);
  return out;
}

EvalResult evaluate(const Agent& agent, const envs::Env& prototype, int episodes,
                    std::uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("evaluate: need at least one episode");
  const auto& sp = prototype.spec();
  if (agent.obs_dim() != sp.obs_dim || agent.act_dim() != sp.act_dim) {
    throw std::invalid_argument("evaluate: agent dimensions do not match the environment");
  }
  auto env = prototype.clone();
  Rng unused(0);
  EvalResult out;
  for (int e = 0; e < episodes; ++e) {
    auto obs = env->reset(mix_seed(seed, static_cast<std::uint64_t>(e)));
    double total = 0.0;
    for (bool done = false; !done;) {
      auto sample = agent.act(obs, false, unused);
      auto result = env->step(to_env_action(sample.applied, sp));
      total += result.reward;
      done = result.done;
      obs = std::move(result.obs);
    }
    out.returns.push_back(total);
  }
  const double n = static_cast<double>(episodes);
  out.mean = std::accumulate(out.returns.begin(), out.returns.end(), 0.0) / n;
  double var = 0.0;
  for (double r : out.returns) var += (r - out.mean) * (r - out.mean);
  out.std = std::sqrt(var / n);
  return out;
}

}  // namespace pdalab::rollout

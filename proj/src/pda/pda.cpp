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

#include "pdalab/pda/pda.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pdalab/autodiff/checkpoint.hpp"

namespace pdalab::pda {

SmoothingMode SmoothingMode::exponential(double alpha) {
  SmoothingMode m{Kind::exponential, alpha};
  m.validate();
  return m;
}

SmoothingMode SmoothingMode::parse(const std::string& text) {
  if (text == "dual_averaging") return dual_averaging();
  if (text == "exponential") return exponential(0.5);
  const std::string prefix = "exponential:";
  if (text.rfind(prefix, 0) == 0) {
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(text.substr(prefix.size()), &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size() - prefix.size()) {
      throw std::invalid_argument("smoothing: cannot parse alpha in '" + text + "'");
    }
    return exponential(alpha);
  }
  throw std::invalid_argument("unknown smoothing mode '" + text +
                              "' (expected dual_averaging or exponential:<alpha>)");
}

std::string SmoothingMode::to_string() const {
  if (kind == Kind::dual_averaging) return "dual_averaging";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "exponential:%.17g", alpha);
  return buf;
}

void SmoothingMode::validate() const {
  if (kind == Kind::exponential && !(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("smoothing: alpha must lie in (0, 1)");
  }
}

void PdaSchedule::advance() {
  ++k;
  beta += 1.0;
  beta_sum += beta;
}

double PdaSchedule::regularizer_coeff() const {
  return lambda * std::pow(beta, 1.5) / beta_sum;
}

double sigma(const PdaSchedule& schedule) {
  if (schedule.beta < 1.0) throw std::invalid_argument("sigma: beta must be >= 1");
  if (schedule.noise == NoiseMode::constant) return schedule.sigma0;
  // exp2/log2 keeps powers of two exact (1024^0.3 == 8).
  return schedule.sigma0 / std::exp2(0.3 * std::log2(schedule.beta));
}

double bregman(std::span<const double> a, std::span<const double> a0) {
  if (a.size() != a0.size()) throw std::invalid_argument("bregman: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - a0[i]) * (a[i] - a0[i]);
  return 0.5 * s;
}

std::vector<double> psi_sum_target(std::span<const double> old, std::span<const double> adv,
                                   const PdaSchedule& schedule, const SmoothingMode& mode) {
  if (old.size() != adv.size()) throw std::invalid_argument("psi_sum_target: length mismatch");
  mode.validate();
  double w_old, w_new;
  if (mode.kind == SmoothingMode::Kind::dual_averaging) {
    w_old = (schedule.beta_sum - schedule.beta) / schedule.beta_sum;
    w_new = schedule.beta / schedule.beta_sum;
  } else {
    w_old = 1.0 - mode.alpha;
    w_new = mode.alpha;
  }
  std::vector<double> out(old.size());
  for (std::size_t i = 0; i < old.size(); ++i) out[i] = w_old * old[i] + w_new * adv[i];
  return out;
}

double TabularPsiSum::get(std::size_t key) const {
  auto it = table_.find(key);
  return it == table_.end() ? 0.0 : it->second;
}

void TabularPsiSum::update(std::span<const std::size_t> keys, std::span<const double> adv,
                           const PdaSchedule& schedule, const SmoothingMode& mode) {
  if (keys.size() != adv.size()) throw std::invalid_argument("TabularPsiSum: length mismatch");
  std::vector<double> old(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) old[i] = get(keys[i]);
  auto target = psi_sum_target(old, adv, schedule, mode);
  for (std::size_t i = 0; i < keys.size(); ++i) table_[keys[i]] = target[i];
}

void PdaConfig::validate() const {
  if (!(lambda > 0)) throw std::invalid_argument("pda: lambda must be positive");
  if (!(sigma0 >= 0)) throw std::invalid_argument("pda: sigma0 must be >= 0");
  smoothing.validate();
  if (passes == 0 || minibatch == 0) throw std::invalid_argument("pda: passes and minibatch must be >= 1");
  if (!(lr > 0)) throw std::invalid_argument("pda: lr must be positive");
  if (!(max_grad_norm > 0)) throw std::invalid_argument("pda: max_grad_norm must be positive");
  if (!(gamma >= 0 && gamma < 1)) throw std::invalid_argument("pda: gamma must lie in [0, 1)");
  if (!(gae_lambda >= 0 && gae_lambda <= 1)) throw std::invalid_argument("pda: gae_lambda must lie in [0, 1]");
}

namespace {

// One Adam step on a scalar loss with global-norm clipping.
void optimize(ad::Mlp& net, ad::AdamState& opt, const ad::Tensor& loss, double max_norm) {
  net.zero_grad();
  loss.backward();
  ad::clip_grad_norm(net.parameters(), max_norm);
  ad::adam_step(net.parameters(), opt);
}

ad::Tensor squash(const ad::Tensor& raw) { return ad::tanh(raw); }

}  // namespace

PdaAgent::PdaAgent(std::size_t obs_dim, std::size_t act_dim, const PdaConfig& config,
                   std::uint64_t seed)
    : obs_dim_(obs_dim), act_dim_(act_dim), config_(config), rng_(mix_seed(seed, 0x706461)) {
  config_.validate();
  if (obs_dim == 0 || act_dim == 0) throw std::invalid_argument("PdaAgent: dimensions must be positive");
  schedule_.lambda = config_.lambda;
  schedule_.sigma0 = config_.sigma0;
  schedule_.noise = config_.noise;
  Rng init(mix_seed(seed, 0x696e6974));
  actor_ = ad::Mlp(obs_dim, act_dim, init, config_.hidden);
  value_ = ad::Mlp(obs_dim, 1, init, config_.hidden);
  psi_ = ad::Mlp(obs_dim + act_dim, 1, init, config_.hidden);
  prox_ = actor_.clone();
  actor_opt_ = ad::make_adam_state(actor_.parameters(), config_.lr);
  value_opt_ = ad::make_adam_state(value_.parameters(), config_.lr);
  psi_opt_ = ad::make_adam_state(psi_.parameters(), config_.lr);
}

std::vector<double> PdaAgent::actor_mean(std::span<const double> obs, std::size_t rows) const {
  auto out = actor_.evaluate(obs, rows);
  for (double& v : out) v = std::tanh(v);
  return out;
}

std::vector<double> PdaAgent::prox_center(std::span<const double> obs, std::size_t rows) const {
  if (config_.prox == ProxMode::zero) return std::vector<double>(rows * act_dim_, 0.0);
  auto out = prox_.evaluate(obs, rows);
  for (double& v : out) v = std::tanh(v);
  return out;
}

std::vector<double> PdaAgent::psi_sum(std::span<const double> obs,
                                      std::span<const double> actions,
                                      std::size_t rows) const {
  if (obs.size() != rows * obs_dim_ || actions.size() != rows * act_dim_) {
    throw std::invalid_argument("psi_sum: input sizes do not match row count");
  }
  std::vector<double> input;
  input.reserve(rows * (obs_dim_ + act_dim_));
  for (std::size_t r = 0; r < rows; ++r) {
    auto o = obs.subspan(r * obs_dim_, obs_dim_);
    auto a = actions.subspan(r * act_dim_, act_dim_);
    input.insert(input.end(), o.begin(), o.end());
    input.insert(input.end(), a.begin(), a.end());
  }
  return psi_.evaluate(input, rows);
}

double PdaAgent::subproblem_objective(std::span<const double> obs,
                                      std::span<const double> action) const {
  const double psi = psi_sum(obs, action, 1)[0];
  auto center = prox_center(obs, 1);
  return psi + schedule_.regularizer_coeff() * 2.0 * bregman(action, center);
}

rollout::ActionSample PdaAgent::act(std::span<const double> obs, bool explore, Rng& rng) const {
  if (obs.size() != obs_dim_) throw std::invalid_argument("PdaAgent::act: observation has wrong size");
  rollout::ActionSample s;
  s.action = actor_mean(obs, 1);
  if (explore) {
    const double sd = sigma(schedule_);
    for (double& a : s.action) a = std::clamp(a + sd * standard_normal(rng), -1.0, 1.0);
  }
  s.applied = s.action;
  return s;
}

double PdaAgent::return_scale() const {
  return config_.normalize_returns ? std::sqrt(return_stat_.var() + 1e-8) : 1.0;
}

void PdaAgent::observe_returns(std::span<const double> returns) {
  if (config_.normalize_returns) return_stat_.update(returns);
}

double PdaAgent::value(std::span<const double> obs) const {
  return value_.evaluate(obs, 1)[0] * return_scale();
}

LossTrace PdaAgent::update_value(const rollout::Batch& batch) {
  const std::size_t n = batch.size();
  if (batch.returns.size() != n) throw std::invalid_argument("update_value: batch is not finalized");
  const double inv_scale = 1.0 / return_scale();
  LossTrace trace;
  for (std::size_t pass = 0; pass < config_.passes; ++pass) {
    double total = 0.0;
    auto chunks = shuffled_minibatches(n, config_.minibatch, rng_);
    for (const auto& idx : chunks) {
      const std::size_t m = idx.size();
      auto x = ad::Tensor::from({m, obs_dim_}, gather_rows(batch.obs, obs_dim_, idx));
      std::vector<double> y(m);
      for (std::size_t i = 0; i < m; ++i) y[i] = batch.returns[idx[i]] * inv_scale;
      auto residual = value_.forward(x) - ad::Tensor::from({m, 1}, std::move(y));
      auto loss = ad::mean(ad::square(residual));
      optimize(value_, value_opt_, loss, config_.max_grad_norm);
      total += loss.item();
    }
    trace.per_pass.push_back(total / static_cast<double>(chunks.size()));
  }
  return trace;
}

LossTrace PdaAgent::update_psi_sum(const rollout::Batch& batch) {
  const std::size_t n = batch.size();
  if (batch.advantages.size() != n) throw std::invalid_argument("update_psi_sum: batch is not finalized");
  // Frozen pre-update outputs; the targets stay fixed for every pass.
  auto old = psi_sum(batch.obs, batch.actions, n);
  // The sum-advantage accumulates cost advantages, the negated reward ones.
  std::vector<double> cost_adv(n);
  for (std::size_t i = 0; i < n; ++i) cost_adv[i] = -batch.advantages[i];
  auto target = psi_sum_target(old, cost_adv, schedule_, config_.smoothing);

  const std::size_t in = obs_dim_ + act_dim_;
  std::vector<double> inputs;
  inputs.reserve(n * in);
  for (std::size_t r = 0; r < n; ++r) {
    auto o = batch.obs_row(r);
    auto a = batch.action_row(r);
    inputs.insert(inputs.end(), o.begin(), o.end());
    inputs.insert(inputs.end(), a.begin(), a.end());
  }
  LossTrace trace;
  for (std::size_t pass = 0; pass < config_.passes; ++pass) {
    double total = 0.0;
    auto chunks = shuffled_minibatches(n, config_.minibatch, rng_);
    for (const auto& idx : chunks) {
      const std::size_t m = idx.size();
      auto x = ad::Tensor::from({m, in}, gather_rows(inputs, in, idx));
      std::vector<double> y(m);
      for (std::size_t i = 0; i < m; ++i) y[i] = target[idx[i]];
      auto residual = psi_.forward(x) - ad::Tensor::from({m, 1}, std::move(y));
      auto loss = ad::mean(ad::square(residual));
      optimize(psi_, psi_opt_, loss, config_.max_grad_norm);
      total += loss.item();
    }
    trace.per_pass.push_back(total / static_cast<double>(chunks.size()));
  }
  return trace;
}

LossTrace PdaAgent::update_actor(const rollout::Batch& batch) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("update_actor: empty batch");
  const double coeff = schedule_.regularizer_coeff();
  LossTrace trace;
  for (std::size_t pass = 0; pass < config_.passes; ++pass) {
    double total = 0.0;
    auto chunks = shuffled_minibatches(n, config_.minibatch, rng_);
    for (const auto& idx : chunks) {
      const std::size_t m = idx.size();
      auto obs = gather_rows(batch.obs, obs_dim_, idx);
      auto center = ad::Tensor::from({m, act_dim_}, prox_center(obs, m));
      auto x = ad::Tensor::from({m, obs_dim_}, std::move(obs));
      auto a = squash(actor_.forward(x));
      auto psi = psi_.forward_frozen(ad::concat({x, a}));
      auto reg = ad::sum_cols(ad::square(a - center));
      auto loss = ad::mean(psi + ad::scale(reg, coeff));
      optimize(actor_, actor_opt_, loss, config_.max_grad_norm);
      total += loss.item();
    }
    trace.per_pass.push_back(total / static_cast<double>(chunks.size()));
  }
  return trace;
}

nlohmann::json PdaAgent::checkpoint() const {
  ad::NamedTensors named;
  for (auto& p : actor_.named_parameters("actor.")) named.push_back(p);
  for (auto& p : value_.named_parameters("value.")) named.push_back(p);
  for (auto& p : psi_.named_parameters("psi_sum.")) named.push_back(p);
  for (auto& p : prox_.named_parameters("prox.")) named.push_back(p);
  return {{"schedule", {{"k", schedule_.k}, {"beta", schedule_.beta}, {"beta_sum", schedule_.beta_sum}}},
          {"return_stat", {{"count", return_stat_.count()}, {"mean", return_stat_.mean()},
                           {"var", return_stat_.var()}}},
          {"parameters", ad::parameters_to_json(named)}};
}

void PdaAgent::restore(const nlohmann::json& j) {
  ad::NamedTensors named;
  for (auto& p : actor_.named_parameters("actor.")) named.push_back(p);
  for (auto& p : value_.named_parameters("value.")) named.push_back(p);
  for (auto& p : psi_.named_parameters("psi_sum.")) named.push_back(p);
  for (auto& p : prox_.named_parameters("prox.")) named.push_back(p);
  ad::parameters_from_json(j.at("parameters"), named);
  const auto& s = j.at("schedule");
  schedule_.k = s.at("k").get<int>();
  schedule_.beta = s.at("beta").get<double>();
  schedule_.beta_sum = s.at("beta_sum").get<double>();
  const auto& r = j.at("return_stat");
  return_stat_.restore(r.at("count").get<double>(), r.at("mean").get<double>(),
                       r.at("var").get<double>());
}

IterationStats pda_iteration(PdaAgent& agent, rollout::Collector& collector,
                             std::size_t steps_per_collect) {
  IterationStats stats;
  const auto& sched = agent.schedule();
  stats.iter = sched.k + 1;
  stats.beta = sched.beta;
  stats.sigma = sigma(sched);

  auto batch = collector.collect(agent, steps_per_collect, true);
  rollout::finalize(batch, agent.config().gamma, agent.config().gae_lambda);
  agent.observe_returns(batch.returns);
  stats.value_loss = agent.update_value(batch).last();
  stats.psi_loss = agent.update_psi_sum(batch).last();
  stats.actor_loss = agent.update_actor(batch).last();
  agent.mutable_schedule().advance();

  stats.env_steps = collector.total_steps();
  auto finished = collector.take_finished_returns();
  stats.train_return_mean =
      finished.empty() ? std::numeric_limits<double>::quiet_NaN()
                       : std::accumulate(finished.begin(), finished.end(), 0.0) /
                             static_cast<double>(finished.size());
  return stats;
}

}  // namespace pdalab::pda

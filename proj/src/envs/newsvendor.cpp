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

#include "pdalab/envs/newsvendor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdalab::envs {

void NewsvendorParams::validate() const {
  if (lead_time < 1) throw std::invalid_argument("newsvendor: lead_time must be >= 1");
  if (!(price > cost && cost > 0)) throw std::invalid_argument("newsvendor: need price > cost > 0");
  if (holding < 0 || penalty < 0) throw std::invalid_argument("newsvendor: holding and penalty must be >= 0");
  if (!(max_order > 0)) throw std::invalid_argument("newsvendor: max_order must be positive");
  if (!(0 <= mean_low && mean_low <= mean_high)) throw std::invalid_argument("newsvendor: bad demand mean range");
  if (horizon < 1) throw std::invalid_argument("newsvendor: horizon must be >= 1");
}

NewsvendorOutcome newsvendor_step(NewsvendorState& state, double order, double demand,
                                  const NewsvendorParams& p) {
  if (state.pipeline.size() != static_cast<std::size_t>(p.lead_time)) {
    throw std::invalid_argument("newsvendor: pipeline length does not match lead time");
  }
  const double q = std::clamp(order, 0.0, p.max_order);
  NewsvendorOutcome out;
  out.delivered = state.pipeline.front();
  const double inventory = out.delivered;
  out.sold = std::min(inventory, demand);
  out.reward = p.price * out.sold - p.cost * q -
               p.holding * std::max(inventory - demand, 0.0) -
               p.penalty * std::max(demand - inventory, 0.0);
  std::rotate(state.pipeline.begin(), state.pipeline.begin() + 1, state.pipeline.end());
  state.pipeline.back() = q;
  ++state.t;
  return out;
}

NewsvendorEnv::NewsvendorEnv(NewsvendorParams params) : params_(params) {
  params_.validate();
  spec_.obs_dim = 5 + static_cast<std::size_t>(params_.lead_time);
  spec_.act_dim = 1;
  spec_.act_low = {0.0};
  spec_.act_high = {params_.max_order};
  spec_.horizon = params_.horizon;
  spec_.gamma = 0.99;
  spec_.validate();
}

std::vector<double> NewsvendorEnv::observation() const {
  const double money = params_.price;
  const double units = params_.max_order;
  std::vector<double> obs{params_.price / money, params_.cost / money,
                          params_.holding / money, params_.penalty / money,
                          state_.demand_mean / units};
  for (double q : state_.pipeline) obs.push_back(q / units);
  return obs;
}

std::vector<double> NewsvendorEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  state_.pipeline.assign(params_.lead_time, 0.0);
  state_.demand_mean = uniform(rng_, params_.mean_low, params_.mean_high);
  state_.t = 0;
  return observation();
}

double NewsvendorEnv::sample_demand() {
  if (params_.demand == DemandKind::poisson) {
    return static_cast<double>(std::poisson_distribution<int>(state_.demand_mean)(rng_));
  }
  // Uniform integer demand with the same mean.
  const int hi = static_cast<int>(std::lround(2.0 * state_.demand_mean));
  return static_cast<double>(std::uniform_int_distribution<int>(0, hi)(rng_));
}

StepResult NewsvendorEnv::step(std::span<const double> action) {
  require_finite_action(action, 1, "newsvendor");
  const double demand = sample_demand();
  auto outcome = newsvendor_step(state_, action[0], demand, params_);
  return {observation(), outcome.reward, state_.t >= params_.horizon};
}

std::unique_ptr<Env> NewsvendorEnv::clone() const {
  return std::make_unique<NewsvendorEnv>(*this);
}

}  // namespace pdalab::envs

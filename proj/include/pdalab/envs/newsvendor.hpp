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

#ifndef PDALAB_ENVS_NEWSVENDOR_HPP_
#define PDALAB_ENVS_NEWSVENDOR_HPP_

#include <vector>

#include "pdalab/common/random.hpp"
#include "pdalab/envs/env.hpp"

namespace pdalab::envs {

enum class DemandKind { poisson, uniform };

// Multi-period newsvendor with an order pipeline of length lead_time.
// Units delivered in a period are sold against that period's demand; the
// remainder is charged holding cost and discarded, unmet demand is charged a
// goodwill penalty.
struct NewsvendorParams {
  int lead_time = 5;
  double price = 100.0;
  double cost = 50.0;
  double holding = 2.0;
  double penalty = 10.0;
  double max_order = 200.0;
  double mean_low = 20.0;   // demand mean resampled per episode in
  double mean_high = 100.0; // [mean_low, mean_high]
  int horizon = 40;
  DemandKind demand = DemandKind::poisson;

  void validate() const;
};

struct NewsvendorState {
  std::vector<double> pipeline;  // pipeline[0] arrives next
  double demand_mean = 0.0;
  int t = 0;
};

struct NewsvendorOutcome {
  double reward = 0.0;
  double delivered = 0.0;
  double sold = 0.0;
};

// Advances the state in place for a realized demand. The order is clipped to
// [0, max_order] and appended to the end of the pipeline.
NewsvendorOutcome newsvendor_step(NewsvendorState& state, double order, double demand,
                                  const NewsvendorParams& params);

class NewsvendorEnv final : public Env {
 public:
  explicit NewsvendorEnv(NewsvendorParams params = {});

  std::string id() const override { return "newsvendor"; }
  const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  std::unique_ptr<Env> clone() const override;

  const NewsvendorState& state() const { return state_; }
  const NewsvendorParams& params() const { return params_; }
  // Price, cost, holding, penalty and demand mean, followed by the pipeline;
  // money is scaled by price and units by max_order.
  std::vector<double> observation() const;

 private:
  double sample_demand();

  NewsvendorParams params_;
  EnvSpec spec_;
  NewsvendorState state_;
  Rng rng_;
};

}  // namespace pdalab::envs

#endif  // PDALAB_ENVS_NEWSVENDOR_HPP_

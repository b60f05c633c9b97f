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

#include "pdalab/envs/env.hpp"

#include <cmath>
#include <stdexcept>

#include "pdalab/envs/newsvendor.hpp"
#include "pdalab/envs/pendulum.hpp"
#include "pdalab/envs/synthetic.hpp"

namespace pdalab::envs {

void EnvSpec::validate() const {
  if (obs_dim == 0 || act_dim == 0) throw std::invalid_argument("EnvSpec: dimensions must be positive");
  if (act_low.size() != act_dim || act_high.size() != act_dim) {
    throw std::invalid_argument("EnvSpec: action bounds must have act_dim entries");
  }
  for (std::size_t i = 0; i < act_dim; ++i) {
    if (!(act_low[i] < act_high[i])) throw std::invalid_argument("EnvSpec: need act_low < act_high");
  }
  if (horizon < 1) throw std::invalid_argument("EnvSpec: horizon must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("EnvSpec: gamma must lie in [0, 1)");
}

void to_json(nlohmann::json& j, const EnvSpec& spec) {
  j = {{"obs_dim", spec.obs_dim}, {"act_dim", spec.act_dim},
       {"act_low", spec.act_low}, {"act_high", spec.act_high},
       {"horizon", spec.horizon}, {"gamma", spec.gamma}};
}

void require_finite_action(std::span<const double> action, std::size_t act_dim,
                           const char* env_name) {
  if (action.size() != act_dim) {
    throw std::invalid_argument(std::string(env_name) + ": expected " +
                                std::to_string(act_dim) + " action values, got " +
                                std::to_string(action.size()));
  }
  for (double a : action) {
    if (!std::isfinite(a)) throw std::invalid_argument(std::string(env_name) + ": non-finite action");
  }
}

std::unique_ptr<Env> make_env(const std::string& id) {
  if (id == "pendulum") return std::make_unique<PendulumEnv>();
  if (id == "newsvendor") return std::make_unique<NewsvendorEnv>();
  const std::string prefix = "synthetic:";
  if (id.rfind(prefix, 0) == 0) {
    auto family = parse_family(id.substr(prefix.size()));
    return std::make_unique<SyntheticEnv>(SyntheticInstance::make(family));
  }
  throw std::invalid_argument("unknown environment id '" + id + "'");
}

}  // namespace pdalab::envs

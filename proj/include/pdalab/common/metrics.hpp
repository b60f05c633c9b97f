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

#ifndef PDALAB_COMMON_METRICS_HPP_
#define PDALAB_COMMON_METRICS_HPP_

#include <cstddef>

namespace pdalab {

// One row of metrics.csv before evaluation. Fields that an algorithm does
// not have (beta and psi_loss for PPO) are NaN.
struct IterationStats {
  int iter = 0;
  std::size_t env_steps = 0;
  double beta = 0.0;
  double sigma = 0.0;
  double value_loss = 0.0;
  double psi_loss = 0.0;
  double actor_loss = 0.0;
  double train_return_mean = 0.0;  // NaN when no episode finished
};

}  // namespace pdalab

#endif  // PDALAB_COMMON_METRICS_HPP_

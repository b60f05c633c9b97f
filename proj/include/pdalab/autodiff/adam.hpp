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

#ifndef PDALAB_AUTODIFF_ADAM_HPP_
#define PDALAB_AUTODIFF_ADAM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "pdalab/autodiff/tensor.hpp"

namespace pdalab::ad {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

AdamState make_adam_state(std::span<const Tensor> params, double lr = 1e-3);

// Bias-corrected Adam on each parameter's accumulated grad. A parameter that
// never received a gradient is treated as having grad zero. Throws before
// touching anything when a gradient is non-finite or shapes disagree.
void adam_step(std::span<Tensor> params, AdamState& state);

// Global L2 norm over all gradients.
double grad_norm(std::span<const Tensor> params);

// Rescales every gradient by max_norm / norm when the global norm exceeds
// max_norm. Returns the norm measured before clipping.
double clip_grad_norm(std::span<Tensor> params, double max_norm);

void zero_grads(std::span<Tensor> params);

}  // namespace pdalab::ad

#endif  // PDALAB_AUTODIFF_ADAM_HPP_

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

#ifndef PDALAB_AUTODIFF_MLP_HPP_
#define PDALAB_AUTODIFF_MLP_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pdalab/autodiff/tensor.hpp"
#include "pdalab/common/random.hpp"

namespace pdalab::ad {

inline const std::vector<std::size_t> kDefaultHidden = {64, 64};

// Fully connected network: tanh on hidden layers, identity on the output.
// Weights are stored [fan_in, fan_out] so a batch [n, in] maps to [n, out].
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::size_t in_dim, std::size_t out_dim, Rng& rng,
      const std::vector<std::size_t>& hidden = kDefaultHidden);

  // Records parameters on the tape.
  Tensor forward(const Tensor& x) const;
  // Parameters enter as constants: gradients reach x but never the weights.
  Tensor forward_frozen(const Tensor& x) const;
  // Tape-free evaluation of `rows` inputs laid out row-major.
  std::vector<double> evaluate(std::span<const double> x, std::size_t rows) const;

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  std::size_t parameter_count() const;

  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  std::vector<std::pair<std::string, Tensor>> named_parameters(
      const std::string& prefix = "") const;

  void zero_grad();
  // Independent copy of the values (fresh leaves, no shared storage).
  Mlp clone() const;
  // Overwrites values from a network of identical architecture.
  void copy_from(const Mlp& other);

 private:
  Tensor run(const Tensor& x, bool frozen) const;

  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
  // Alternating weight, bias per layer.
  std::vector<Tensor> params_;
};

}  // namespace pdalab::ad

#endif  // PDALAB_AUTODIFF_MLP_HPP_

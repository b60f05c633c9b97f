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

#include "pdalab/autodiff/mlp.hpp"

#include <algorithm>
#include <cmath>

namespace pdalab::ad {

Mlp::Mlp(std::size_t in_dim, std::size_t out_dim, Rng& rng,
         const std::vector<std::size_t>& hidden)
    : in_dim_(in_dim), out_dim_(out_dim) {
  if (in_dim == 0 || out_dim == 0) throw ShapeError("Mlp: dimensions must be positive");
  std::vector<std::size_t> sizes{in_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out_dim);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t fan_in = sizes[l], fan_out = sizes[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(fan_in * fan_out);
    for (double& v : w) v = uniform(rng, -bound, bound);
    params_.push_back(Tensor::from({fan_in, fan_out}, std::move(w), true));
    params_.push_back(Tensor::zeros({fan_out}, true));
  }
}

Tensor Mlp::run(const Tensor& x, bool frozen) const {
  if (x.rank() != 2 || x.dim(1) != in_dim_) {
    throw ShapeError("Mlp: expected input [n," + std::to_string(in_dim_) + "], got " +
                     shape_string(x.shape()));
  }
  Tensor h = x;
  const std::size_t layers = params_.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    Tensor w = frozen ? params_[2 * l].detach() : params_[2 * l];
    Tensor b = frozen ? params_[2 * l + 1].detach() : params_[2 * l + 1];
    h = add(matmul(h, w), b);
    if (l + 1 < layers) h = tanh(h);
  }
  return h;
}

Tensor Mlp::forward(const Tensor& x) const { return run(x, false); }

Tensor Mlp::forward_frozen(const Tensor& x) const { return run(x, true); }

std::vector<double> Mlp::evaluate(std::span<const double> x, std::size_t rows) const {
  if (x.size() != rows * in_dim_) {
    throw ShapeError("Mlp::evaluate: got " + std::to_string(x.size()) +
                     " values for " + std::to_string(rows) + " rows of width " +
                     std::to_string(in_dim_));
  }
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  std::size_t width = in_dim_;
  const std::size_t layers = params_.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    auto w = params_[2 * l].data();
    auto b = params_[2 * l + 1].data();
    const std::size_t out = b.size();
    next.assign(rows * out, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      double* row = next.data() + i * out;
      std::copy(b.begin(), b.end(), row);
      for (std::size_t p = 0; p < width; ++p) {
        const double s = cur[i * width + p];
        const double* wrow = w.data() + p * out;
        for (std::size_t j = 0; j < out; ++j) row[j] += s * wrow[j];
      }
      if (l + 1 < layers) {
        for (std::size_t j = 0; j < out; ++j) row[j] = std::tanh(row[j]);
      }
    }
    cur.swap(next);
    width = out;
  }
  return cur;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

std::vector<std::pair<std::string, Tensor>> Mlp::named_parameters(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    out.emplace_back(prefix + "layers." + std::to_string(i / 2) +
                         (i % 2 == 0 ? ".weight" : ".bias"),
                     params_[i]);
  }
  return out;
}

void Mlp::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Mlp Mlp::clone() const {
  Mlp copy;
  copy.in_dim_ = in_dim_;
  copy.out_dim_ = out_dim_;
  for (const auto& p : params_) copy.params_.push_back(p.clone());
  return copy;
}

void Mlp::copy_from(const Mlp& other) {
  if (other.params_.size() != params_.size()) {
    throw ShapeError("Mlp::copy_from: architecture mismatch");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].shape() != other.params_[i].shape()) {
      throw ShapeError("Mlp::copy_from: shape mismatch at parameter " + std::to_string(i));
    }
    auto src = other.params_[i].data();
    std::copy(src.begin(), src.end(), params_[i].mutable_data().begin());
  }
}

}  // namespace pdalab::ad

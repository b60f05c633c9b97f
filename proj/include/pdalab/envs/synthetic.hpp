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

#ifndef PDALAB_ENVS_SYNTHETIC_HPP_
#define PDALAB_ENVS_SYNTHETIC_HPP_

#include <string>

#include "pdalab/envs/env.hpp"

namespace pdalab::envs {

enum class SyntheticFamily { quadratic, piecewise_linear, cosine };

std::string to_string(SyntheticFamily family);
SyntheticFamily parse_family(const std::string& name);

// Single-state, one-dimensional cost with a known minimizer on [low, high].
//   quadratic:        coeff * (a - center)^2   curvature bound  2*coeff
//   piecewise_linear: coeff * |a - center|     curvature bound  0
//   cosine:           coeff * cos(a)           curvature bound -coeff
// The curvature bound is the largest mu with cost - mu/2 a^2 convex.
struct SyntheticInstance {
  SyntheticFamily family = SyntheticFamily::quadratic;
  double center = 0.0;
  double coeff = 1.0;
  double low = -2.0;
  double high = 2.0;

  static SyntheticInstance quadratic(double center = 0.3, double coeff = 1.0,
                                     double low = -2.0, double high = 2.0);
  static SyntheticInstance piecewise_linear(double center = 1.2, double slope = 1.0,
                                            double low = -2.0, double high = 2.0);
  static SyntheticInstance cosine(double coeff = 1.0, double low = -1.0, double high = 4.0);
  // Default theory-lab instance of the given family.
  static SyntheticInstance make(SyntheticFamily family);

  double cost(double a) const;
  double curvature() const;
  // Lipschitz constant of the cost over the box.
  double lipschitz() const;
  // Box-constrained minimizer.
  double minimizer() const;
  double min_cost() const { return cost(minimizer()); }

  void validate() const;
};

// One-step bandit carrying a synthetic instance. The observation is the
// constant [1].
class SyntheticEnv final : public Env {
 public:
  explicit SyntheticEnv(SyntheticInstance instance);

  std::string id() const override { return "synthetic:" + to_string(instance_.family); }
  const EnvSpec& spec() const override { return spec_; }
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;
  std::unique_ptr<Env> clone() const override;

  const SyntheticInstance& instance() const { return instance_; }

 private:
  SyntheticInstance instance_;
  EnvSpec spec_;
};

}  // namespace pdalab::envs

#endif  // PDALAB_ENVS_SYNTHETIC_HPP_

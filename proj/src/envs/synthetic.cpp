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

#include "pdalab/envs/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pdalab::envs {

std::string to_string(SyntheticFamily family) {
  switch (family) {
    case SyntheticFamily::quadratic: return "quadratic";
    case SyntheticFamily::piecewise_linear: return "piecewise";
    case SyntheticFamily::cosine: return "cosine";
  }
  return "unknown";
}

SyntheticFamily parse_family(const std::string& name) {
  if (name == "quadratic") return SyntheticFamily::quadratic;
  if (name == "piecewise" || name == "piecewise_linear") return SyntheticFamily::piecewise_linear;
  if (name == "cosine") return SyntheticFamily::cosine;
  throw std::invalid_argument("unknown synthetic family '" + name + "'");
}

SyntheticInstance SyntheticInstance::quadratic(double center, double coeff, double low,
                                               double high) {
  SyntheticInstance s{SyntheticFamily::quadratic, center, coeff, low, high};
  s.validate();
  return s;
}

SyntheticInstance SyntheticInstance::piecewise_linear(double center, double slope,
                                                      double low, double high) {
  SyntheticInstance s{SyntheticFamily::piecewise_linear, center, slope, low, high};
  s.validate();
  return s;
}

SyntheticInstance SyntheticInstance::cosine(double coeff, double low, double high) {
  SyntheticInstance s{SyntheticFamily::cosine, 0.0, coeff, low, high};
  s.validate();
  return s;
}

SyntheticInstance SyntheticInstance::make(SyntheticFamily family) {
  switch (family) {
    case SyntheticFamily::quadratic: return quadratic();
    case SyntheticFamily::piecewise_linear: return piecewise_linear();
    case SyntheticFamily::cosine: return cosine();
  }
  throw std::invalid_argument("unknown synthetic family");
}

void SyntheticInstance::validate() const {
  if (!(low < high)) throw std::invalid_argument("synthetic instance: need low < high");
  if (!(coeff > 0)) throw std::invalid_argument("synthetic instance: coefficient must be positive");
}

double SyntheticInstance::cost(double a) const {
  switch (family) {
    case SyntheticFamily::quadratic: return coeff * (a - center) * (a - center);
    case SyntheticFamily::piecewise_linear: return coeff * std::abs(a - center);
    case SyntheticFamily::cosine: return coeff * std::cos(a);
  }
  return 0.0;
}

double SyntheticInstance::curvature() const {
  switch (family) {
    case SyntheticFamily::quadratic: return 2.0 * coeff;
    case SyntheticFamily::piecewise_linear: return 0.0;
    case SyntheticFamily::cosine: return -coeff;
  }
  return 0.0;
}

double SyntheticInstance::lipschitz() const {
  switch (family) {
    case SyntheticFamily::quadratic:
      return 2.0 * coeff * std::max(std::abs(low - center), std::abs(high - center));
    case SyntheticFamily::piecewise_linear: return coeff;
    case SyntheticFamily::cosine: {
      // |sin| reaches 1 at pi/2 + n*pi; otherwise the max is at an end.
      const double first = std::ceil((low - std::numbers::pi / 2) / std::numbers::pi);
      if (std::numbers::pi / 2 + first * std::numbers::pi <= high) return coeff;
      return coeff * std::max(std::abs(std::sin(low)), std::abs(std::sin(high)));
    }
  }
  return 0.0;
}

double SyntheticInstance::minimizer() const {
  switch (family) {
    case SyntheticFamily::quadratic:
    case SyntheticFamily::piecewise_linear: return std::clamp(center, low, high);
    case SyntheticFamily::cosine: {
      // Odd multiples of pi inside the box are global minima; else an end.
      const double n = std::ceil((low - std::numbers::pi) / (2 * std::numbers::pi));
      const double candidate = std::numbers::pi + 2 * std::numbers::pi * n;
      if (candidate <= high) return candidate;
      return cost(low) < cost(high) ? low : high;
    }
  }
  return low;
}

SyntheticEnv::SyntheticEnv(SyntheticInstance instance) : instance_(instance) {
  instance_.validate();
  spec_.obs_dim = 1;
  spec_.act_dim = 1;
  spec_.act_low = {instance_.low};
  spec_.act_high = {instance_.high};
  spec_.horizon = 1;
  spec_.gamma = 0.99;
  spec_.validate();
}

std::vector<double> SyntheticEnv::reset(std::uint64_t) { return {1.0}; }

StepResult SyntheticEnv::step(std::span<const double> action) {
  require_finite_action(action, 1, "synthetic");
  const double a = std::clamp(action[0], instance_.low, instance_.high);
  return {{1.0}, -instance_.cost(a), true};
}

std::unique_ptr<Env> SyntheticEnv::clone() const {
  return std::make_unique<SyntheticEnv>(*this);
}

}  // namespace pdalab::envs

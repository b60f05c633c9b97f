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

#ifndef PDALAB_COMMON_BATCHING_HPP_
#define PDALAB_COMMON_BATCHING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "pdalab/common/random.hpp"

namespace pdalab {

// Shuffled partition of [0, n) into chunks of `size`; the last chunk holds
// the remainder.
inline std::vector<std::vector<std::size_t>> shuffled_minibatches(std::size_t n,
                                                                  std::size_t size,
                                                                  Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += size) {
    const std::size_t stop = std::min(n, start + size);
    out.emplace_back(order.begin() + start, order.begin() + stop);
  }
  return out;
}

// Copies the selected rows of a row-major [*, cols] array.
inline std::vector<double> gather_rows(std::span<const double> data, std::size_t cols,
                                       std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size() * cols);
  for (std::size_t r : rows) {
    auto row = data.subspan(r * cols, cols);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

// Running mean and variance merged batch by batch (parallel Welford).
class RunningStat {
 public:
  void update(std::span<const double> xs) {
    if (xs.empty()) return;
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double m2 = 0.0;
    for (double x : xs) m2 += (x - mean) * (x - mean);
    const double total = count_ + n;
    const double delta = mean - mean_;
    mean_ += delta * n / total;
    m2_ += m2 + delta * delta * count_ * n / total;
    count_ = total;
  }
  double count() const { return count_; }
  double mean() const { return mean_; }
  double var() const { return count_ > 0 ? m2_ / count_ : 1.0; }
  void restore(double count, double mean, double var) {
    count_ = count;
    mean_ = mean;
    m2_ = var * count;
  }

 private:
  double count_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace pdalab

#endif  // PDALAB_COMMON_BATCHING_HPP_

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

#ifndef PDALAB_AUTODIFF_TENSOR_HPP_
#define PDALAB_AUTODIFF_TENSOR_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdalab::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Raised when operand shapes are incompatible for an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a primitive produces NaN or Inf.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {
struct Node;
}  // namespace detail

// Dense row-major tensor of doubles with optional participation in a
// dynamically recorded reverse-mode tape. Copies are shallow handles; use
// clone() for an independent value.
class Tensor {
 public:
  Tensor();

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t size() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }

  std::span<const double> data() const;
  // Writable view of the values. Only meant for leaves (parameters and
  // inputs); mutating an interior node invalidates its recorded backward.
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const { return data()[i]; }

  bool requires_grad() const;
  bool is_leaf() const;
  // Empty span when no gradient has been accumulated yet.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Same values, no tape connection, no gradient.
  Tensor detach() const;
  // Deep copy of values; keeps requires_grad as a fresh leaf.
  Tensor clone() const;

  // Reverse sweep from this scalar. Leaf gradients accumulate across calls.
  void backward() const;

  // Internal: used by the primitive implementations.
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Elementwise arithmetic. The smaller operand may broadcast when it is a
// scalar or matches the trailing dimension of the larger one (row bias).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor minimum(const Tensor& a, const Tensor& b);

Tensor matmul(const Tensor& a, const Tensor& b);

Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor square(const Tensor& x);
Tensor scale(const Tensor& x, double factor);
Tensor shift(const Tensor& x, double offset);
Tensor clamp(const Tensor& x, double lo, double hi);

// Full reductions to a scalar.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// Reduces the last axis of a rank-2 tensor: [n, m] -> [n, 1].
Tensor sum_cols(const Tensor& x);

// Concatenation along the last axis; leading dimensions must agree.
Tensor concat(const std::vector<Tensor>& parts);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

}  // namespace pdalab::ad

#endif  // PDALAB_AUTODIFF_TENSOR_HPP_

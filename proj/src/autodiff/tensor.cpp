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

#include "pdalab/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace pdalab::ad {

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Propagates this node's grad into the parents' grads.
  std::function<void(Node&)> backward;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

}  // namespace detail

using detail::Node;

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

std::shared_ptr<Node> make_node(Shape shape, std::vector<double> data,
                                bool requires_grad) {
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " +
                                 shape_string(shape));
  }
  if (data.size() != shape_size(shape)) {
    throw ShapeError("data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_string(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return node;
}

void check_finite(const char* op, const std::vector<double>& values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NonFiniteError(std::string(op) + ": produced a non-finite value");
    }
  }
}

// Builds the result node of a primitive. The backward closure is only kept
// when at least one input participates in differentiation.
Tensor finish(const char* op, Shape shape, std::vector<double> data,
              std::vector<Tensor> inputs, std::function<void(Node&)> backward) {
  check_finite(op, data);
  bool needs = std::any_of(inputs.begin(), inputs.end(),
                           [](const Tensor& t) { return t.requires_grad(); });
  auto node = make_node(std::move(shape), std::move(data), needs);
  if (needs) {
    node->parents.reserve(inputs.size());
    for (auto& t : inputs) node->parents.push_back(t.node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void require_defined(const char* op, const Tensor& t) {
  if (!t.defined()) throw std::invalid_argument(std::string(op) + ": undefined tensor");
}

// Broadcast layout of a binary elementwise op. Index i of the output maps to
// index i % a_mod of a and i % b_mod of b.
struct Broadcast {
  Shape out;
  std::size_t a_mod;
  std::size_t b_mod;
};

bool trails(const Shape& small, const Shape& big) {
  std::size_t n = shape_size(small);
  if (n == 1) return true;
  if (big.empty() || n != big.back()) return false;
  return small.size() == 1 || (small.size() == 2 && small[0] == 1);
}

Broadcast broadcast(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return {a.shape(), a.size(), b.size()};
  if (a.size() >= b.size() && trails(b.shape(), a.shape())) {
    return {a.shape(), a.size(), b.size()};
  }
  if (b.size() > a.size() && trails(a.shape(), b.shape())) {
    return {b.shape(), a.size(), b.size()};
  }
  throw ShapeError(std::string(op) + ": incompatible shapes " +
                   shape_string(a.shape()) + " and " + shape_string(b.shape()));
}

template <typename Fwd, typename DA, typename DB>
Tensor binary(const char* op, const Tensor& a, const Tensor& b, Fwd fwd, DA da,
              DB db) {
  require_defined(op, a);
  require_defined(op, b);
  Broadcast bc = broadcast(op, a, b);
  std::size_t n = shape_size(bc.out);
  std::vector<double> out(n);
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i % bc.a_mod], bv[i % bc.b_mod]);
  return finish(op, bc.out, std::move(out), {a, b}, [bc, da, db](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const std::size_t n = self.data.size();
    if (pa.requires_grad) {
      pa.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        pa.grad[i % bc.a_mod] +=
            self.grad[i] * da(pa.data[i % bc.a_mod], pb.data[i % bc.b_mod]);
      }
    }
    if (pb.requires_grad) {
      pb.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        pb.grad[i % bc.b_mod] +=
            self.grad[i] * db(pa.data[i % bc.a_mod], pb.data[i % bc.b_mod]);
      }
    }
  });
}

// Elementwise unary op whose derivative is expressed through input x and
// output y.
template <typename Fwd, typename Deriv>
Tensor unary(const char* op, const Tensor& x, Fwd fwd, Deriv deriv) {
  require_defined(op, x);
  auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  return finish(op, x.shape(), std::move(out), {x}, [deriv](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    px.ensure_grad();
    for (std::size_t i = 0; i < self.data.size(); ++i) {
      px.grad[i] += self.grad[i] * deriv(px.data[i], self.data[i]);
    }
  });
}

}  // namespace

Tensor::Tensor() = default;

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  std::size_t n = shape_size(shape);
  return Tensor(make_node(std::move(shape), std::vector<double>(n, value), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  check_finite("from", values);
  return Tensor(make_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const {
  require_defined("shape", *this);
  return node_->shape;
}

std::size_t Tensor::size() const { return defined() ? node_->data.size() : 0; }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape().size()) {
    throw ShapeError("dim: axis " + std::to_string(axis) + " out of range for " +
                     shape_string(shape()));
  }
  return node_->shape[axis];
}

std::span<const double> Tensor::data() const {
  require_defined("data", *this);
  return node_->data;
}

std::span<double> Tensor::mutable_data() {
  require_defined("mutable_data", *this);
  return node_->data;
}

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item: tensor of shape " + shape_string(shape()) +
                     " is not a scalar");
  }
  return node_->data[0];
}

bool Tensor::requires_grad() const { return defined() && node_->requires_grad; }

bool Tensor::is_leaf() const { return defined() && !node_->backward; }

std::span<const double> Tensor::grad() const {
  require_defined("grad", *this);
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  require_defined("mutable_grad", *this);
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  if (defined()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const {
  require_defined("detach", *this);
  return Tensor(make_node(node_->shape, node_->data, false));
}

Tensor Tensor::clone() const {
  require_defined("clone", *this);
  return Tensor(make_node(node_->shape, node_->data, node_->requires_grad));
}

void Tensor::backward() const {
  require_defined("backward", *this);
  if (size() != 1) {
    throw ShapeError("backward: root must be a scalar, got shape " +
                     shape_string(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* node : order) {
    if (node->backward) node->grad.assign(node->data.size(), 0.0);
  }
  node_->ensure_grad();
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

// Ties send the gradient to the first operand.
Tensor minimum(const Tensor& a, const Tensor& b) {
  return binary(
      "minimum", a, b, [](double x, double y) { return std::min(x, y); },
      [](double x, double y) { return x <= y ? 1.0 : 0.0; },
      [](double x, double y) { return x <= y ? 0.0 : 1.0; });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined("matmul", a);
  require_defined("matmul", b);
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + shape_string(a.shape()) +
                     " and " + shape_string(b.shape()));
  }
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  std::vector<double> out(n * m, 0.0);
  auto av = a.data();
  auto bv = b.data();
  for (std::size_t i = 0; i < n; ++i) {
    double* row = out.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = av[i * k + p];
      const double* brow = bv.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) row[j] += s * brow[j];
    }
  }
  return finish("matmul", {n, m}, std::move(out), {a, b}, [n, k, m](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const double* g = self.grad.data();
    if (pa.requires_grad) {
      // dA = G * B^T
      pa.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = pb.data.data() + p * m;
          const double* grow = g + i * m;
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
          pa.grad[i * k + p] += acc;
        }
      }
    }
    if (pb.requires_grad) {
      // dB = A^T * G
      pb.ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = g + i * m;
        for (std::size_t p = 0; p < k; ++p) {
          const double s = pa.data[i * k + p];
          double* out_row = pb.grad.data() + p * m;
          for (std::size_t j = 0; j < m; ++j) out_row[j] += s * grow[j];
        }
      }
    }
  });
}

Tensor tanh(const Tensor& x) {
  return unary(
      "tanh", x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp(const Tensor& x) {
  return unary(
      "exp", x, [](double v) { return std::exp(v); },
      [](double, double y) { return y; });
}

Tensor square(const Tensor& x) {
  return unary(
      "square", x, [](double v) { return v * v; },
      [](double v, double) { return 2.0 * v; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      "scale", x, [factor](double v) { return factor * v; },
      [factor](double, double) { return factor; });
}

Tensor shift(const Tensor& x, double offset) {
  return unary(
      "shift", x, [offset](double v) { return v + offset; },
      [](double, double) { return 1.0; });
}

// Subgradient 1 on the closed interval, matching the usual clip convention.
Tensor clamp(const Tensor& x, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lo must not exceed hi");
  return unary(
      "clamp", x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& x) {
  require_defined("sum", x);
  auto xv = x.data();
  double s = std::accumulate(xv.begin(), xv.end(), 0.0);
  return finish("sum", {1}, {s}, {x}, [](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    px.ensure_grad();
    for (double& g : px.grad) g += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  require_defined("mean", x);
  auto xv = x.data();
  const double n = static_cast<double>(xv.size());
  double s = std::accumulate(xv.begin(), xv.end(), 0.0) / n;
  return finish("mean", {1}, {s}, {x}, [n](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    px.ensure_grad();
    for (double& g : px.grad) g += self.grad[0] / n;
  });
}

Tensor sum_cols(const Tensor& x) {
  require_defined("sum_cols", x);
  if (x.rank() != 2) {
    throw ShapeError("sum_cols: expected rank-2 tensor, got " + shape_string(x.shape()));
  }
  const std::size_t n = x.dim(0), m = x.dim(1);
  auto xv = x.data();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i] += xv[i * m + j];
  }
  return finish("sum_cols", {n, 1}, std::move(out), {x}, [n, m](Node& self) {
    Node& px = *self.parents[0];
    if (!px.requires_grad) return;
    px.ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) px.grad[i * m + j] += self.grad[i];
    }
  });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  for (const auto& p : parts) require_defined("concat", p);
  const Shape& first = parts.front().shape();
  Shape lead(first.begin(), first.end() - 1);
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size() || !std::equal(lead.begin(), lead.end(), s.begin())) {
      std::string msg = "concat: incompatible shapes";
      for (const auto& q : parts) msg += " " + shape_string(q.shape());
      throw ShapeError(msg);
    }
    widths.push_back(s.back());
    total += s.back();
  }
  const std::size_t rows = shape_size(lead);
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto v = parts[k].data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.begin() + r * widths[k], widths[k],
                  out.begin() + r * total + offset);
    }
    offset += widths[k];
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  return finish("concat", out_shape, std::move(out), parts,
                [widths, rows, total](Node& self) {
                  std::size_t offset = 0;
                  for (std::size_t k = 0; k < widths.size(); ++k) {
                    Node& p = *self.parents[k];
                    if (p.requires_grad) {
                      p.ensure_grad();
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t j = 0; j < widths[k]; ++j) {
                          p.grad[r * widths[k] + j] += self.grad[r * total + offset + j];
                        }
                      }
                    }
                    offset += widths[k];
                  }
                });
}

}  // namespace pdalab::ad

/* Copyright 2026 The CSDS Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef CSDS_AUTOGRAD_HPP_
#define CSDS_AUTOGRAD_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "csds/tensor.hpp"

namespace csds {

// One record of the reverse-mode tape. Interior nodes carry a backward
// closure that reads `grad` and accumulates into the parents' gradients.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return !backward; }
  Tensor& grad_buffer();
};

// Handle onto a tape node. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Tensor& value() const { return node_->value; }
  // Direct write access for optimizers and checkpoint restore.
  Tensor& mutable_value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  // Zero-filled when no gradient has been accumulated yet.
  Tensor grad() const;
  void zero_grad() { node_->grad = Tensor(); }

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<Node> node_;
};

// Leaf that never receives gradients.
Var constant(Tensor value);
// Trainable leaf.
Var parameter(Tensor value);

// Disables tape recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Topologically ordered view of everything reachable from a scalar root.
class ComputeGraph {
 public:
  explicit ComputeGraph(Var root);

  std::size_t size() const { return order_.size(); }
  // Interior gradients are recomputed on each call; leaf gradients
  // accumulate until zero_grad().
  void backward();

 private:
  Var root_;
  std::vector<Node*> order_;
};

void backward(const Var& root);

// ---- primitives -----------------------------------------------------------

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
// m x n plus a 1 x n row, repeated over every row.
Var add_bias(const Var& a, const Var& bias);
// 1 x n row repeated to count x n.
Var repeat_rows(const Var& row, std::size_t count);

Var neg(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var relu(const Var& a);
Var exp(const Var& a);
Var abs(const Var& a);
Var square(const Var& a);
// Gradient at exactly zero is taken as zero.
Var sqrt(const Var& a);

Var sum(const Var& a);
Var mean(const Var& a);

Var softmax(const Var& a, std::size_t axis);
// Row-wise normalization of an m x n matrix with 1 x n gain and bias.
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5);

Var concat(std::span<const Var> parts, std::size_t axis);
Var slice(const Var& a, std::size_t axis, std::size_t start, std::size_t length);
Var reshape(const Var& a, Shape shape);
Var row(const Var& a, std::size_t index);
// Embedding lookup: rows of a table by index.
Var gather_rows(const Var& table, std::span<const std::size_t> indices);

struct Conv2dOptions {
  std::size_t stride_h = 1, stride_w = 1;
  std::size_t pad_h = 0, pad_w = 0;
};

std::size_t conv_output_extent(std::size_t in, std::size_t kernel,
                               std::size_t stride, std::size_t pad);

// Cross-correlation of a C_in x H x W input with C_out x C_in x kh x kw
// kernels. `bias` (shape C_out) may be empty.
Var conv2d(const Var& input, const Var& kernels, const Var& bias,
           const Conv2dOptions& options);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

}  // namespace csds

#endif  // CSDS_AUTOGRAD_HPP_

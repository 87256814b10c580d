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
#include "csds/autograd.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "csds/error.hpp"

namespace csds {

namespace {

thread_local bool g_grad_enabled = true;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap as_matrix(const Tensor& t) { return ConstMap(t.data(), t.rows(), t.cols()); }
MutMap as_matrix(Tensor& t) { return MutMap(t.data(), t.rows(), t.cols()); }

Var make_op(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(inputs.size());
    for (const auto& in : inputs) node->parents.push_back(in.shared());
    node->backward = std::move(fn);
  }
  return Var(std::move(node));
}

// Gradient buffer of parent i, or null when it does not need one.
Tensor* parent_grad(Node& self, std::size_t i) {
  Node& p = *self.parents[i];
  return p.requires_grad ? &p.grad_buffer() : nullptr;
}

void require_matrix(const Var& a, const char* op) {
  if (a.value().rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_string(a.shape()));
  }
}

void require_same(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                     " vs " + shape_string(b.shape()));
  }
}

template <typename F, typename D>
Var unary(const Var& a, F f, D df) {
  Tensor out(a.shape());
  const Tensor& x = a.value();
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return make_op(std::move(out), {a}, [df](Node& self) {
    Tensor* g = parent_grad(self, 0);
    if (!g) return;
    const Tensor& x = self.parents[0]->value;
    for (std::size_t i = 0; i < x.size(); ++i) {
      (*g)[i] += self.grad[i] * df(x[i], self.value[i]);
    }
  });
}

// Splits a shape around `axis` into outer x extent x inner.
struct AxisSplit {
  std::size_t outer = 1, extent = 1, inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_string(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Tensor& Node::grad_buffer() {
  if (grad.empty()) grad = Tensor(value.shape(), 0.0);
  return grad;
}

double Var::item() const {
  if (value().size() != 1) {
    throw ShapeError("item() on non-scalar tensor " + shape_string(shape()));
  }
  return value()[0];
}

Tensor Var::grad() const {
  if (node_->grad.empty()) return Tensor(node_->value.shape(), 0.0);
  return node_->grad;
}

Var constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

Var parameter(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return Var(std::move(node));
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

ComputeGraph::ComputeGraph(Var root) : root_(std::move(root)) {
  if (root_.value().size() != 1) {
    throw ShapeError("backward requires a scalar root, got " + shape_string(root_.shape()));
  }
  // Iterative post-order DFS; yields parents before children.
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  if (root_.requires_grad()) {
    stack.emplace_back(root_.node(), 0);
    seen.insert(root_.node());
  }
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order_.push_back(node);
      stack.pop_back();
    }
  }
}

void ComputeGraph::backward() {
  if (order_.empty()) return;
  for (Node* n : order_) {
    if (!n->is_leaf()) n->grad = Tensor(n->value.shape(), 0.0);
  }
  Node* root = order_.back();
  if (root->is_leaf()) {
    root->grad_buffer()[0] += 1.0;
    return;
  }
  root->grad[0] = 1.0;
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    if (!(*it)->is_leaf()) (*it)->backward(**it);
  }
}

void backward(const Var& root) { ComputeGraph(root).backward(); }

// ---- linear algebra --------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.cols() != B.rows()) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_string(A.shape()) +
                     " x " + shape_string(B.shape()));
  }
  Tensor out({A.rows(), B.cols()});
  as_matrix(out).noalias() = as_matrix(A) * as_matrix(B);
  return make_op(std::move(out), {a, b}, [](Node& self) {
    const Tensor& A = self.parents[0]->value;
    const Tensor& B = self.parents[1]->value;
    if (Tensor* ga = parent_grad(self, 0)) {
      as_matrix(*ga).noalias() += as_matrix(self.grad) * as_matrix(B).transpose();
    }
    if (Tensor* gb = parent_grad(self, 1)) {
      as_matrix(*gb).noalias() += as_matrix(A).transpose() * as_matrix(self.grad);
    }
  });
}

Var transpose(const Var& a) {
  require_matrix(a, "transpose");
  const Tensor& A = a.value();
  Tensor out({A.cols(), A.rows()});
  as_matrix(out) = as_matrix(A).transpose();
  return make_op(std::move(out), {a}, [](Node& self) {
    if (Tensor* g = parent_grad(self, 0)) as_matrix(*g) += as_matrix(self.grad).transpose();
  });
}

// ---- elementwise -----------------------------------------------------------

Var add(const Var& a, const Var& b) {
  require_same(a, b, "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (Tensor* g = parent_grad(self, k)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a, b, "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    if (Tensor* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (Tensor* g = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a, b, "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    const Tensor& x = self.parents[0]->value;
    const Tensor& y = self.parents[1]->value;
    if (Tensor* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * y[i];
    }
    if (Tensor* g = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * x[i];
    }
  });
}

Var scale(const Var& a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(const Var& a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var add_bias(const Var& a, const Var& bias) {
  require_matrix(a, "add_bias");
  const Tensor& A = a.value();
  if (bias.value().size() != A.cols()) {
    throw ShapeError("add_bias: bias " + shape_string(bias.shape()) + " does not fit " +
                     shape_string(A.shape()));
  }
  Tensor out = A;
  const std::size_t n = A.cols();
  for (std::size_t r = 0; r < A.rows(); ++r) {
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] += bias.value()[c];
  }
  return make_op(std::move(out), {a, bias}, [n](Node& self) {
    if (Tensor* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (Tensor* g = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i % n] += self.grad[i];
    }
  });
}

Var repeat_rows(const Var& row_vec, std::size_t count) {
  if (count == 0) throw ShapeError("repeat_rows: count must be positive");
  const std::size_t n = row_vec.value().size();
  if (row_vec.value().rank() == 2 && row_vec.value().rows() != 1) {
    throw ShapeError("repeat_rows: expected a single row, got " + shape_string(row_vec.shape()));
  }
  Tensor out({count, n});
  for (std::size_t r = 0; r < count; ++r) {
    std::copy_n(row_vec.value().data(), n, out.data() + r * n);
  }
  return make_op(std::move(out), {row_vec}, [n](Node& self) {
    if (Tensor* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i % n] += self.grad[i];
    }
  });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var tanh(const Var& a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& a) {
  return unary(a,
               [](double x) {
                 if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
                 const double e = std::exp(x);
                 return e / (1.0 + e);
               },
               [](double, double y) { return y * (1.0 - y); });
}

Var relu(const Var& a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; },
               [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var exp(const Var& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var abs(const Var& a) {
  return unary(a, [](double x) { return std::abs(x); },
               [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Var square(const Var& a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sqrt(const Var& a) {
  for (double x : a.value().values()) {
    if (x < 0) throw DataError("sqrt of negative value");
  }
  return unary(a, [](double x) { return std::sqrt(x); },
               [](double, double y) { return y > 0 ? 0.5 / y : 0.0; });
}

// ---- reductions ------------------------------------------------------------

Var sum(const Var& a) {
  double s = 0.0;
  for (double x : a.value().values()) s += x;
  return make_op(Tensor::scalar(s), {a}, [](Node& self) {
    if (Tensor* g = parent_grad(self, 0)) {
      const double d = self.grad[0];
      for (auto& x : g->values()) x += d;
    }
  });
}

Var mean(const Var& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var softmax(const Var& a, std::size_t axis) {
  const AxisSplit s = split_axis(a.shape(), axis);
  const Tensor& x = a.value();
  Tensor out(a.shape());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.extent * s.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < s.extent; ++k) mx = std::max(mx, x[base + k * s.inner]);
      double z = 0.0;
      for (std::size_t k = 0; k < s.extent; ++k) {
        const double e = std::exp(x[base + k * s.inner] - mx);
        out[base + k * s.inner] = e;
        z += e;
      }
      for (std::size_t k = 0; k < s.extent; ++k) out[base + k * s.inner] /= z;
    }
  }
  return make_op(std::move(out), {a}, [s](Node& self) {
    Tensor* g = parent_grad(self, 0);
    if (!g) return;
    const Tensor& y = self.value;
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        const std::size_t base = o * s.extent * s.inner + in;
        double dot = 0.0;
        for (std::size_t k = 0; k < s.extent; ++k) {
          const std::size_t i = base + k * s.inner;
          dot += self.grad[i] * y[i];
        }
        for (std::size_t k = 0; k < s.extent; ++k) {
          const std::size_t i = base + k * s.inner;
          (*g)[i] += y[i] * (self.grad[i] - dot);
        }
      }
    }
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
  require_matrix(x, "layer_norm");
  const std::size_t m = x.value().rows();
  const std::size_t n = x.value().cols();
  if (gain.value().size() != n || bias.value().size() != n) {
    throw ShapeError("layer_norm: gain/bias must have " + std::to_string(n) + " entries");
  }
  Tensor out({m, n});
  // Normalized activations and inverse deviations, kept for backward.
  auto xhat = std::make_shared<Tensor>(Shape{m, n});
  auto inv_std = std::make_shared<std::vector<double>>(m);
  const Tensor& X = x.value();
  for (std::size_t r = 0; r < m; ++r) {
    double mu = 0.0;
    for (std::size_t c = 0; c < n; ++c) mu += X[r * n + c];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double d = X[r * n + c] - mu;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t c = 0; c < n; ++c) {
      const double h = (X[r * n + c] - mu) * is;
      (*xhat)[r * n + c] = h;
      out[r * n + c] = h * gain.value()[c] + bias.value()[c];
    }
  }
  return make_op(std::move(out), {x, gain, bias}, [m, n, xhat, inv_std](Node& self) {
    const Tensor& g_in = self.grad;
    const Tensor& gamma = self.parents[1]->value;
    if (Tensor* gg = parent_grad(self, 1)) {
      for (std::size_t i = 0; i < m * n; ++i) (*gg)[i % n] += g_in[i] * (*xhat)[i];
    }
    if (Tensor* gb = parent_grad(self, 2)) {
      for (std::size_t i = 0; i < m * n; ++i) (*gb)[i % n] += g_in[i];
    }
    if (Tensor* gx = parent_grad(self, 0)) {
      const double inv_n = 1.0 / static_cast<double>(n);
      for (std::size_t r = 0; r < m; ++r) {
        double mean_d = 0.0, mean_dh = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
          const double d = g_in[r * n + c] * gamma[c];
          mean_d += d;
          mean_dh += d * (*xhat)[r * n + c];
        }
        mean_d *= inv_n;
        mean_dh *= inv_n;
        for (std::size_t c = 0; c < n; ++c) {
          const double d = g_in[r * n + c] * gamma[c];
          (*gx)[r * n + c] += (*inv_std)[r] * (d - mean_d - (*xhat)[r * n + c] * mean_dh);
        }
      }
    }
  });
}

// ---- structural ------------------------------------------------------------

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts[0].shape();
  Shape out_shape = first;
  if (axis >= first.size()) throw ShapeError("concat: axis out of range");
  out_shape[axis] = 0;
  std::vector<std::size_t> extents;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == first[i];
    if (!ok) {
      throw ShapeError("concat: incompatible shapes " + shape_string(first) + " and " +
                       shape_string(s));
    }
    extents.push_back(s[axis]);
    out_shape[axis] += s[axis];
  }
  const AxisSplit os = split_axis(out_shape, axis);
  Tensor out(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t chunk = extents[k] * os.inner;
    const Tensor& v = parts[k].value();
    for (std::size_t o = 0; o < os.outer; ++o) {
      std::copy_n(v.data() + o * chunk, chunk,
                  out.data() + o * os.extent * os.inner + offset * os.inner);
    }
    offset += extents[k];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return make_op(std::move(out), std::move(inputs), [os, extents](Node& self) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < extents.size(); ++k) {
      const std::size_t chunk = extents[k] * os.inner;
      if (Tensor* g = parent_grad(self, k)) {
        for (std::size_t o = 0; o < os.outer; ++o) {
          const double* src = self.grad.data() + o * os.extent * os.inner + offset * os.inner;
          double* dst = g->data() + o * chunk;
          for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
        }
      }
      offset += extents[k];
    }
  });
}

Var slice(const Var& a, std::size_t axis, std::size_t start, std::size_t length) {
  const AxisSplit s = split_axis(a.shape(), axis);
  if (length == 0 || start + length > s.extent) {
    throw ShapeError("slice [" + std::to_string(start) + ", " + std::to_string(start + length) +
                     ") out of range for axis " + std::to_string(axis) + " of " +
                     shape_string(a.shape()));
  }
  Shape out_shape = a.shape();
  out_shape[axis] = length;
  Tensor out(out_shape);
  const std::size_t chunk = length * s.inner;
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(a.value().data() + o * s.extent * s.inner + start * s.inner, chunk,
                out.data() + o * chunk);
  }
  return make_op(std::move(out), {a}, [s, start, chunk](Node& self) {
    Tensor* g = parent_grad(self, 0);
    if (!g) return;
    for (std::size_t o = 0; o < s.outer; ++o) {
      double* dst = g->data() + o * s.extent * s.inner + start * s.inner;
      const double* src = self.grad.data() + o * chunk;
      for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
    }
  });
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return make_op(std::move(out), {a}, [](Node& self) {
    if (Tensor* g = parent_grad(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
  });
}

Var row(const Var& a, std::size_t index) { return slice(a, 0, index, 1); }

Var gather_rows(const Var& table, std::span<const std::size_t> indices) {
  require_matrix(table, "gather_rows");
  const std::size_t n = table.value().cols();
  const std::size_t rows = table.value().rows();
  if (indices.empty()) throw ShapeError("gather_rows: no indices");
  Tensor out({indices.size(), n});
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= rows) {
      throw ShapeError("gather_rows: index " + std::to_string(indices[k]) + " out of range");
    }
    std::copy_n(table.value().data() + indices[k] * n, n, out.data() + k * n);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return make_op(std::move(out), {table}, [idx, n](Node& self) {
    Tensor* g = parent_grad(self, 0);
    if (!g) return;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      for (std::size_t c = 0; c < n; ++c) (*g)[idx[k] * n + c] += self.grad[k * n + c];
    }
  });
}

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                               std::size_t pad) {
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");
  if (kernel > in + 2 * pad) {
    throw ShapeError("conv2d: kernel extent " + std::to_string(kernel) +
                     " larger than padded input extent " + std::to_string(in + 2 * pad));
  }
  return (in + 2 * pad - kernel) / stride + 1;
}

Var conv2d(const Var& input, const Var& kernels, const Var& bias, const Conv2dOptions& opt) {
  const Tensor& x = input.value();
  const Tensor& k = kernels.value();
  if (x.rank() != 3) throw ShapeError("conv2d: input must be C x H x W, got " + shape_string(x.shape()));
  if (k.rank() != 4) {
    throw ShapeError("conv2d: kernels must be Cout x Cin x kh x kw, got " + shape_string(k.shape()));
  }
  const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t cout = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  if (k.dim(1) != cin) {
    throw ShapeError("conv2d: kernel channels " + shape_string(k.shape()) + " vs input " +
                     shape_string(x.shape()));
  }
  const bool has_bias = static_cast<bool>(bias);
  if (has_bias && bias.value().size() != cout) {
    throw ShapeError("conv2d: bias must have " + std::to_string(cout) + " entries");
  }
  const std::size_t oh = conv_output_extent(h, kh, opt.stride_h, opt.pad_h);
  const std::size_t ow = conv_output_extent(w, kw, opt.stride_w, opt.pad_w);

  // Visits every (output, kernel tap, input) triple that lies inside the
  // unpadded input.
  auto for_each_tap = [=](auto&& fn) {
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox)
          for (std::size_t ci = 0; ci < cin; ++ci)
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const long iy = static_cast<long>(oy * opt.stride_h + ky) - static_cast<long>(opt.pad_h);
              if (iy < 0 || iy >= static_cast<long>(h)) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const long ix = static_cast<long>(ox * opt.stride_w + kx) - static_cast<long>(opt.pad_w);
                if (ix < 0 || ix >= static_cast<long>(w)) continue;
                fn((co * oh + oy) * ow + ox, ((co * cin + ci) * kh + ky) * kw + kx,
                   (ci * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix));
              }
            }
  };

  Tensor out({cout, oh, ow});
  if (has_bias) {
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t i = 0; i < oh * ow; ++i) out[co * oh * ow + i] = bias.value()[co];
  }
  for_each_tap([&](std::size_t o, std::size_t kk, std::size_t i) { out[o] += k[kk] * x[i]; });

  std::vector<Var> inputs{input, kernels};
  if (has_bias) inputs.push_back(bias);
  return make_op(std::move(out), std::move(inputs), [for_each_tap, has_bias, cout, oh, ow](Node& self) {
    const Tensor& x = self.parents[0]->value;
    const Tensor& k = self.parents[1]->value;
    Tensor* gx = parent_grad(self, 0);
    Tensor* gk = parent_grad(self, 1);
    if (gx || gk) {
      for_each_tap([&](std::size_t o, std::size_t kk, std::size_t i) {
        const double d = self.grad[o];
        if (gx) (*gx)[i] += d * k[kk];
        if (gk) (*gk)[kk] += d * x[i];
      });
    }
    if (has_bias) {
      if (Tensor* gb = parent_grad(self, 2)) {
        for (std::size_t co = 0; co < cout; ++co)
          for (std::size_t i = 0; i < oh * ow; ++i) (*gb)[co] += self.grad[co * oh * ow + i];
      }
    }
  });
}

}  // namespace csds

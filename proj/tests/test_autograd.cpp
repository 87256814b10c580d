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
#include <cmath>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "csds/autograd.hpp"
#include "csds/error.hpp"
#include "test_util.hpp"

namespace csds {
namespace {

using testing::check_gradients;

Var rand_param(Shape shape, Rng& rng, double scale = 1.0) {
  return parameter(Tensor::randn(std::move(shape), rng, scale));
}

// sum(op(...) * R) with a fixed random R so every output element matters.
std::function<Var()> weighted(std::function<Var()> op, Rng& rng) {
  const Var probe = op();
  const Var r = constant(Tensor::randn(probe.shape(), rng));
  return [op, r] { return sum(mul(op(), r)); };
}

void expect_grad_ok(const std::function<Var()>& op, std::vector<Var> vars, Rng& rng) {
  const auto f = weighted(op, rng);
  const auto r = check_gradients(f, vars, 50, rng);
  EXPECT_GT(r.checked, 0u);
  EXPECT_LT(r.max_rel, 1e-4) << r.worst;
}

TEST(Tensor, ShapeContracts) {
  Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor({2, 2, 2}, 0.0).rows(), ShapeError);
}

TEST(Autograd, MatmulValueAndShapeError) {
  const Var a = constant(Tensor::matrix({{1, 2}, {3, 4}}));
  const Var b = constant(Tensor::matrix({{5}, {6}}));
  const Var c = matmul(a, b);
  EXPECT_DOUBLE_EQ(c.value().at(0, 0), 17.0);
  EXPECT_DOUBLE_EQ(c.value().at(1, 0), 39.0);
  EXPECT_THROW(matmul(b, b), ShapeError);
}

TEST(Autograd, ElementwiseGradients) {
  Rng rng(1);
  Var a = rand_param({3, 4}, rng), b = rand_param({3, 4}, rng);
  Var pos = parameter(Tensor({3, 4}, std::vector<double>(12, 0.0)));
  for (auto& x : pos.mutable_value().values()) x = rng.uniform(0.5, 2.0);
  expect_grad_ok([=] { return add(a, b); }, {a, b}, rng);
  expect_grad_ok([=] { return sub(a, b); }, {a, b}, rng);
  expect_grad_ok([=] { return mul(a, b); }, {a, b}, rng);
  expect_grad_ok([=] { return scale(a, -2.5); }, {a}, rng);
  expect_grad_ok([=] { return add_scalar(a, 3.0); }, {a}, rng);
  expect_grad_ok([=] { return neg(a); }, {a}, rng);
  expect_grad_ok([=] { return tanh(a); }, {a}, rng);
  expect_grad_ok([=] { return sigmoid(a); }, {a}, rng);
  expect_grad_ok([=] { return relu(a); }, {a}, rng);
  expect_grad_ok([=] { return exp(a); }, {a}, rng);
  expect_grad_ok([=] { return abs(a); }, {a}, rng);
  expect_grad_ok([=] { return square(a); }, {a}, rng);
  expect_grad_ok([=] { return sqrt(pos); }, {pos}, rng);
}

TEST(Autograd, StructuralGradients) {
  Rng rng(2);
  Var a = rand_param({3, 4}, rng), b = rand_param({4, 5}, rng), bias = rand_param({1, 4}, rng);
  Var r = rand_param({1, 4}, rng), c = rand_param({2, 4}, rng);
  expect_grad_ok([=] { return matmul(a, b); }, {a, b}, rng);
  expect_grad_ok([=] { return transpose(a); }, {a}, rng);
  expect_grad_ok([=] { return add_bias(a, bias); }, {a, bias}, rng);
  expect_grad_ok([=] { return repeat_rows(r, 5); }, {r}, rng);
  expect_grad_ok([=] { return sum(a); }, {a}, rng);
  expect_grad_ok([=] { return mean(a); }, {a}, rng);
  expect_grad_ok([=] { return softmax(a, 1); }, {a}, rng);
  expect_grad_ok([=] { return softmax(a, 0); }, {a}, rng);
  expect_grad_ok([=] { return layer_norm(a, r, bias); }, {a, r, bias}, rng);
  expect_grad_ok([=] { const Var p[] = {a, c}; return concat(p, 0); }, {a, c}, rng);
  expect_grad_ok([=] { const Var p[] = {a, transpose(b)}; return concat(std::span<const Var>(p), 0); },
                 {a, b}, rng);
  expect_grad_ok([=] { return slice(a, 1, 1, 2); }, {a}, rng);
  expect_grad_ok([=] { return slice(a, 0, 1, 2); }, {a}, rng);
  expect_grad_ok([=] { return reshape(a, {2, 6}); }, {a}, rng);
  expect_grad_ok([=] { return row(a, 2); }, {a}, rng);
  const std::vector<std::size_t> idx = {2, 0, 2, 1};
  expect_grad_ok([=] { return gather_rows(a, idx); }, {a}, rng);
}

TEST(Autograd, ConcatAlongColumns) {
  Rng rng(3);
  Var a = rand_param({3, 2}, rng), b = rand_param({3, 5}, rng);
  expect_grad_ok([=] { const Var p[] = {a, b}; return concat(p, 1); }, {a, b}, rng);
}

TEST(Autograd, Conv2dGradients) {
  Rng rng(4);
  Var x = rand_param({2, 7, 6}, rng), k = rand_param({3, 2, 3, 3}, rng), b = rand_param({3}, rng);
  Conv2dOptions opt;
  opt.stride_h = 2;
  opt.stride_w = 2;
  opt.pad_h = 1;
  opt.pad_w = 1;
  expect_grad_ok([=] { return conv2d(x, k, b, opt); }, {x, k, b}, rng);
  expect_grad_ok([=] { return conv2d(x, k, Var(), Conv2dOptions{}); }, {x, k}, rng);
}

// Direct nested-loop cross-correlation.
TEST(Autograd, Conv2dMatchesNaiveLoops) {
  Rng rng(5);
  const Tensor x = Tensor::randn({2, 9, 8}, rng), k = Tensor::randn({4, 2, 3, 3}, rng),
               b = Tensor::randn({4}, rng);
  Conv2dOptions opt;
  opt.stride_h = 2;
  opt.stride_w = 1;
  opt.pad_h = 1;
  opt.pad_w = 0;
  const Tensor y = conv2d(constant(x), constant(k), constant(b), opt).value();
  const std::size_t oh = conv_output_extent(9, 3, 2, 1), ow = conv_output_extent(8, 3, 1, 0);
  ASSERT_EQ(y.shape(), (Shape{4, oh, ow}));
  for (std::size_t o = 0; o < 4; ++o)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        double acc = b.values()[o];
        for (std::size_t c = 0; c < 2; ++c)
          for (std::size_t u = 0; u < 3; ++u)
            for (std::size_t v = 0; v < 3; ++v) {
              const long r = static_cast<long>(i * 2 + u) - 1, s = static_cast<long>(j + v);
              if (r < 0 || r >= 9 || s < 0 || s >= 8) continue;
              acc += x.values()[(c * 9 + r) * 8 + s] * k.values()[((o * 2 + c) * 3 + u) * 3 + v];
            }
        EXPECT_NEAR(y.values()[(o * oh + i) * ow + j], acc, 1e-12);
      }
  EXPECT_THROW(conv_output_extent(2, 5, 1, 0), ShapeError);
}

TEST(Autograd, SoftmaxMatchesLongDouble) {
  Rng rng(6);
  const Tensor a = Tensor::randn({4, 7}, rng, 10.0);
  const Tensor s = softmax(constant(a), 1).value();
  for (std::size_t r = 0; r < 4; ++r) {
    long double mx = -1e300L, z = 0.0L;
    for (std::size_t c = 0; c < 7; ++c) mx = std::max<long double>(mx, a.at(r, c));
    for (std::size_t c = 0; c < 7; ++c) z += std::exp(static_cast<long double>(a.at(r, c)) - mx);
    for (std::size_t c = 0; c < 7; ++c) {
      const long double ref = std::exp(static_cast<long double>(a.at(r, c)) - mx) / z;
      EXPECT_NEAR(s.at(r, c), static_cast<double>(ref), 1e-15);
    }
  }
}

TEST(Autograd, SoftmaxIsStableForLargeInputs) {
  const Tensor s = softmax(constant(Tensor::matrix({{1000.0, 1000.0, -1000.0}})), 1).value();
  EXPECT_TRUE(s.all_finite());
  EXPECT_NEAR(s.at(0, 0), 0.5, 1e-15);
}

TEST(Autograd, SqrtGradientAtZeroIsZero) {
  Var x = parameter(Tensor({1, 2}, std::vector<double>{0.0, 4.0}));
  backward(sum(sqrt(x)));
  EXPECT_EQ(x.grad().values()[0], 0.0);
  EXPECT_DOUBLE_EQ(x.grad().values()[1], 0.25);
}

TEST(Autograd, SharedSubexpressionAccumulates) {
  Var x = parameter(Tensor::scalar(3.0));
  const Var y = mul(x, x);
  backward(sum(add(y, y)));  // d/dx 2x^2 = 4x
  EXPECT_DOUBLE_EQ(x.grad().values()[0], 12.0);
}

TEST(Autograd, LeafGradientsAccumulateAcrossBackwardCalls) {
  Var x = parameter(Tensor::scalar(2.0));
  const Var y = sum(square(x));
  ComputeGraph g(y);
  g.backward();
  g.backward();
  EXPECT_DOUBLE_EQ(x.grad().values()[0], 8.0);
  x.zero_grad();
  g.backward();
  EXPECT_DOUBLE_EQ(x.grad().values()[0], 4.0);
}

TEST(Autograd, NoGradGuardStopsRecording) {
  Var x = parameter(Tensor::scalar(2.0));
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_enabled());
    const Var y = square(x);
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_TRUE(grad_enabled());
}

TEST(Autograd, ConstantsGetNoGradient) {
  Var x = parameter(Tensor::scalar(2.0));
  const Var c = constant(Tensor::scalar(5.0));
  backward(sum(mul(x, c)));
  EXPECT_FALSE(c.has_grad());
  EXPECT_DOUBLE_EQ(x.grad().values()[0], 5.0);
}

TEST(Autograd, DeepChainDoesNotOverflowTheStack) {
  Var x = parameter(Tensor::scalar(1.0));
  Var y = x;
  for (int i = 0; i < 100000; ++i) y = add_scalar(y, 0.0);
  backward(sum(y));
  EXPECT_DOUBLE_EQ(x.grad().values()[0], 1.0);
}

TEST(Autograd, LayerNormRowsAreNormalized) {
  Rng rng(7);
  const Tensor x = Tensor::randn({3, 6}, rng, 4.0);
  const Var y = layer_norm(constant(x), constant(Tensor({1, 6}, 1.0)), constant(Tensor({1, 6}, 0.0)));
  for (std::size_t r = 0; r < 3; ++r) {
    double m = 0, v = 0;
    for (std::size_t c = 0; c < 6; ++c) m += y.value().at(r, c);
    m /= 6;
    for (std::size_t c = 0; c < 6; ++c) v += std::pow(y.value().at(r, c) - m, 2);
    EXPECT_NEAR(m, 0.0, 1e-12);
    EXPECT_NEAR(v / 6, 1.0, 1e-4);
  }
}

}  // namespace
}  // namespace csds

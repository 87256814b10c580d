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
#include "csds/style.hpp"

#include <cmath>
#include <vector>

#include "csds/error.hpp"

namespace csds {

Tensor dynamic_feature(const MotionSequence& motion) {
  const Tensor& p = motion.poses;
  if (p.rank() != 2 || p.rows() < 2) {
    throw DataError("dynamic feature needs at least 2 frames");
  }
  const std::size_t t_len = p.rows(), w = p.cols();
  Tensor out({t_len - 1, w});
  for (std::size_t t = 0; t + 1 < t_len; ++t) {
    for (std::size_t c = 0; c < w; ++c) out.at(t, c) = std::abs(p.at(t + 1, c) - p.at(t, c));
  }
  return out;
}

Var dynamic_feature(const Var& poses) {
  if (poses.value().rank() != 2 || poses.value().rows() < 2) {
    throw DataError("dynamic feature needs at least 2 frames");
  }
  const std::size_t n = poses.value().rows() - 1;
  return abs(sub(slice(poses, 0, 1, n), slice(poses, 0, 0, n)));
}

Var attend(const Var& code, const Var& memory, AttentionMode mode) {
  const Tensor& z = code.value();
  const Tensor& w = memory.value();
  if (z.rank() != 2 || z.rows() != 1 || w.rank() != 2 || z.cols() != w.cols()) {
    throw ShapeError("attend: code " + shape_string(z.shape()) + " does not match memory " +
                     shape_string(w.shape()));
  }
  const double root_d = std::sqrt(static_cast<double>(z.cols()));
  Var scores = matmul(code, transpose(memory));
  if (mode == AttentionMode::kPrescaled) return softmax(scale(scores, 1.0 / root_d), 1);
  return scale(softmax(scores, 1), 1.0 / root_d);
}

Var style_embedding(const Var& attn, const Var& memory) {
  const Tensor& a = attn.value();
  const Tensor& w = memory.value();
  if (a.rank() != 2 || a.rows() != 1 || w.rank() != 2 || a.cols() != w.rows()) {
    throw ShapeError("style_embedding: attention " + shape_string(a.shape()) +
                     " does not match memory " + shape_string(w.shape()));
  }
  return matmul(attn, memory);
}

Var contrastive_loss(const Var& ci, const Var& cj, bool same_style, double margin) {
  if (!(margin > 0)) throw DataError("contrastive margin must be positive");
  Var sq = sum(square(sub(ci, cj)));
  if (same_style) return scale(sq, 0.5);
  // 0.5 * max(0, m - Dis)^2
  Var gap = relu(add_scalar(neg(sqrt(sq)), margin));
  return scale(square(gap), 0.5);
}

StyleProducer::StyleProducer(ParameterSet& params, const ModelConfig& config, Rng& rng)
    : config_(config) {
  const std::size_t k = config.conv_kernel;
  const std::size_t c1 = config.conv1_channels, c2 = config.conv2_channels;
  conv1_kernels_ = params.add("style.conv1.kernels",
                              Tensor::xavier_uniform(k * k, c1 * k * k, {c1, 1, k, k}, rng));
  conv1_bias_ = params.add("style.conv1.bias", Tensor({c1}, 0.0));
  conv2_kernels_ = params.add("style.conv2.kernels",
                              Tensor::xavier_uniform(c1 * k * k, c2 * k * k, {c2, c1, k, k}, rng));
  conv2_bias_ = params.add("style.conv2.bias", Tensor({c2}, 0.0));

  const std::size_t s = config.conv_stride;
  const std::size_t w2 = conv_output_extent(conv_output_extent(config.pose_dim, k, s, 0), k, s, 0);
  const std::size_t in = c2 * w2, d = config.d_model;
  gru_input_ = params.add("style.gru.input_weight", Tensor::xavier_uniform(in, 3 * d, {in, 3 * d}, rng));
  gru_hidden_ = params.add("style.gru.hidden_weight", Tensor::xavier_uniform(d, 3 * d, {d, 3 * d}, rng));
  gru_input_bias_ = params.add("style.gru.input_bias", Tensor({1, 3 * d}, 0.0));
  gru_hidden_bias_ = params.add("style.gru.hidden_bias", Tensor({1, 3 * d}, 0.0));

  memory_ = params.add("style.memory", Tensor::xavier_uniform(config.memory_slots, d,
                                                              {config.memory_slots, d}, rng));
}

Var StyleProducer::encode_motion(const Var& dynamic) const {
  const Tensor& f = dynamic.value();
  if (f.rank() != 2 || f.cols() != config_.pose_dim) {
    throw ShapeError("encode_motion: expected (T-1) x " + std::to_string(config_.pose_dim) +
                     ", got " + shape_string(f.shape()));
  }
  if (f.rows() + 1 < ModelConfig::kMinFrames) {
    throw DataError("motion encoder needs at least " + std::to_string(ModelConfig::kMinFrames) +
                    " frames, got " + std::to_string(f.rows() + 1));
  }
  Conv2dOptions opt;
  opt.stride_h = opt.stride_w = config_.conv_stride;
  Var x = reshape(dynamic, {1, f.rows(), f.cols()});
  Var h1 = relu(conv2d(x, conv1_kernels_, conv1_bias_, opt));
  Var h2 = relu(conv2d(h1, conv2_kernels_, conv2_bias_, opt));

  // Time runs along the first spatial axis; each step sees all channels.
  const std::size_t channels = h2.value().dim(0);
  const std::size_t steps = h2.value().dim(1);
  const std::size_t width = h2.value().dim(2);
  std::vector<Var> rows;
  rows.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    rows.push_back(reshape(slice(h2, 1, t, 1), {1, channels * width}));
  }
  Var seq = concat(rows, 0);
  Var gates_in = add_bias(matmul(seq, gru_input_), gru_input_bias_);

  const std::size_t d = config_.d_model;
  Var h = constant(Tensor({1, d}, 0.0));
  for (std::size_t t = 0; t < steps; ++t) {
    Var gi = row(gates_in, t);
    Var gh = add_bias(matmul(h, gru_hidden_), gru_hidden_bias_);
    Var r = sigmoid(slice(gi, 1, 0, d) + slice(gh, 1, 0, d));
    Var z = sigmoid(slice(gi, 1, d, d) + slice(gh, 1, d, d));
    Var n = tanh(slice(gi, 1, 2 * d, d) + r * slice(gh, 1, 2 * d, d));
    h = n + z * (h - n);
  }
  return h;
}

StyleProducer::Output StyleProducer::forward(const Var& poses) const {
  Output out;
  out.code = encode_motion(dynamic_feature(poses));
  out.attention = attend(out.code, memory_, config_.attention);
  out.embedding = style_embedding(out.attention, memory_);
  return out;
}

StyleProducer::Output StyleProducer::forward(const MotionSequence& motion) const {
  return forward(constant(motion.poses));
}

}  // namespace csds

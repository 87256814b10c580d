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
#include "csds/generator.hpp"

#include <cmath>

#include "csds/error.hpp"

namespace csds {

Tensor position_encoding(std::size_t frames, std::size_t d) {
  Tensor pe({frames, d});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t i = 0; i < d; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      pe.at(t, i) = std::sin(static_cast<double>(t) * freq);
      if (i + 1 < d) pe.at(t, i + 1) = std::cos(static_cast<double>(t) * freq);
    }
  }
  return pe;
}

MusicEncoder::MusicEncoder(ParameterSet& params, const ModelConfig& config, Rng& rng)
    : config_(config) {
  const std::size_t d = config.d_model;
  input_ = Linear(params, "encoder.input", config.music_dim, d, rng);
  for (std::size_t l = 0; l < config.encoder_layers; ++l) {
    const std::string p = "encoder.layer" + std::to_string(l);
    Layer layer;
    layer.query = Linear(params, p + ".query", d, d, rng);
    layer.key = Linear(params, p + ".key", d, d, rng);
    layer.value = Linear(params, p + ".value", d, d, rng);
    layer.out = Linear(params, p + ".out", d, d, rng);
    layer.norm1_gain = params.add(p + ".norm1.gain", Tensor({1, d}, 1.0));
    layer.norm1_bias = params.add(p + ".norm1.bias", Tensor({1, d}, 0.0));
    layer.ff1 = Linear(params, p + ".ff1", d, config.ff_width, rng);
    layer.ff2 = Linear(params, p + ".ff2", config.ff_width, d, rng);
    layer.norm2_gain = params.add(p + ".norm2.gain", Tensor({1, d}, 1.0));
    layer.norm2_bias = params.add(p + ".norm2.bias", Tensor({1, d}, 0.0));
    layers_.push_back(std::move(layer));
  }
}

MusicEncoder::Output MusicEncoder::forward(const Var& frames, bool keep_attention) const {
  const Tensor& m = frames.value();
  if (m.rank() != 2 || m.cols() != config_.music_dim) {
    throw ShapeError("music encoder expects T x " + std::to_string(config_.music_dim) +
                     " features, got " + shape_string(m.shape()));
  }
  const std::size_t t_len = m.rows();
  const std::size_t d = config_.d_model;
  const std::size_t heads = config_.heads;
  const std::size_t dh = d / heads;
  const double inv_root = 1.0 / std::sqrt(static_cast<double>(dh));

  Output out;
  Var x = add(input_(frames), constant(position_encoding(t_len, d)));
  for (const Layer& layer : layers_) {
    Var q = layer.query(x), k = layer.key(x), v = layer.value(x);
    std::vector<Var> head_out;
    head_out.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
      Var qh = slice(q, 1, h * dh, dh);
      Var kh = slice(k, 1, h * dh, dh);
      Var vh = slice(v, 1, h * dh, dh);
      Var attn = softmax(scale(matmul(qh, transpose(kh)), inv_root), 1);
      if (keep_attention) out.attention.push_back(attn.value());
      head_out.push_back(matmul(attn, vh));
    }
    Var mixed = layer.out(concat(head_out, 1));
    x = layer_norm(add(x, mixed), layer.norm1_gain, layer.norm1_bias);
    Var ff = layer.ff2(relu(layer.ff1(x)));
    x = layer_norm(add(x, ff), layer.norm2_gain, layer.norm2_bias);
  }
  out.representation = x;
  return out;
}

PoseVae::PoseVae(ParameterSet& params, const ModelConfig& config, Rng& rng) {
  hidden_ = Linear(params, "vae.enc_hidden", config.pose_dim, config.vae_hidden, rng);
  mu_ = Linear(params, "vae.mu", config.vae_hidden, config.d_z, rng);
  logvar_ = Linear(params, "vae.logvar", config.vae_hidden, config.d_z, rng);
  dec_hidden_ = Linear(params, "vae.dec_hidden", config.d_z, config.vae_hidden, rng);
  dec_out_ = Linear(params, "vae.dec_out", config.vae_hidden, config.pose_dim, rng);
}

PoseVae::Latent PoseVae::encode(const Var& poses, const Tensor& eps) const {
  Latent lat;
  Var h = tanh(hidden_(poses));
  lat.mu = mu_(h);
  lat.logvar = logvar_(h);
  if (eps.shape() != lat.mu.shape()) {
    throw ShapeError("vae noise " + shape_string(eps.shape()) + " does not match latent " +
                     shape_string(lat.mu.shape()));
  }
  lat.sample = add(lat.mu, mul(exp(scale(lat.logvar, 0.5)), constant(eps)));
  return lat;
}

Var PoseVae::decode(const Var& z) const { return tanh(dec_out_(tanh(dec_hidden_(z)))); }

Var kl_loss(const Var& mu, const Var& logvar) {
  if (mu.shape() != logvar.shape()) throw ShapeError("kl_loss: mu/logvar shape mismatch");
  const double rows = mu.value().rank() == 2 ? static_cast<double>(mu.value().rows()) : 1.0;
  Var terms = add_scalar(sub(add(square(mu), exp(logvar)), logvar), -1.0);
  return scale(sum(terms), 0.5 / rows);
}

Var compose_conditioning(const Var& music_repr, const Var& style, const Var& z_init) {
  const Tensor& zm = music_repr.value();
  if (zm.rank() != 2) throw ShapeError("music representation must be T x d_model");
  if (style.value().size() != zm.cols()) {
    throw ShapeError("style embedding width " + std::to_string(style.value().size()) +
                     " does not match d_model " + std::to_string(zm.cols()));
  }
  const std::size_t t_len = zm.rows();
  Var c = reshape(style, {1, zm.cols()});
  Var z = reshape(z_init, {1, z_init.value().size()});
  const Var parts[] = {add(music_repr, repeat_rows(c, t_len)), repeat_rows(z, t_len)};
  return concat(parts, 1);
}

DanceGenerator::DanceGenerator(ParameterSet& params, const ModelConfig& config, Rng& rng)
    : config_(config) {
  const std::size_t in = config.d_model + config.d_z;
  const std::size_t h = config.lstm_hidden;
  auto make = [&](const std::string& p) {
    Direction d;
    d.input_weight = params.add(p + ".input_weight", Tensor::xavier_uniform(in, 4 * h, {in, 4 * h}, rng));
    d.hidden_weight = params.add(p + ".hidden_weight", Tensor::xavier_uniform(h, 4 * h, {h, 4 * h}, rng));
    d.bias = params.add(p + ".bias", Tensor({1, 4 * h}, 0.0));
    return d;
  };
  forward_ = make("generator.lstm_fwd");
  backward_ = make("generator.lstm_bwd");
  output_ = Linear(params, "generator.output", 2 * h, config.pose_dim, rng);
}

Var DanceGenerator::run_direction(const Direction& dir, const Var& gates_in, bool reverse) const {
  const std::size_t t_len = gates_in.value().rows();
  const std::size_t h = config_.lstm_hidden;
  Var hidden = constant(Tensor({1, h}, 0.0));
  Var cell = constant(Tensor({1, h}, 0.0));
  std::vector<Var> outputs(t_len);
  for (std::size_t step = 0; step < t_len; ++step) {
    const std::size_t t = reverse ? t_len - 1 - step : step;
    Var g = add(row(gates_in, t), matmul(hidden, dir.hidden_weight));
    Var i = sigmoid(slice(g, 1, 0, h));
    Var f = sigmoid(slice(g, 1, h, h));
    Var c_hat = tanh(slice(g, 1, 2 * h, h));
    Var o = sigmoid(slice(g, 1, 3 * h, h));
    cell = f * cell + i * c_hat;
    hidden = o * tanh(cell);
    outputs[t] = hidden;
  }
  return concat(outputs, 0);
}

Var DanceGenerator::forward(const Var& conditioning) const {
  const Tensor& c = conditioning.value();
  const std::size_t in = config_.d_model + config_.d_z;
  if (c.rank() != 2 || c.cols() != in) {
    throw ShapeError("generator expects T x " + std::to_string(in) + " conditioning, got " +
                     shape_string(c.shape()));
  }
  Var fwd = run_direction(forward_, add_bias(matmul(conditioning, forward_.input_weight), forward_.bias), false);
  Var bwd = run_direction(backward_, add_bias(matmul(conditioning, backward_.input_weight), backward_.bias), true);
  const Var both[] = {fwd, bwd};
  return tanh(output_(concat(both, 1)));
}

}  // namespace csds

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
#ifndef CSDS_GENERATOR_HPP_
#define CSDS_GENERATOR_HPP_

#include <vector>

#include "csds/autograd.hpp"
#include "csds/model_config.hpp"
#include "csds/nn.hpp"

namespace csds {

// Sinusoidal position table, T x d.
Tensor position_encoding(std::size_t frames, std::size_t d);

// Transformer encoder over per-frame music features (post-norm layers).
// Parameters live under "encoder.".
class MusicEncoder {
 public:
  struct Output {
    Var representation;              // T x d_model
    std::vector<Tensor> attention;   // one T x T map per layer and head
  };

  MusicEncoder() = default;
  MusicEncoder(ParameterSet& params, const ModelConfig& config, Rng& rng);

  // `frames` is T x L.
  Output forward(const Var& frames, bool keep_attention = false) const;

 private:
  struct Layer {
    Linear query, key, value, out;
    Var norm1_gain, norm1_bias;
    Linear ff1, ff2;
    Var norm2_gain, norm2_bias;
  };

  ModelConfig config_;
  Linear input_;
  std::vector<Layer> layers_;
};

// Single-pose variational autoencoder. Parameters live under "vae.".
class PoseVae {
 public:
  struct Latent {
    Var mu;      // N x d_z
    Var logvar;  // N x d_z
    Var sample;  // mu + exp(0.5 logvar) * eps
  };

  PoseVae() = default;
  PoseVae(ParameterSet& params, const ModelConfig& config, Rng& rng);

  // `poses` is N x 42; `eps` is N x d_z.
  Latent encode(const Var& poses, const Tensor& eps) const;
  // Output in [-1, 1].
  Var decode(const Var& z) const;

 private:
  Linear hidden_, mu_, logvar_, dec_hidden_, dec_out_;
};

// 0.5 * sum(mu^2 + exp(logvar) - logvar - 1), averaged over rows.
Var kl_loss(const Var& mu, const Var& logvar);

// Rows are concat(z_m[t] + c, z_init).
Var compose_conditioning(const Var& music_repr, const Var& style, const Var& z_init);

// Bidirectional LSTM with a tanh output projection to poses. Parameters
// live under "generator.".
class DanceGenerator {
 public:
  DanceGenerator() = default;
  DanceGenerator(ParameterSet& params, const ModelConfig& config, Rng& rng);

  // T x (d_model + d_z) conditioning to T x 42 poses.
  Var forward(const Var& conditioning) const;

 private:
  struct Direction {
    Var input_weight, hidden_weight, bias;
  };
  Var run_direction(const Direction& dir, const Var& gates_in, bool reverse) const;

  ModelConfig config_;
  Direction forward_, backward_;
  Linear output_;
};

}  // namespace csds

#endif  // CSDS_GENERATOR_HPP_

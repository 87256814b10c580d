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
#ifndef CSDS_MODEL_CONFIG_HPP_
#define CSDS_MODEL_CONFIG_HPP_

#include <cstddef>
#include <string>

namespace csds {

// How memory-attention scores are normalized.
//   kLiteral:   softmax(z W^T) / sqrt(d_gru)  (weights sum to 1/sqrt(d_gru))
//   kPrescaled: softmax(z W^T / sqrt(d_gru))  (weights sum to 1)
enum class AttentionMode { kLiteral, kPrescaled };

std::string to_string(AttentionMode mode);
AttentionMode attention_mode_from_string(const std::string& s);

struct ModelConfig {
  std::size_t music_dim = 36;
  std::size_t pose_dim = 42;
  std::size_t d_model = 64;  // also the GRU hidden size of the style producer
  std::size_t encoder_layers = 2;
  std::size_t heads = 4;
  std::size_t ff_width = 128;
  std::size_t d_z = 16;
  std::size_t vae_hidden = 32;
  std::size_t lstm_hidden = 64;
  std::size_t memory_slots = 8;  // rows of the style memory
  std::size_t conv1_channels = 8;
  std::size_t conv2_channels = 16;
  std::size_t conv_kernel = 3;
  std::size_t conv_stride = 2;
  AttentionMode attention = AttentionMode::kLiteral;

  // Shortest clip the motion encoder accepts.
  static constexpr std::size_t kMinFrames = 16;

  void validate() const;
};

}  // namespace csds

#endif  // CSDS_MODEL_CONFIG_HPP_

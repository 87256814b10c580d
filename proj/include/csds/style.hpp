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
#ifndef CSDS_STYLE_HPP_
#define CSDS_STYLE_HPP_

#include <string>

#include "csds/autograd.hpp"
#include "csds/corpus.hpp"
#include "csds/model_config.hpp"
#include "csds/nn.hpp"

namespace csds {

// Absolute first-order frame difference, (T-1) x 42. Requires T >= 2.
Tensor dynamic_feature(const MotionSequence& motion);
Var dynamic_feature(const Var& poses);

// Attention of a 1 x d motion code over the d_w x d rows of the memory.
Var attend(const Var& code, const Var& memory, AttentionMode mode);
// Weighted sum of memory rows: attn (1 x d_w) times memory (d_w x d).
Var style_embedding(const Var& attn, const Var& memory);

// Pairwise margin loss on two 1 x d embeddings. same_style is Y = 0.
Var contrastive_loss(const Var& ci, const Var& cj, bool same_style, double margin = 1.0);

// Motion encoder (two strided conv layers + GRU) and learnable prototype
// memory. Parameters live under "style.".
class StyleProducer {
 public:
  struct Output {
    Var code;       // 1 x d_model, final GRU state
    Var attention;  // 1 x d_w
    Var embedding;  // 1 x d_model
  };

  StyleProducer() = default;
  StyleProducer(ParameterSet& params, const ModelConfig& config, Rng& rng);

  // `dynamic` is the (T-1) x 42 difference feature.
  Var encode_motion(const Var& dynamic) const;
  Output forward(const Var& poses) const;
  Output forward(const MotionSequence& motion) const;

  const Var& memory() const { return memory_; }

 private:
  ModelConfig config_;
  Var conv1_kernels_, conv1_bias_, conv2_kernels_, conv2_bias_;
  Var gru_input_, gru_hidden_, gru_input_bias_, gru_hidden_bias_;
  Var memory_;
};

}  // namespace csds

#endif  // CSDS_STYLE_HPP_

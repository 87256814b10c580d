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
#ifndef CSDS_MODEL_HPP_
#define CSDS_MODEL_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csds/corpus.hpp"
#include "csds/generator.hpp"
#include "csds/style.hpp"

namespace csds {

// Every trainable component plus its hyperparameters. Parameter groups are
// "encoder", "vae", "generator" and "style".
class DanceModel {
 public:
  static constexpr std::array<const char*, 4> kGroups = {"encoder", "vae", "generator", "style"};

  explicit DanceModel(const ModelConfig& config, std::uint64_t init_seed = 0);
  DanceModel(DanceModel&&) = default;
  DanceModel& operator=(DanceModel&&) = default;
  DanceModel(const DanceModel&) = delete;
  DanceModel& operator=(const DanceModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  const MusicEncoder& encoder() const { return encoder_; }
  const PoseVae& vae() const { return vae_; }
  const DanceGenerator& generator() const { return generator_; }
  const StyleProducer& style() const { return style_; }

  // Tape-free inference helpers; safe to call concurrently.
  struct StyleResult {
    Tensor attention;  // 1 x d_w
    Tensor embedding;  // 1 x d_model
  };
  StyleResult extract_style(const MotionSequence& reference) const;
  // Posterior mean of the pose latent, 1 x d_z.
  Tensor encode_pose(std::span<const double> pose) const;
  Tensor decode_pose(const Tensor& z) const;
  MotionSequence generate(const MusicFeatureSequence& music, const Tensor& style,
                          const Tensor& z_init) const;

 private:
  ModelConfig config_;
  ParameterSet params_;
  MusicEncoder encoder_;
  PoseVae vae_;
  DanceGenerator generator_;
  StyleProducer style_;
};

// Generates consecutive clips, seeding each with the latent of the previous
// clip's last generated pose. The first clip uses `seed_pose` when given,
// otherwise a standard-normal latent drawn from `rng`.
MotionSequence chain_generate(const DanceModel& model, std::span<const MusicFeatureSequence> clips,
                              const Tensor& style, const std::optional<Tensor>& seed_pose, Rng& rng);

}  // namespace csds

#endif  // CSDS_MODEL_HPP_

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
#ifndef CSDS_TRAINING_HPP_
#define CSDS_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "csds/corpus.hpp"
#include "csds/model.hpp"

namespace csds {

struct LossWeights {
  double init_rcon = 1.0;
  double init_kl = 0.1;
  double style = 1.0;

  void validate() const;
};

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  std::size_t contrastive_pairs = 8;
  double margin = 1.0;
  std::size_t crop_frames = 64;
  std::size_t vae_poses_per_clip = 32;
  bool use_contrastive = true;

  void validate() const;
};

// ---- objective -------------------------------------------------------------

struct LossBreakdown {
  double generator_rcon = 0.0;
  double init_rcon = 0.0;
  double init_kl = 0.0;
  double contrastive = 0.0;
  double total = 0.0;
};

// (i, j) index a batch; different_style is Y = 1.
struct ContrastivePair {
  std::size_t i = 0;
  std::size_t j = 0;
  bool different_style = false;

  bool operator==(const ContrastivePair&) const = default;
};

// Half same-style, half different-style pairs when both kinds exist, never
// i == j. With a single style only same-style pairs are drawn and
// `single_style` is set.
std::vector<ContrastivePair> sample_contrastive_pairs(std::span<const int> style_ids,
                                                      std::size_t n_pairs, Rng& rng,
                                                      bool* single_style = nullptr);

// One crop of a clip with all randomness of a loss evaluation fixed, so the
// objective is a deterministic function of the parameters.
struct TrainingExample {
  const ClipRecord* clip = nullptr;
  std::size_t start = 0;
  std::size_t frames = 0;
  std::vector<std::size_t> vae_frames;  // offsets into the crop; [0] == 0
  Tensor vae_noise;                     // vae_frames.size() x d_z
};

struct Batch {
  std::vector<TrainingExample> examples;
  std::vector<ContrastivePair> pairs;
  bool single_style = false;  // contrastive pairs are all same-style
};

Batch make_batch(std::span<const ClipRecord* const> clips, const TrainConfig& config,
                 const ModelConfig& model, Rng& rng);

struct LossResult {
  Var total;
  LossBreakdown parts;
};

LossResult total_loss(const DanceModel& model, const Batch& batch, const LossWeights& weights,
                      bool use_contrastive, double margin = 1.0);

// ---- optimizer -------------------------------------------------------------

struct AdamState {
  std::vector<Tensor> first;
  std::vector<Tensor> second;
  std::uint64_t step = 0;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected adaptive-moment update of `params` in place.
void adam_step(std::span<Var> params, std::span<const Tensor> grads, AdamState& state,
               const AdamConfig& config);

// ---- training loop ---------------------------------------------------------

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown loss;     // mean over the epoch's batches
  std::size_t single_style_batches = 0;
};

// Everything a checkpoint persists.
struct TrainingState {
  DanceModel model;
  TrainConfig config;
  LossWeights weights;
  AdamState optimizer;
  Rng rng;
  std::vector<EpochMetrics> history;
  std::string run_config_json;  // effective configuration echoed by artifacts

  explicit TrainingState(DanceModel m) : model(std::move(m)) {}
};

TrainingState init_training(const ModelConfig& model, const TrainConfig& config,
                            const LossWeights& weights);

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Runs `epochs` more epochs of shuffled mini-batches over `corpus`.
void train_epochs(TrainingState& state, const std::vector<ClipRecord>& corpus, std::size_t epochs,
                  const EpochCallback& on_epoch = {});

TrainingState train(const std::vector<ClipRecord>& corpus, const ModelConfig& model,
                    const TrainConfig& config, const LossWeights& weights,
                    const EpochCallback& on_epoch = {});

// ---- checkpoints -----------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const TrainingState& state);
TrainingState deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const TrainingState& state, const std::string& path);
TrainingState load_checkpoint(const std::string& path);

}  // namespace csds

#endif  // CSDS_TRAINING_HPP_

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
#include "csds/model.hpp"

#include <algorithm>

#include "csds/error.hpp"

namespace csds {

std::string to_string(AttentionMode mode) {
  return mode == AttentionMode::kLiteral ? "literal" : "prescaled";
}

AttentionMode attention_mode_from_string(const std::string& s) {
  if (s == "literal") return AttentionMode::kLiteral;
  if (s == "prescaled") return AttentionMode::kPrescaled;
  throw DataError("unknown attention mode '" + s + "' (expected literal or prescaled)");
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw DataError(std::string("model.") + name + " must be positive");
  };
  positive(music_dim, "music_dim");
  positive(d_model, "d_model");
  positive(encoder_layers, "encoder_layers");
  positive(heads, "heads");
  positive(ff_width, "ff_width");
  positive(d_z, "d_z");
  positive(vae_hidden, "vae_hidden");
  positive(lstm_hidden, "lstm_hidden");
  positive(memory_slots, "memory_slots");
  positive(conv1_channels, "conv1_channels");
  positive(conv2_channels, "conv2_channels");
  positive(conv_kernel, "conv_kernel");
  positive(conv_stride, "conv_stride");
  if (pose_dim != kPoseDim) throw DataError("model.pose_dim must be 42");
  if (d_model % heads != 0) throw DataError("model.d_model must be divisible by model.heads");
}

namespace {

const ModelConfig& checked(const ModelConfig& c) {
  c.validate();
  return c;
}

}  // namespace

DanceModel::DanceModel(const ModelConfig& config, std::uint64_t init_seed)
    : config_(checked(config)) {
  Rng rng(init_seed);
  encoder_ = MusicEncoder(params_, config_, rng);
  vae_ = PoseVae(params_, config_, rng);
  generator_ = DanceGenerator(params_, config_, rng);
  style_ = StyleProducer(params_, config_, rng);
}

DanceModel::StyleResult DanceModel::extract_style(const MotionSequence& reference) const {
  NoGradGuard no_grad;
  auto out = style_.forward(reference);
  return {out.attention.value(), out.embedding.value()};
}

Tensor DanceModel::encode_pose(std::span<const double> pose) const {
  if (pose.size() != config_.pose_dim) {
    throw ShapeError("pose must have " + std::to_string(config_.pose_dim) + " coordinates");
  }
  NoGradGuard no_grad;
  Tensor p({1, pose.size()}, std::vector<double>(pose.begin(), pose.end()));
  auto lat = vae_.encode(constant(std::move(p)), Tensor({1, config_.d_z}, 0.0));
  return lat.mu.value();
}

Tensor DanceModel::decode_pose(const Tensor& z) const {
  NoGradGuard no_grad;
  return vae_.decode(constant(z.reshaped({1, config_.d_z}))).value();
}

MotionSequence DanceModel::generate(const MusicFeatureSequence& music, const Tensor& style,
                                    const Tensor& z_init) const {
  NoGradGuard no_grad;
  Var zm = encoder_.forward(constant(music.frames)).representation;
  Var cond = compose_conditioning(zm, constant(style), constant(z_init));
  return MotionSequence{generator_.forward(cond).value()};
}

MotionSequence chain_generate(const DanceModel& model, std::span<const MusicFeatureSequence> clips,
                              const Tensor& style, const std::optional<Tensor>& seed_pose, Rng& rng) {
  if (clips.empty()) throw DataError("chain_generate needs at least one music clip");
  const std::size_t d_z = model.config().d_z;
  Tensor z_init;
  if (seed_pose) {
    z_init = model.encode_pose(seed_pose->values());
  } else {
    z_init = Tensor({1, d_z});
    for (auto& v : z_init.values()) v = rng.normal();
  }
  std::vector<Tensor> parts;
  std::size_t total = 0;
  for (const auto& clip : clips) {
    MotionSequence part = model.generate(clip, style, z_init);
    const Tensor& p = part.poses;
    z_init = model.encode_pose(std::span<const double>(p.data() + (p.rows() - 1) * p.cols(), p.cols()));
    total += p.rows();
    parts.push_back(std::move(part.poses));
  }
  Tensor out({total, model.config().pose_dim});
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy_n(p.data(), p.size(), out.data() + offset);
    offset += p.size();
  }
  return MotionSequence{std::move(out)};
}

}  // namespace csds

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
#include "csds/config.hpp"

#include <set>

#include "csds/error.hpp"

namespace csds {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const char* section, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw DataError(std::string("config section '") + section + "' must be an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) {
      throw DataError(std::string("unknown config key '") + section + "." + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* section, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    const json& v = j.at(key);
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw DataError("");
    }
    out = v.get<T>();
  } catch (const std::exception&) {
    throw DataError(std::string("config value '") + section + "." + key + "' has the wrong type");
  }
}

}  // namespace

json model_config_to_json(const ModelConfig& c) {
  return {{"music_dim", c.music_dim},         {"pose_dim", c.pose_dim},
          {"d_model", c.d_model},             {"encoder_layers", c.encoder_layers},
          {"heads", c.heads},                 {"ff_width", c.ff_width},
          {"d_z", c.d_z},                     {"vae_hidden", c.vae_hidden},
          {"lstm_hidden", c.lstm_hidden},     {"memory_slots", c.memory_slots},
          {"conv1_channels", c.conv1_channels}, {"conv2_channels", c.conv2_channels},
          {"conv_kernel", c.conv_kernel},     {"conv_stride", c.conv_stride},
          {"attention", to_string(c.attention)}};
}

ModelConfig model_config_from_json(const json& j) {
  reject_unknown(j, "model",
                 {"music_dim", "pose_dim", "d_model", "encoder_layers", "heads", "ff_width", "d_z",
                  "vae_hidden", "lstm_hidden", "memory_slots", "conv1_channels", "conv2_channels",
                  "conv_kernel", "conv_stride", "attention"});
  ModelConfig c;
  read(j, "model", "music_dim", c.music_dim);
  read(j, "model", "pose_dim", c.pose_dim);
  read(j, "model", "d_model", c.d_model);
  read(j, "model", "encoder_layers", c.encoder_layers);
  read(j, "model", "heads", c.heads);
  read(j, "model", "ff_width", c.ff_width);
  read(j, "model", "d_z", c.d_z);
  read(j, "model", "vae_hidden", c.vae_hidden);
  read(j, "model", "lstm_hidden", c.lstm_hidden);
  read(j, "model", "memory_slots", c.memory_slots);
  read(j, "model", "conv1_channels", c.conv1_channels);
  read(j, "model", "conv2_channels", c.conv2_channels);
  read(j, "model", "conv_kernel", c.conv_kernel);
  read(j, "model", "conv_stride", c.conv_stride);
  if (j.contains("attention")) {
    std::string mode;
    read(j, "model", "attention", mode);
    c.attention = attention_mode_from_string(mode);
  }
  c.validate();
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"seed", c.seed},
          {"contrastive_pairs", c.contrastive_pairs},
          {"margin", c.margin},
          {"crop_frames", c.crop_frames},
          {"vae_poses_per_clip", c.vae_poses_per_clip},
          {"use_contrastive", c.use_contrastive}};
}

TrainConfig train_config_from_json(const json& j) {
  reject_unknown(j, "train",
                 {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "epsilon", "seed",
                  "contrastive_pairs", "margin", "crop_frames", "vae_poses_per_clip",
                  "use_contrastive"});
  TrainConfig c;
  read(j, "train", "epochs", c.epochs);
  read(j, "train", "batch_size", c.batch_size);
  read(j, "train", "learning_rate", c.learning_rate);
  read(j, "train", "beta1", c.beta1);
  read(j, "train", "beta2", c.beta2);
  read(j, "train", "epsilon", c.epsilon);
  read(j, "train", "seed", c.seed);
  read(j, "train", "contrastive_pairs", c.contrastive_pairs);
  read(j, "train", "margin", c.margin);
  read(j, "train", "crop_frames", c.crop_frames);
  read(j, "train", "vae_poses_per_clip", c.vae_poses_per_clip);
  read(j, "train", "use_contrastive", c.use_contrastive);
  c.validate();
  return c;
}

json loss_weights_to_json(const LossWeights& w) {
  return {{"init_rcon", w.init_rcon}, {"init_kl", w.init_kl}, {"style", w.style}};
}

LossWeights loss_weights_from_json(const json& j) {
  reject_unknown(j, "loss", {"init_rcon", "init_kl", "style"});
  LossWeights w;
  read(j, "loss", "init_rcon", w.init_rcon);
  read(j, "loss", "init_kl", w.init_kl);
  read(j, "loss", "style", w.style);
  w.validate();
  return w;
}

json synth_config_to_json(const SynthConfig& c) {
  return {{"clips_per_style", c.clips_per_style}, {"frames", c.frames}, {"fps", c.fps},
          {"styles", c.styles}, {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const json& j) {
  reject_unknown(j, "synth", {"clips_per_style", "frames", "fps", "styles", "seed"});
  SynthConfig c;
  read(j, "synth", "clips_per_style", c.clips_per_style);
  read(j, "synth", "frames", c.frames);
  read(j, "synth", "fps", c.fps);
  read(j, "synth", "styles", c.styles);
  read(j, "synth", "seed", c.seed);
  if (c.frames < 16) throw DataError("synth.frames must be at least 16");
  if (c.styles < 1 || c.styles > 3) throw DataError("synth.styles must be 1, 2 or 3");
  if (c.clips_per_style < 1) throw DataError("synth.clips_per_style must be at least 1");
  if (c.fps <= 0) throw DataError("synth.fps must be positive");
  return c;
}

json eval_config_to_json(const EvalConfig& c) {
  return {{"beat_tolerance", c.beat_tolerance},
          {"drop_ratio", c.drop_ratio},
          {"beat_window", c.beat_window},
          {"intensity_window", c.intensity_window},
          {"diversity_samples", c.diversity_samples},
          {"diversity_clips", c.diversity_clips},
          {"seed", c.seed},
          {"threads", c.threads}};
}

EvalConfig eval_config_from_json(const json& j) {
  reject_unknown(j, "eval",
                 {"beat_tolerance", "drop_ratio", "beat_window", "intensity_window",
                  "diversity_samples", "diversity_clips", "seed", "threads"});
  EvalConfig c;
  read(j, "eval", "beat_tolerance", c.beat_tolerance);
  read(j, "eval", "drop_ratio", c.drop_ratio);
  read(j, "eval", "beat_window", c.beat_window);
  read(j, "eval", "intensity_window", c.intensity_window);
  read(j, "eval", "diversity_samples", c.diversity_samples);
  read(j, "eval", "diversity_clips", c.diversity_clips);
  read(j, "eval", "seed", c.seed);
  read(j, "eval", "threads", c.threads);
  c.validate();
  return c;
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  loss.validate();
  eval.validate();
}

json run_config_to_json(const RunConfig& c) {
  return {{"model", model_config_to_json(c.model)},
          {"train", train_config_to_json(c.train)},
          {"loss", loss_weights_to_json(c.loss)},
          {"synth", synth_config_to_json(c.synth)},
          {"eval", eval_config_to_json(c.eval)}};
}

RunConfig merge_run_config(const RunConfig& base, const json& j) {
  reject_unknown(j, "<root>", {"model", "train", "loss", "synth", "eval"});
  json merged = run_config_to_json(base);
  for (const char* section : {"model", "train", "loss", "synth", "eval"}) {
    if (!j.contains(section)) continue;
    const json& over = j.at(section);
    if (!over.is_object()) throw DataError(std::string("config section '") + section + "' must be an object");
    for (const auto& [k, v] : over.items()) merged[section][k] = v;
  }
  RunConfig out;
  out.model = model_config_from_json(merged.at("model"));
  out.train = train_config_from_json(merged.at("train"));
  out.loss = loss_weights_from_json(merged.at("loss"));
  out.synth = synth_config_from_json(merged.at("synth"));
  out.eval = eval_config_from_json(merged.at("eval"));
  return out;
}

RunConfig parse_run_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("config is not valid JSON: ") + e.what());
  }
  return merge_run_config(RunConfig{}, j);
}

}  // namespace csds

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
#include "csds/training.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <numeric>

#include <json.hpp>
#include <zlib.h>

#include "csds/config.hpp"
#include "csds/error.hpp"
#include "csds/io.hpp"

namespace csds {

using nlohmann::json;

void LossWeights::validate() const {
  if (!(init_rcon >= 0) || !(init_kl >= 0) || !(style >= 0)) {
    throw DataError("loss weights must be non-negative");
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw DataError("train.epochs must be at least 1");
  if (batch_size < 1) throw DataError("train.batch_size must be at least 1");
  if (!(learning_rate > 0)) throw DataError("train.learning_rate must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw DataError("train.beta1 and train.beta2 must lie in [0, 1)");
  }
  if (!(epsilon > 0)) throw DataError("train.epsilon must be positive");
  if (!(margin > 0)) throw DataError("train.margin must be positive");
  if (crop_frames < ModelConfig::kMinFrames) {
    throw DataError("train.crop_frames must be at least " + std::to_string(ModelConfig::kMinFrames));
  }
  if (vae_poses_per_clip < 1) throw DataError("train.vae_poses_per_clip must be at least 1");
}

// ---- pairs -----------------------------------------------------------------

std::vector<ContrastivePair> sample_contrastive_pairs(std::span<const int> style_ids,
                                                      std::size_t n_pairs, Rng& rng,
                                                      bool* single_style) {
  if (style_ids.size() < 2) throw DataError("contrastive pairs need a batch of at least 2 clips");
  std::vector<ContrastivePair> same, diff;
  for (std::size_t i = 0; i < style_ids.size(); ++i) {
    for (std::size_t j = i + 1; j < style_ids.size(); ++j) {
      const bool different = style_ids[i] != style_ids[j];
      (different ? diff : same).push_back({i, j, different});
    }
  }
  if (single_style) *single_style = diff.empty();
  std::size_t n_diff = n_pairs / 2;
  std::size_t n_same = n_pairs - n_diff;
  if (diff.empty()) {
    n_same = n_pairs;
    n_diff = 0;
  } else if (same.empty()) {
    n_diff = n_pairs;
    n_same = 0;
  }
  std::vector<ContrastivePair> out;
  out.reserve(n_pairs);
  for (std::size_t k = 0; k < n_same; ++k) out.push_back(same[rng.index(same.size())]);
  for (std::size_t k = 0; k < n_diff; ++k) out.push_back(diff[rng.index(diff.size())]);
  return out;
}

// ---- objective -------------------------------------------------------------

namespace {

Tensor crop_rows(const Tensor& m, std::size_t start, std::size_t n) {
  Tensor out({n, m.cols()});
  std::copy_n(m.data() + start * m.cols(), n * m.cols(), out.data());
  return out;
}

}  // namespace

Batch make_batch(std::span<const ClipRecord* const> clips, const TrainConfig& config,
                 const ModelConfig& model, Rng& rng) {
  if (clips.empty()) throw DataError("empty batch");
  Batch batch;
  std::vector<int> styles;
  for (const ClipRecord* clip : clips) {
    TrainingExample ex;
    ex.clip = clip;
    const std::size_t t_len = clip->music.length();
    ex.frames = std::min(config.crop_frames, t_len);
    ex.start = rng.index(t_len - ex.frames + 1);
    ex.vae_frames.push_back(0);
    for (std::size_t k = 1; k < config.vae_poses_per_clip; ++k) {
      ex.vae_frames.push_back(rng.index(ex.frames));
    }
    ex.vae_noise = Tensor::randn({ex.vae_frames.size(), model.d_z}, rng);
    styles.push_back(clip->style.id);
    batch.examples.push_back(std::move(ex));
  }
  if (config.use_contrastive && clips.size() >= 2) {
    const std::size_t n = config.contrastive_pairs ? config.contrastive_pairs : clips.size();
    batch.pairs = sample_contrastive_pairs(styles, n, rng, &batch.single_style);
  }
  return batch;
}

LossResult total_loss(const DanceModel& model, const Batch& batch, const LossWeights& weights,
                      bool use_contrastive, double margin) {
  if (batch.examples.empty()) throw DataError("empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.examples.size());

  std::vector<Var> gen_terms, rcon_terms, kl_terms, embeddings;
  for (const TrainingExample& ex : batch.examples) {
    const ClipRecord& clip = *ex.clip;
    Var music = constant(crop_rows(clip.music.frames, ex.start, ex.frames));
    const Tensor target = crop_rows(clip.motion.poses, ex.start, ex.frames);
    Var poses = constant(target);

    Var zm = model.encoder().forward(music).representation;
    Var c = model.style().forward(poses).embedding;
    embeddings.push_back(c);

    Var sampled = gather_rows(poses, ex.vae_frames);
    auto latent = model.vae().encode(sampled, ex.vae_noise);
    Var recon = model.vae().decode(latent.sample);
    // L1 summed over coordinates, averaged over poses / frames.
    rcon_terms.push_back(scale(sum(abs(sub(recon, sampled))),
                               1.0 / static_cast<double>(ex.vae_frames.size())));
    kl_terms.push_back(kl_loss(latent.mu, latent.logvar));

    Var cond = compose_conditioning(zm, c, row(latent.sample, 0));
    Var generated = model.generator().forward(cond);
    gen_terms.push_back(scale(sum(abs(sub(generated, poses))), 1.0 / static_cast<double>(ex.frames)));
  }

  auto average = [&](const std::vector<Var>& terms) {
    Var acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc = add(acc, terms[i]);
    return scale(acc, inv_n);
  };

  LossResult out;
  Var l_gen = average(gen_terms);
  Var l_rcon = average(rcon_terms);
  Var l_kl = average(kl_terms);
  out.parts.generator_rcon = l_gen.item();
  out.parts.init_rcon = l_rcon.item();
  out.parts.init_kl = l_kl.item();
  Var total = add(add(l_gen, scale(l_rcon, weights.init_rcon)), scale(l_kl, weights.init_kl));
  if (use_contrastive && !batch.pairs.empty()) {
    Var acc;
    for (const auto& p : batch.pairs) {
      Var term = contrastive_loss(embeddings.at(p.i), embeddings.at(p.j), !p.different_style, margin);
      acc = acc ? add(acc, term) : term;
    }
    Var l_c = scale(acc, 1.0 / static_cast<double>(batch.pairs.size()));
    out.parts.contrastive = l_c.item();
    total = add(total, scale(l_c, weights.style));
  }
  out.parts.total = total.item();
  out.total = total;
  return out;
}

// ---- optimizer -------------------------------------------------------------

void adam_step(std::span<Var> params, std::span<const Tensor> grads, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grads.size()) {
    throw ShapeError("adam: " + std::to_string(params.size()) + " parameters but " +
                     std::to_string(grads.size()) + " gradients");
  }
  if (state.first.empty()) {
    for (const auto& p : params) {
      state.first.emplace_back(p.shape(), 0.0);
      state.second.emplace_back(p.shape(), 0.0);
    }
  }
  if (state.first.size() != params.size()) throw ShapeError("adam: state does not match parameters");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (grads[k].shape() != params[k].shape() || state.first[k].shape() != params[k].shape()) {
      throw ShapeError("adam: gradient " + shape_string(grads[k].shape()) +
                       " does not match parameter " + shape_string(params[k].shape()));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& w = params[k].mutable_value();
    Tensor& m = state.first[k];
    Tensor& v = state.second[k];
    const Tensor& g = grads[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      w[i] -= config.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.epsilon);
    }
  }
}

// ---- training loop ---------------------------------------------------------

TrainingState init_training(const ModelConfig& model, const TrainConfig& config,
                            const LossWeights& weights) {
  config.validate();
  weights.validate();
  TrainingState state(DanceModel(model, config.seed));
  state.config = config;
  state.weights = weights;
  state.rng = Rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  return state;
}

void train_epochs(TrainingState& state, const std::vector<ClipRecord>& corpus, std::size_t epochs,
                  const EpochCallback& on_epoch) {
  if (corpus.empty()) throw DataError("training corpus is empty");
  for (const auto& clip : corpus) {
    if (clip.music.length() < ModelConfig::kMinFrames) {
      throw DataError("clip '" + clip.id + "' is shorter than " +
                      std::to_string(ModelConfig::kMinFrames) + " frames");
    }
    if (clip.music.channels() != state.model.config().music_dim) {
      throw DataError("clip '" + clip.id + "' has " + std::to_string(clip.music.channels()) +
                      " music channels, model expects " +
                      std::to_string(state.model.config().music_dim));
    }
  }
  const TrainConfig& cfg = state.config;
  const AdamConfig adam{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};
  std::vector<Var> params = state.model.params().vars();
  std::vector<std::size_t> order(corpus.size());

  for (std::size_t e = 0; e < epochs; ++e) {
    const std::size_t epoch = state.history.size() + 1;
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[state.rng.index(i)]);

    // Batches in shuffled order; a trailing singleton joins the previous one.
    std::vector<std::vector<const ClipRecord*>> batches;
    for (std::size_t i = 0; i < order.size(); i += cfg.batch_size) {
      std::vector<const ClipRecord*> b;
      for (std::size_t k = i; k < std::min(order.size(), i + cfg.batch_size); ++k) {
        b.push_back(&corpus[order[k]]);
      }
      if (b.size() == 1 && !batches.empty()) {
        batches.back().push_back(b[0]);
      } else {
        batches.push_back(std::move(b));
      }
    }

    EpochMetrics metrics;
    metrics.epoch = epoch;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      try {
        Batch batch = make_batch(batches[bi], cfg, state.model.config(), state.rng);
        LossResult loss = total_loss(state.model, batch, state.weights, cfg.use_contrastive, cfg.margin);
        state.model.params().zero_grad();
        backward(loss.total);
        std::vector<Tensor> grads;
        grads.reserve(params.size());
        for (const auto& p : params) grads.push_back(p.grad());
        adam_step(params, grads, state.optimizer, adam);
        if (batch.single_style) ++metrics.single_style_batches;
        metrics.loss.generator_rcon += loss.parts.generator_rcon;
        metrics.loss.init_rcon += loss.parts.init_rcon;
        metrics.loss.init_kl += loss.parts.init_kl;
        metrics.loss.contrastive += loss.parts.contrastive;
        metrics.loss.total += loss.parts.total;
      } catch (const IoError&) {
        throw;
      } catch (const Error& err) {
        throw DataError("epoch " + std::to_string(epoch) + " batch " + std::to_string(bi + 1) +
                        ": " + err.what());
      }
    }
    const double inv = 1.0 / static_cast<double>(batches.size());
    metrics.loss.generator_rcon *= inv;
    metrics.loss.init_rcon *= inv;
    metrics.loss.init_kl *= inv;
    metrics.loss.contrastive *= inv;
    metrics.loss.total *= inv;
    if (metrics.single_style_batches > 0) {
      std::fprintf(stderr, "warning: epoch %zu: %zu single-style batches, contrastive pairs are all same-style\n",
                   epoch, metrics.single_style_batches);
    }
    state.model.params().zero_grad();
    state.history.push_back(metrics);
    if (on_epoch) on_epoch(metrics);
  }
}

TrainingState train(const std::vector<ClipRecord>& corpus, const ModelConfig& model,
                    const TrainConfig& config, const LossWeights& weights,
                    const EpochCallback& on_epoch) {
  TrainingState state = init_training(model, config, weights);
  train_epochs(state, corpus, config.epochs, on_epoch);
  return state;
}

// ---- checkpoints -----------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'C', 'S', 'D', 'S'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(std::string_view bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

std::uint32_t crc_of(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

json breakdown_json(const LossBreakdown& b) {
  return {{"generator_rcon", b.generator_rcon}, {"init_rcon", b.init_rcon},
          {"init_kl", b.init_kl}, {"contrastive", b.contrastive}, {"total", b.total}};
}

LossBreakdown breakdown_from(const json& j) {
  LossBreakdown b;
  b.generator_rcon = j.at("generator_rcon").get<double>();
  b.init_rcon = j.at("init_rcon").get<double>();
  b.init_kl = j.at("init_kl").get<double>();
  b.contrastive = j.at("contrastive").get<double>();
  b.total = j.at("total").get<double>();
  return b;
}

}  // namespace

std::string serialize_checkpoint(const TrainingState& state) {
  const ParameterSet& params = state.model.params();
  json tensors = json::array();
  std::vector<const Tensor*> payload;
  std::size_t offset = 0;
  auto add_tensor = [&](const std::string& name, const Tensor& t) {
    tensors.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.size();
    payload.push_back(&t);
  };
  for (std::size_t i = 0; i < params.size(); ++i) add_tensor(params.names()[i], params.vars()[i].value());
  const bool has_moments = !state.optimizer.first.empty();
  if (has_moments) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      add_tensor("adam.first/" + params.names()[i], state.optimizer.first[i]);
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      add_tensor("adam.second/" + params.names()[i], state.optimizer.second[i]);
    }
  }

  json history = json::array();
  for (const auto& h : state.history) {
    history.push_back({{"epoch", h.epoch}, {"loss", breakdown_json(h.loss)}});
  }
  json header = {
      {"format", "csds-checkpoint"},
      {"model", model_config_to_json(state.model.config())},
      {"train", train_config_to_json(state.config)},
      {"loss_weights", loss_weights_to_json(state.weights)},
      {"init", {{"weights", "xavier_uniform"}, {"biases", "zeros"}}},
      {"optimizer", {{"kind", "adam"}, {"step", state.optimizer.step}, {"has_moments", has_moments}}},
      {"rng", state.rng.state()},
      {"history", history},
      {"tensors", tensors},
      {"payload_values", offset},
  };
  if (!state.run_config_json.empty()) header["run_config"] = json::parse(state.run_config_json);
  const std::string header_text = header.dump();

  std::string out(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u64(out, header_text.size());
  out += header_text;
  out.reserve(out.size() + offset * 8 + 4);
  for (const Tensor* t : payload) {
    for (double v : t->values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  put_u32(out, crc_of(out));
  return out;
}

TrainingState deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 + 4 + 8 + 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a checkpoint file (bad magic bytes)");
  }
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint64_t header_len = get_le(bytes, 8, 8);
  if (header_len > bytes.size() - 20) throw FormatError("checkpoint truncated in header");
  const std::size_t body_end = bytes.size() - 4;
  const auto stored_crc = static_cast<std::uint32_t>(get_le(bytes, body_end, 4));
  if (crc_of(bytes.substr(0, body_end)) != stored_crc) {
    throw FormatError("checkpoint checksum mismatch (file corrupted or truncated)");
  }

  json header;
  try {
    header = json::parse(bytes.substr(16, header_len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  const std::size_t payload_begin = 16 + header_len;
  const std::size_t n_values = header.at("payload_values").get<std::size_t>();
  if (payload_begin + n_values * 8 != body_end) throw FormatError("checkpoint payload size mismatch");

  auto read_tensor = [&](const json& entry) {
    Shape shape = entry.at("shape").get<Shape>();
    const std::size_t off = entry.at("offset").get<std::size_t>();
    std::vector<double> values(shape_numel(shape));
    if (off + values.size() > n_values) throw FormatError("tensor extends past payload");
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = std::bit_cast<double>(get_le(bytes, payload_begin + (off + i) * 8, 8));
    }
    return Tensor(std::move(shape), std::move(values));
  };

  try {
    TrainingState state(DanceModel(model_config_from_json(header.at("model"))));
    state.config = train_config_from_json(header.at("train"));
    state.weights = loss_weights_from_json(header.at("loss_weights"));
    state.rng.restore(header.at("rng").get<std::string>());
    for (const auto& h : header.at("history")) {
      state.history.push_back({h.at("epoch").get<std::size_t>(), breakdown_from(h.at("loss"))});
    }
    if (header.contains("run_config")) state.run_config_json = header.at("run_config").dump();

    ParameterSet& params = state.model.params();
    std::map<std::string, const json*> directory;
    for (const auto& entry : header.at("tensors")) {
      directory[entry.at("name").get<std::string>()] = &entry;
    }
    auto lookup = [&](const std::string& name) -> const json& {
      auto it = directory.find(name);
      if (it == directory.end()) throw FormatError("checkpoint is missing tensor '" + name + "'");
      return *it->second;
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor t = read_tensor(lookup(params.names()[i]));
      if (t.shape() != params.vars()[i].shape()) {
        throw FormatError("tensor '" + params.names()[i] + "' has shape " + shape_string(t.shape()) +
                          ", model expects " + shape_string(params.vars()[i].shape()));
      }
      Var v = params.vars()[i];
      v.mutable_value() = std::move(t);
    }
    const json& opt = header.at("optimizer");
    state.optimizer.step = opt.at("step").get<std::uint64_t>();
    if (opt.at("has_moments").get<bool>()) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        state.optimizer.first.push_back(read_tensor(lookup("adam.first/" + params.names()[i])));
        state.optimizer.second.push_back(read_tensor(lookup("adam.second/" + params.names()[i])));
      }
    }
    return state;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  }
}

void save_checkpoint(const TrainingState& state, const std::string& path) {
  write_file_atomic(path, serialize_checkpoint(state));
}

TrainingState load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace csds

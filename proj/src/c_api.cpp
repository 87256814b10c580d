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
#include "csds/csds.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include <json.hpp>

#include "csds/config.hpp"
#include "csds/error.hpp"
#include "csds/io.hpp"
#include "csds/report.hpp"
#include "csds/training.hpp"

using nlohmann::json;

struct csds_model {
  csds::TrainingState state;
  csds::RunConfig run_config;
};

namespace {

constexpr const char* kVersion = "1.0.0";

thread_local std::string g_last_error;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Maps the exception hierarchy onto status codes.
template <typename F>
csds_status guarded(F&& body) noexcept {
  g_last_error.clear();
  try {
    body();
    return CSDS_OK;
  } catch (const UsageError& e) {
    g_last_error = e.what();
    return CSDS_ERR_USAGE;
  } catch (const csds::IoError& e) {  // includes FormatError
    g_last_error = e.what();
    return CSDS_ERR_IO;
  } catch (const csds::Error& e) {
    g_last_error = e.what();
    return CSDS_ERR_DATA;
  } catch (const json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return CSDS_ERR_DATA;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CSDS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CSDS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return CSDS_ERR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw UsageError(std::string(name) + " must not be null");
}

json parse_json(const char* text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw csds::DataError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

csds::RunConfig run_config_from(const char* text) {
  if (text == nullptr || *text == '\0') return csds::RunConfig{};
  return csds::parse_run_config(text);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// The model's own configuration with the caller's eval section on top. The
// caller's other sections are validated but otherwise ignored: a trained
// model fixes them.
csds::RunConfig eval_config_for(const csds_model* model, const char* config_json) {
  if (config_json == nullptr || *config_json == '\0') return model->run_config;
  const json over = parse_json(config_json, "config");
  csds::merge_run_config(csds::RunConfig{}, over);
  json eval_only = json::object();
  if (over.contains("eval")) eval_only["eval"] = over.at("eval");
  return csds::merge_run_config(model->run_config, eval_only);
}

json artifact_header(const char* command, const csds::RunConfig& rc) {
  return {{"command", command}, {"version", kVersion}, {"config", csds::run_config_to_json(rc)}};
}

std::vector<double> row_of(const csds::Tensor& t) { return t.vec(); }

}  // namespace

extern "C" {

const char* csds_version(void) { return kVersion; }

const char* csds_last_error(void) { return g_last_error.c_str(); }

void csds_string_free(char* s) { std::free(s); }

csds_status csds_config_effective(const char* config_json, char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    *out_json = dup_string(csds::run_config_to_json(run_config_from(config_json)).dump(2));
  });
}

csds_status csds_synth_corpus(const char* config_json, const char* out_path) {
  return guarded([&] {
    require(out_path, "out_path");
    const csds::RunConfig rc = run_config_from(config_json);
    const auto clips = csds::synth_corpus(rc.synth);
    json header = artifact_header("synth-data", rc);
    csds::save_corpus(clips, out_path, header.dump());
  });
}

csds_status csds_train(const char* corpus_path, const char* config_json, const char* resume_path,
                       const char* out_path, csds_epoch_fn on_epoch, void* user) {
  return guarded([&] {
    require(corpus_path, "corpus_path");
    require(out_path, "out_path");
    csds::RunConfig rc = run_config_from(config_json);
    const auto corpus = csds::load_corpus(corpus_path, rc.model.music_dim);
    const std::size_t epochs = rc.train.epochs;

    std::optional<csds::TrainingState> state;
    if (resume_path != nullptr && *resume_path != '\0') {
      state.emplace(csds::load_checkpoint(resume_path));
      if (!state->run_config_json.empty()) {
        rc = csds::merge_run_config(csds::RunConfig{}, json::parse(state->run_config_json));
      }
      rc.train.epochs = state->history.size() + epochs;
    } else {
      state.emplace(csds::init_training(rc.model, rc.train, rc.loss));
    }
    state->config.epochs = rc.train.epochs;
    state->run_config_json = csds::run_config_to_json(rc).dump();
    csds::train_epochs(*state, corpus, epochs, [&](const csds::EpochMetrics& m) {
      if (on_epoch) on_epoch(m.epoch, m.loss.total, user);
    });
    csds::save_checkpoint(*state, out_path);
  });
}

csds_status csds_model_load(const char* checkpoint_path, csds_model** out) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    *out = nullptr;
    csds::TrainingState state = csds::load_checkpoint(checkpoint_path);
    csds::RunConfig rc;
    if (!state.run_config_json.empty()) {
      rc = csds::merge_run_config(csds::RunConfig{}, json::parse(state.run_config_json));
    } else {
      rc.model = state.model.config();
      rc.train = state.config;
      rc.loss = state.weights;
    }
    *out = new csds_model{std::move(state), rc};
  });
}

void csds_model_free(csds_model* model) { delete model; }

csds_status csds_model_info(const csds_model* model, char** out_json) {
  return guarded([&] {
    require(model, "model");
    require(out_json, "out_json");
    json history = json::array();
    for (const auto& m : model->state.history) {
      history.push_back({{"epoch", m.epoch},
                         {"total", m.loss.total},
                         {"generator_rcon", m.loss.generator_rcon},
                         {"init_rcon", m.loss.init_rcon},
                         {"init_kl", m.loss.init_kl},
                         {"contrastive", m.loss.contrastive}});
    }
    const json info = {{"model", csds::model_config_to_json(model->state.model.config())},
                       {"train", csds::train_config_to_json(model->state.config)},
                       {"loss_weights", csds::loss_weights_to_json(model->state.weights)},
                       {"parameters", model->state.model.params().scalar_count()},
                       {"history", history},
                       {"run_config", csds::run_config_to_json(model->run_config)}};
    *out_json = dup_string(info.dump(2));
  });
}

csds_status csds_embed(const csds_model* model, const char* corpus_path, const char* clip_id,
                       const char* out_path) {
  return guarded([&] {
    require(model, "model");
    require(corpus_path, "corpus_path");
    require(clip_id, "clip_id");
    require(out_path, "out_path");
    const auto corpus = csds::load_corpus(corpus_path, model->state.model.config().music_dim);
    const csds::ClipRecord& clip = csds::find_clip(corpus, clip_id);
    const auto style = model->state.model.extract_style(clip.motion);
    const json out = {{"clip", clip.id},
                      {"style", clip.style.name},
                      {"attn", row_of(style.attention)},
                      {"embedding", row_of(style.embedding)},
                      {"config", csds::run_config_to_json(model->run_config)}};
    csds::write_file_atomic(out_path, out.dump() + "\n");
  });
}

csds_status csds_generate(const csds_model* model, const char* music_path,
                          const char* style_corpus_path, const char* style_clip_id,
                          const char* style_file, uint64_t seed, const char* out_path) {
  return guarded([&] {
    require(model, "model");
    require(music_path, "music_path");
    require(out_path, "out_path");
    const bool by_clip = style_clip_id != nullptr && *style_clip_id != '\0';
    const bool by_file = style_file != nullptr && *style_file != '\0';
    if (by_clip == by_file) throw UsageError("give exactly one of a style clip id or a style file");

    const csds::DanceModel& dm = model->state.model;
    const std::size_t music_dim = dm.config().music_dim;
    const auto music = csds::load_corpus(music_path, music_dim);
    if (music.empty()) throw csds::DataError(std::string("no music records in ") + music_path);

    csds::Tensor style;
    std::string style_name;
    json style_source;
    if (by_clip) {
      const std::string src = (style_corpus_path && *style_corpus_path) ? style_corpus_path : music_path;
      const auto refs = src == music_path ? music : csds::load_corpus(src, music_dim);
      const csds::ClipRecord& ref = csds::find_clip(refs, style_clip_id);
      style = dm.extract_style(ref.motion).embedding;
      style_name = ref.style.name;
      style_source = {{"clip", ref.id}, {"corpus", src}};
    } else {
      const json j = parse_json(csds::read_file(style_file).c_str(), style_file);
      if (!j.contains("embedding") || !j.at("embedding").is_array()) {
        throw csds::DataError(std::string(style_file) + " has no 'embedding' array");
      }
      const auto values = j.at("embedding").get<std::vector<double>>();
      if (values.size() != dm.config().d_model) {
        throw csds::DataError(std::string(style_file) + ": embedding has " +
                              std::to_string(values.size()) + " values, model expects " +
                              std::to_string(dm.config().d_model));
      }
      style = csds::Tensor::row(values);
      style_name = j.value("style", std::string("generated"));
      style_source = {{"file", style_file}};
    }

    std::vector<csds::MusicFeatureSequence> clips;
    for (const auto& c : music) clips.push_back(c.music);
    csds::Rng rng(seed);
    const csds::MotionSequence dance = csds::chain_generate(dm, clips, style, std::nullopt, rng);

    std::vector<csds::ClipRecord> out;
    std::size_t offset = 0;
    for (const auto& c : music) {
      csds::ClipRecord r;
      r.id = c.id;
      r.style = {style_name, 0};
      r.music = c.music;
      const std::size_t t = c.music.length(), d = dance.poses.cols();
      std::vector<double> poses(dance.poses.data() + offset * d, dance.poses.data() + (offset + t) * d);
      r.motion.poses = csds::Tensor({t, d}, std::move(poses));
      offset += t;
      out.push_back(std::move(r));
    }
    json header = artifact_header("generate", model->run_config);
    header["seed"] = seed;
    header["style_from"] = style_source;
    csds::save_corpus(out, out_path, header.dump());
  });
}

csds_status csds_evaluate(const csds_model* model, const char* corpus_path, const char* config_json,
                          const char* report_path) {
  return guarded([&] {
    require(model, "model");
    require(corpus_path, "corpus_path");
    require(report_path, "report_path");
    const csds::RunConfig rc = eval_config_for(model, config_json);
    const auto corpus = csds::load_corpus(corpus_path, model->state.model.config().music_dim);
    const csds::MetricReport report = csds::evaluate_model(model->state.model, corpus, rc.eval);
    json j = csds::report_to_json(report);
    j["config"] = csds::run_config_to_json(rc);
    csds::write_file_atomic(report_path, j.dump(2) + "\n");
  });
}

csds_status csds_pca(const csds_model* model, const char* corpus_path, const char* config_json,
                     const char* out_path) {
  return guarded([&] {
    require(model, "model");
    require(corpus_path, "corpus_path");
    require(out_path, "out_path");
    const csds::RunConfig rc = eval_config_for(model, config_json);
    const auto corpus = csds::load_corpus(corpus_path, model->state.model.config().music_dim);
    if (corpus.size() < 3) throw csds::DataError("pca needs at least 3 clips");
    const auto embeddings = csds::clip_embeddings(model->state.model, corpus, rc.eval.threads);
    std::vector<std::string> labels;
    for (const auto& c : corpus) labels.push_back(c.style.name);
    const csds::PcaProjection pca = csds::pca_2d(embeddings, labels);
    if (ends_with(out_path, ".csv")) {
      csds::write_file_atomic(out_path, csds::pca_to_csv(pca));
    } else {
      json j = csds::pca_to_json(pca);
      j["config"] = csds::run_config_to_json(rc);
      csds::write_file_atomic(out_path, j.dump(2) + "\n");
    }
  });
}

}  // extern "C"

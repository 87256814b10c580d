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
// csds: command-line front end over the C API.
//
// Exit codes: 0 success, 1 usage, 2 data/validation, 3 I/O, 4 internal.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "csds/csds.h"

using nlohmann::json;

namespace {

const char* kind_of(int code) {
  switch (code) {
    case CSDS_ERR_USAGE: return "usage";
    case CSDS_ERR_DATA: return "data";
    case CSDS_ERR_IO: return "io";
    default: return "internal";
  }
}

int report_error(int code, const std::string& message) {
  const json err = {{"error", kind_of(code)}, {"code", code}, {"message", message}};
  std::cerr << err.dump() << "\n";
  return code;
}

int check(csds_status status) {
  if (status == CSDS_OK) return 0;
  return report_error(status, csds_last_error());
}

struct CliFailure {
  int code;
  std::string message;
};

// --config file contents, or an empty object.
json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw CliFailure{CSDS_ERR_IO, "cannot open config " + path};
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    json j = json::parse(buf.str());
    if (!j.is_object()) throw CliFailure{CSDS_ERR_DATA, "config " + path + " is not a JSON object"};
    return j;
  } catch (const json::exception& e) {
    throw CliFailure{CSDS_ERR_DATA, "config " + path + " is not valid JSON: " + e.what()};
  }
}

template <typename T>
void override_if(json& cfg, const char* section, const char* key, const std::optional<T>& v) {
  if (v) cfg[section][key] = *v;
}

struct Model {
  csds_model* handle = nullptr;
  ~Model() { csds_model_free(handle); }
};

void on_epoch(size_t epoch, double total, void* user) {
  if (*static_cast<bool*>(user)) return;
  std::fprintf(stderr, "epoch %zu  loss %.6f\n", epoch, total);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Style-controllable music-to-dance synthesis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(csds_version()));

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "Write a synthetic NDJSON corpus");
  std::string synth_config, synth_out;
  std::optional<std::size_t> synth_styles, synth_clips, synth_frames;
  std::optional<int> synth_fps;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--config", synth_config, "JSON config file");
  synth->add_option("--styles", synth_styles, "Number of styles (1-3)");
  synth->add_option("--clips-per-style", synth_clips, "Clips per style");
  synth->add_option("--frames", synth_frames, "Frames per clip");
  synth->add_option("--fps", synth_fps, "Frame rate");
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--out", synth_out, "Output corpus")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  std::string train_corpus, train_config, train_out, train_resume;
  std::optional<std::size_t> train_epochs;
  std::optional<std::uint64_t> train_seed;
  bool no_contrastive = false, quiet = false;
  train->add_option("--corpus", train_corpus, "Training corpus")->required();
  train->add_option("--config", train_config, "JSON config file");
  train->add_option("--out", train_out, "Output checkpoint")->required();
  train->add_option("--epochs", train_epochs, "Epochs to run");
  train->add_option("--seed", train_seed, "Random seed");
  train->add_option("--resume", train_resume, "Continue from this checkpoint");
  train->add_flag("--no-contrastive", no_contrastive, "Drop the contrastive style loss");
  train->add_flag("--quiet", quiet, "No per-epoch progress");

  // generate
  auto* gen = app.add_subcommand("generate", "Dance to music in a given style");
  std::string gen_model, gen_music, gen_style_from, gen_style_corpus, gen_style_file, gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("--model", gen_model, "Checkpoint")->required();
  gen->add_option("--music", gen_music, "Music NDJSON (corpus schema)")->required();
  auto* style_from = gen->add_option("--style-from", gen_style_from, "Reference clip id");
  gen->add_option("--style-corpus", gen_style_corpus, "Corpus holding the reference clip")
      ->needs(style_from);
  auto* style_file = gen->add_option("--style-file", gen_style_file, "Embedding JSON from embed");
  style_from->excludes(style_file);
  gen->add_option("--seed", gen_seed, "Random seed for the initial latent");
  gen->add_option("--out", gen_out, "Output motion NDJSON")->required();

  // embed
  auto* embed = app.add_subcommand("embed", "Style embedding of one clip");
  std::string emb_model, emb_clip, emb_corpus, emb_out;
  embed->add_option("--model", emb_model, "Checkpoint")->required();
  embed->add_option("--clip", emb_clip, "Clip id")->required();
  embed->add_option("--corpus", emb_corpus, "Corpus")->required();
  embed->add_option("--out", emb_out, "Output JSON")->required();

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Compute the metric report");
  std::string ev_model, ev_corpus, ev_report, ev_config;
  std::optional<std::uint64_t> ev_seed;
  std::optional<std::size_t> ev_threads;
  eval->add_option("--model", ev_model, "Checkpoint")->required();
  eval->add_option("--corpus", ev_corpus, "Evaluation corpus")->required();
  eval->add_option("--report", ev_report, "Output report JSON")->required();
  eval->add_option("--config", ev_config, "JSON config file");
  eval->add_option("--seed", ev_seed, "Random seed");
  eval->add_option("--threads", ev_threads, "Worker threads");

  // pca
  auto* pca = app.add_subcommand("pca", "2-D PCA of clip style embeddings");
  std::string pca_model, pca_corpus, pca_out, pca_config;
  std::optional<std::size_t> pca_threads;
  pca->add_option("--model", pca_model, "Checkpoint")->required();
  pca->add_option("--corpus", pca_corpus, "Corpus")->required();
  pca->add_option("--out", pca_out, "Output (.json or .csv)")->required();
  pca->add_option("--config", pca_config, "JSON config file");
  pca->add_option("--threads", pca_threads, "Worker threads");

  if (argc <= 1) {
    std::cerr << app.help();
    return CSDS_ERR_USAGE;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return CSDS_ERR_USAGE;
  }

  try {
    if (*synth) {
      json cfg = load_config(synth_config);
      override_if(cfg, "synth", "styles", synth_styles);
      override_if(cfg, "synth", "clips_per_style", synth_clips);
      override_if(cfg, "synth", "frames", synth_frames);
      override_if(cfg, "synth", "fps", synth_fps);
      override_if(cfg, "synth", "seed", synth_seed);
      return check(csds_synth_corpus(cfg.dump().c_str(), synth_out.c_str()));
    }
    if (*train) {
      json cfg = load_config(train_config);
      override_if(cfg, "train", "epochs", train_epochs);
      override_if(cfg, "train", "seed", train_seed);
      if (no_contrastive) cfg["train"]["use_contrastive"] = false;
      return check(csds_train(train_corpus.c_str(), cfg.dump().c_str(),
                              train_resume.empty() ? nullptr : train_resume.c_str(),
                              train_out.c_str(), on_epoch, &quiet));
    }

    Model model;
    const std::string& path = *gen ? gen_model : *embed ? emb_model : *eval ? ev_model : pca_model;
    if (int rc = check(csds_model_load(path.c_str(), &model.handle))) return rc;

    if (*gen) {
      if (gen_style_from.empty() && gen_style_file.empty()) {
        return report_error(CSDS_ERR_USAGE, "generate needs --style-from or --style-file");
      }
      return check(csds_generate(model.handle, gen_music.c_str(),
                                 gen_style_corpus.empty() ? nullptr : gen_style_corpus.c_str(),
                                 gen_style_from.empty() ? nullptr : gen_style_from.c_str(),
                                 gen_style_file.empty() ? nullptr : gen_style_file.c_str(), gen_seed,
                                 gen_out.c_str()));
    }
    if (*embed) {
      return check(csds_embed(model.handle, emb_corpus.c_str(), emb_clip.c_str(), emb_out.c_str()));
    }
    if (*eval) {
      json cfg = load_config(ev_config);
      override_if(cfg, "eval", "seed", ev_seed);
      override_if(cfg, "eval", "threads", ev_threads);
      return check(csds_evaluate(model.handle, ev_corpus.c_str(), cfg.dump().c_str(), ev_report.c_str()));
    }
    if (*pca) {
      json cfg = load_config(pca_config);
      override_if(cfg, "eval", "threads", pca_threads);
      return check(csds_pca(model.handle, pca_corpus.c_str(), cfg.dump().c_str(), pca_out.c_str()));
    }
  } catch (const CliFailure& f) {
    return report_error(f.code, f.message);
  }
  return CSDS_ERR_USAGE;
}

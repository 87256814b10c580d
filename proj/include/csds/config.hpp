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
#ifndef CSDS_CONFIG_HPP_
#define CSDS_CONFIG_HPP_

#include <string>

#include <json.hpp>

#include "csds/corpus.hpp"
#include "csds/evaluation.hpp"
#include "csds/model_config.hpp"
#include "csds/training.hpp"

namespace csds {

// The one JSON document every subcommand reads. Sections and keys are all
// optional; unknown keys and out-of-range values are rejected.
//
//   {"model": {...}, "train": {...}, "loss": {...}, "synth": {...}, "eval": {...}}
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  LossWeights loss;
  SynthConfig synth;
  EvalConfig eval;

  void validate() const;
};

nlohmann::json model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json loss_weights_to_json(const LossWeights& w);
LossWeights loss_weights_from_json(const nlohmann::json& j);
nlohmann::json synth_config_to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json eval_config_to_json(const EvalConfig& c);
EvalConfig eval_config_from_json(const nlohmann::json& j);

nlohmann::json run_config_to_json(const RunConfig& c);
// Values in `j` override `base`.
RunConfig merge_run_config(const RunConfig& base, const nlohmann::json& j);
RunConfig parse_run_config(const std::string& text);

}  // namespace csds

#endif  // CSDS_CONFIG_HPP_

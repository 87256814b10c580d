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
#ifndef CSDS_REPORT_HPP_
#define CSDS_REPORT_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "csds/evaluation.hpp"
#include "csds/model.hpp"
#include "csds/rng.hpp"

namespace csds {

// Runs fn(0..n-1) on up to `threads` workers. Each index is visited once;
// callers write results by index so output order never depends on timing.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

struct ClipEvaluation {
  std::string id;
  int style_id = 0;
  BeatReport beats;
  IntensityCurve intensity;
  double pearson = 0.0;
  Embedding reference_embedding;
  Embedding generated_embedding;
};

struct MetricReport {
  std::vector<ClipEvaluation> clips;
  std::size_t music_beat_total = 0;
  std::size_t dance_beat_total = 0;
  std::size_t aligned_total = 0;
  std::optional<double> hit_rate;  // pooled over clips
  double mean_pearson = 0.0;
  double fid_consistency = 0.0;
  double fid_diversity = 0.0;
  std::size_t diversity_distinct = 0;  // generations differing from the first by > 1e-3
  double cluster_accuracy = 0.0;
  PcaProjection pca;
};

// Each clip is danced to its own music with itself as the style reference,
// starting from the latent of its first pose.
//
// fid_consistency: per style, fid(embeddings of generated dances, embeddings
// of the reference clips), averaged over styles.
// fid_diversity: for the first `diversity_clips` clips, `diversity_samples`
// generations whose initial pose is a randomly picked corpus pose, compared by
// fid against the generation from the clip's own first pose; averaged.
// cluster_accuracy and pca use the reference clips' style embeddings.
MetricReport evaluate_model(const DanceModel& model, const std::vector<ClipRecord>& corpus,
                            const EvalConfig& config);

// The generations behind fid_diversity for one clip.
std::vector<MotionSequence> diversity_generations(const DanceModel& model,
                                                  const std::vector<ClipRecord>& corpus,
                                                  const ClipRecord& clip, std::size_t samples,
                                                  Rng& rng);

nlohmann::json report_to_json(const MetricReport& report);
nlohmann::json pca_to_json(const PcaProjection& pca);
std::string pca_to_csv(const PcaProjection& pca);

// Style embeddings of every clip, in corpus order.
std::vector<Embedding> clip_embeddings(const DanceModel& model, const std::vector<ClipRecord>& corpus,
                                       std::size_t threads);

}  // namespace csds

#endif  // CSDS_REPORT_HPP_

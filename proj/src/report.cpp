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
#include "csds/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "csds/error.hpp"

namespace csds {

using nlohmann::json;

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

Tensor first_pose_latent(const DanceModel& model, const MotionSequence& motion) {
  const double* p = motion.poses.data();
  return model.encode_pose(std::span<const double>(p, motion.poses.cols()));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

std::vector<Embedding> clip_embeddings(const DanceModel& model, const std::vector<ClipRecord>& corpus,
                                       std::size_t threads) {
  std::vector<Embedding> out(corpus.size());
  parallel_for(corpus.size(), threads,
               [&](std::size_t i) { out[i] = model.extract_style(corpus[i].motion).embedding.vec(); });
  return out;
}

std::vector<MotionSequence> diversity_generations(const DanceModel& model,
                                                  const std::vector<ClipRecord>& corpus,
                                                  const ClipRecord& clip, std::size_t samples,
                                                  Rng& rng) {
  const Tensor style = model.extract_style(clip.motion).embedding;
  // Draw every initial pose up front so the result does not depend on threading.
  std::vector<Tensor> inits;
  inits.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    const ClipRecord& src = corpus[rng.index(corpus.size())];
    const std::size_t t = rng.index(src.motion.length());
    const double* p = src.motion.poses.data() + t * src.motion.poses.cols();
    inits.push_back(model.encode_pose(std::span<const double>(p, src.motion.poses.cols())));
  }
  std::vector<MotionSequence> out;
  out.reserve(samples);
  for (const auto& z : inits) out.push_back(model.generate(clip.music, style, z));
  return out;
}

MetricReport evaluate_model(const DanceModel& model, const std::vector<ClipRecord>& corpus,
                            const EvalConfig& config) {
  config.validate();
  if (corpus.empty()) throw DataError("evaluation corpus is empty");
  MetricReport report;
  report.clips.resize(corpus.size());

  parallel_for(corpus.size(), config.threads, [&](std::size_t i) {
    const ClipRecord& clip = corpus[i];
    ClipEvaluation& ev = report.clips[i];
    ev.id = clip.id;
    ev.style_id = clip.style.id;
    const auto style = model.extract_style(clip.motion);
    ev.reference_embedding = style.embedding.vec();
    const MotionSequence dance =
        model.generate(clip.music, style.embedding, first_pose_latent(model, clip.motion));
    ev.generated_embedding = model.extract_style(dance).embedding.vec();
    ev.beats = beat_hit_rate(music_beats(clip.music),
                             dance_beats(dance, config.drop_ratio, config.beat_window),
                             config.beat_tolerance);
    ev.intensity = intensity_curves(clip.music, dance, config.intensity_window);
    ev.pearson = pearson(ev.intensity.music, ev.intensity.dance);
  });

  double pearson_sum = 0.0;
  for (const auto& ev : report.clips) {
    report.music_beat_total += ev.beats.music_beats.size();
    report.dance_beat_total += ev.beats.dance_beats.size();
    report.aligned_total += ev.beats.aligned;
    pearson_sum += ev.pearson;
  }
  if (report.music_beat_total > 0) {
    report.hit_rate = static_cast<double>(report.aligned_total) / report.music_beat_total;
  }
  report.mean_pearson = pearson_sum / report.clips.size();

  std::map<int, std::pair<std::vector<Embedding>, std::vector<Embedding>>> by_style;
  for (const auto& ev : report.clips) {
    by_style[ev.style_id].first.push_back(ev.generated_embedding);
    by_style[ev.style_id].second.push_back(ev.reference_embedding);
  }
  double consistency = 0.0;
  for (const auto& [_, sets] : by_style) consistency += fid(sets.first, sets.second).value;
  report.fid_consistency = consistency / by_style.size();

  const std::size_t n_div = std::min(config.diversity_clips, corpus.size());
  double diversity = 0.0;
  Rng rng(config.seed);
  for (std::size_t c = 0; c < n_div; ++c) {
    const ClipRecord& clip = corpus[c];
    const auto gens = diversity_generations(model, corpus, clip, config.diversity_samples, rng);
    std::vector<Embedding> gen_emb(gens.size());
    parallel_for(gens.size(), config.threads,
                 [&](std::size_t i) { gen_emb[i] = model.extract_style(gens[i]).embedding.vec(); });
    const std::vector<Embedding> anchor = {report.clips[c].generated_embedding};
    diversity += fid(gen_emb, anchor).value;
    if (c == 0) {
      report.diversity_distinct = 1;
      for (std::size_t i = 1; i < gens.size(); ++i) {
        if (max_abs_diff(gens[i].poses, gens[0].poses) > 1e-3) ++report.diversity_distinct;
      }
    }
  }
  report.fid_diversity = n_div > 0 ? diversity / n_div : 0.0;

  std::vector<Embedding> refs;
  std::vector<int> ids;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    refs.push_back(report.clips[i].reference_embedding);
    ids.push_back(corpus[i].style.id);
    names.push_back(corpus[i].style.name);
  }
  if (by_style.size() >= 2) report.cluster_accuracy = style_cluster_accuracy(refs, ids);
  if (refs.size() >= 3) report.pca = pca_2d(refs, names);
  return report;
}

namespace {

json beat_report_json(const BeatReport& b) {
  return {{"music_beats", b.music_beats},
          {"dance_beats", b.dance_beats},
          {"aligned", b.aligned},
          {"hit_rate", b.hit_rate ? json(*b.hit_rate) : json(nullptr)}};
}

}  // namespace

json pca_to_json(const PcaProjection& pca) {
  json points = json::array();
  for (std::size_t i = 0; i < pca.points.size(); ++i) {
    points.push_back({pca.points[i][0], pca.points[i][1], pca.labels.at(i)});
  }
  return {{"points", points},
          {"explained", {pca.explained[0], pca.explained[1]}},
          {"components", pca.components},
          {"total_variance", pca.total_variance}};
}

std::string pca_to_csv(const PcaProjection& pca) {
  std::ostringstream out;
  out.precision(17);
  out << "x,y,label\n";
  for (std::size_t i = 0; i < pca.points.size(); ++i) {
    out << pca.points[i][0] << ',' << pca.points[i][1] << ',' << pca.labels.at(i) << '\n';
  }
  return out.str();
}

json report_to_json(const MetricReport& r) {
  json per_clip = json::array();
  for (const auto& ev : r.clips) {
    per_clip.push_back({{"id", ev.id}, {"beat", beat_report_json(ev.beats)}, {"pearson", ev.pearson}});
  }
  json intensity = {{"music", json::array()}, {"dance", json::array()}, {"pearson", r.mean_pearson}};
  if (!r.clips.empty()) {
    intensity["clip"] = r.clips.front().id;
    intensity["music"] = r.clips.front().intensity.music;
    intensity["dance"] = r.clips.front().intensity.dance;
    intensity["window"] = r.clips.front().intensity.window;
  }
  return {{"beat",
           {{"music_beats", r.music_beat_total},
            {"dance_beats", r.dance_beat_total},
            {"aligned", r.aligned_total},
            {"hit_rate", r.hit_rate ? json(*r.hit_rate) : json(nullptr)}}},
          {"intensity", intensity},
          {"fid_consistency", r.fid_consistency},
          {"fid_diversity", r.fid_diversity},
          {"diversity_distinct", r.diversity_distinct},
          {"cluster_accuracy", r.cluster_accuracy},
          {"pca", pca_to_json(r.pca)},
          {"clips", per_clip}};
}

}  // namespace csds

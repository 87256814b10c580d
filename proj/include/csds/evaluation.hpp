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
#ifndef CSDS_EVALUATION_HPP_
#define CSDS_EVALUATION_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csds/corpus.hpp"

namespace csds {

// ---- beats -----------------------------------------------------------------

// Reads the beat-indicator channel when it marks any frame; otherwise
// peak-picks the onset channel (local maxima above mean + 1 stddev, at
// least fps/4 frames apart).
std::vector<std::size_t> music_beats(const MusicFeatureSequence& music);
std::vector<std::size_t> onset_peaks(std::span<const double> onset, int fps);

// Frames where the pose-delta magnitude is a local minimum over +-window and
// at most (1 - drop_ratio) of the mean over the preceding window frames.
std::vector<std::size_t> dance_beats(const MotionSequence& motion, double drop_ratio = 0.5,
                                     std::size_t window = 3);

struct BeatReport {
  std::vector<std::size_t> music_beats;
  std::vector<std::size_t> dance_beats;
  std::size_t aligned = 0;
  std::optional<double> hit_rate;  // empty when there are no music beats
};

// Greedy one-to-one matching in time order within +-tolerance frames.
BeatReport beat_hit_rate(const std::vector<std::size_t>& music, const std::vector<std::size_t>& dance,
                         std::size_t tolerance = 2);

// ---- intensity -------------------------------------------------------------

struct IntensityCurve {
  std::vector<double> music;  // RMSE channel, trimmed to the dance length
  std::vector<double> dance;  // centered moving average of pose-delta magnitudes
  std::size_t window = 9;
};

IntensityCurve intensity_curves(const MusicFeatureSequence& music, const MotionSequence& dance,
                                std::size_t window = 9);

// Sample Pearson correlation; 0 when either input is constant.
double pearson(std::span<const double> x, std::span<const double> y);

// ---- embedding statistics --------------------------------------------------

using Embedding = std::vector<double>;

struct FidScore {
  double value = 0.0;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  std::size_t dimension = 0;
};

// Frechet distance between Gaussian fits of two embedding sets. Sets with
// fewer than dim + 1 samples get +1e-6 I on their covariance.
FidScore fid(const std::vector<Embedding>& a, const std::vector<Embedding>& b);

struct PcaProjection {
  std::vector<std::array<double, 2>> points;
  std::array<double, 2> explained{};  // variance ratios, non-increasing
  std::vector<Embedding> components;  // two unit vectors
  std::vector<std::string> labels;
  double total_variance = 0.0;
};

PcaProjection pca_2d(const std::vector<Embedding>& embeddings, const std::vector<std::string>& labels);

// Leave-one-out nearest-centroid accuracy.
double style_cluster_accuracy(const std::vector<Embedding>& embeddings, const std::vector<int>& labels);

// ---- protocol --------------------------------------------------------------

struct EvalConfig {
  std::size_t beat_tolerance = 2;
  double drop_ratio = 0.5;
  std::size_t beat_window = 3;
  std::size_t intensity_window = 9;
  std::size_t diversity_samples = 50;
  std::size_t diversity_clips = 1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

}  // namespace csds

#endif  // CSDS_EVALUATION_HPP_

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
#ifndef CSDS_CORPUS_HPP_
#define CSDS_CORPUS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csds/tensor.hpp"

namespace csds {

// Per-frame music feature layout.
namespace channel {
inline constexpr std::size_t kMfccBegin = 0;
inline constexpr std::size_t kMfccCount = 20;
inline constexpr std::size_t kChromaBegin = 20;
inline constexpr std::size_t kChromaCount = 12;
inline constexpr std::size_t kPitch = 32;
inline constexpr std::size_t kRmse = 33;
inline constexpr std::size_t kOnset = 34;
inline constexpr std::size_t kBeat = 35;  // 1 at beat frames, else 0
inline constexpr std::size_t kCount = 36;
}  // namespace channel

inline constexpr std::size_t kJointCount = 21;
inline constexpr std::size_t kPoseDim = 2 * kJointCount;
inline constexpr int kDefaultFps = 15;

// Joint order of the (x, y) pairs in a pose row.
const std::array<std::string_view, kJointCount>& joint_names();

inline constexpr std::array<std::string_view, 3> kBuiltinStyles = {
    "anime_dance", "popping_dance", "locking_dance"};

struct StyleLabel {
  std::string name;
  int id = 0;

  bool operator==(const StyleLabel&) const = default;
};

struct MusicFeatureSequence {
  Tensor frames;  // T x L
  int fps = kDefaultFps;

  std::size_t length() const { return frames.rows(); }
  std::size_t channels() const { return frames.cols(); }
  double at(std::size_t t, std::size_t c) const { return frames.at(t, c); }
};

struct MotionSequence {
  Tensor poses;  // T x 42, coordinates in [-1, 1]

  std::size_t length() const { return poses.rows(); }
};

// Oracle data that only the synthetic generator can provide.
struct GroundTruth {
  std::vector<std::size_t> beats;
  std::vector<double> intensity;
};

struct ClipRecord {
  std::string id;
  StyleLabel style;
  MusicFeatureSequence music;
  MotionSequence motion;
  std::optional<GroundTruth> ground_truth;
};

// Throws DataError naming the clip when an invariant does not hold.
void validate_clip(const ClipRecord& clip, std::size_t expected_channels = channel::kCount);

// Style ids: built-in names map to 0..2, other names get the next free id
// in order of first appearance.
class StyleRegistry {
 public:
  StyleLabel resolve(const std::string& name);
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::vector<int> ids_;
};

// NDJSON corpus I/O. An optional first line {"csds_header": {...}} carries
// provenance metadata and is skipped by the loader.
std::vector<ClipRecord> parse_corpus(std::istream& in, std::size_t expected_channels = channel::kCount,
                                     std::string* header_json = nullptr);
std::vector<ClipRecord> load_corpus(const std::string& path,
                                    std::size_t expected_channels = channel::kCount,
                                    std::string* header_json = nullptr);
std::string serialize_clip(const ClipRecord& clip);
std::string serialize_corpus(const std::vector<ClipRecord>& clips, const std::string& header_json = "");
void save_corpus(const std::vector<ClipRecord>& clips, const std::string& path,
                 const std::string& header_json = "");

const ClipRecord& find_clip(const std::vector<ClipRecord>& clips, const std::string& id);

// Pixel keypoints (T x 42) to [-1, 1]. Out-of-frame coordinates are clamped
// and counted in `clamped`.
MotionSequence normalize_pose(const Tensor& raw, double width, double height,
                              std::size_t* clamped = nullptr);

struct SynthConfig {
  std::size_t clips_per_style = 40;
  std::size_t frames = 64;
  int fps = kDefaultFps;
  std::size_t styles = 3;
  std::uint64_t seed = 0;
};

// Procedural corpus with three kinematically distinct styles, exact beat
// schedules and intensity envelopes.
std::vector<ClipRecord> synth_corpus(const SynthConfig& config);

// Statistics used to check that synthetic styles are separable.
struct MotionStats {
  double mean_magnitude = 0.0;
  double dominant_frequency = 0.0;  // cycles per frame
};
MotionStats motion_stats(const MotionSequence& motion);

// |pose_{t+1} - pose_t|_2 for t = 0..T-2.
std::vector<double> motion_magnitudes(const MotionSequence& motion);

}  // namespace csds

#endif  // CSDS_CORPUS_HPP_

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
#include <cmath>
#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "csds/corpus.hpp"
#include "csds/error.hpp"
#include "csds/io.hpp"

namespace csds {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("csds_test_corpus_" + name)).string();
}

ClipRecord tiny_clip(const std::string& id, std::size_t t_music, std::size_t t_motion) {
  ClipRecord c;
  c.id = id;
  c.style = {"anime_dance", 0};
  c.music.frames = Tensor({t_music, channel::kCount}, 0.25);
  for (std::size_t t = 0; t < t_music; ++t) c.music.frames.at(t, channel::kBeat) = 0.0;
  c.motion.poses = Tensor({t_motion, kPoseDim}, 0.1);
  return c;
}

std::string line_for(const ClipRecord& c) { return serialize_clip(c) + "\n"; }

TEST(Corpus, JointTableHasTwentyOneNamedJoints) {
  EXPECT_EQ(joint_names().size(), 21u);
  EXPECT_EQ(joint_names()[0], "nose");
  EXPECT_EQ(joint_names()[1], "neck");
  EXPECT_EQ(kPoseDim, 42u);
}

TEST(Corpus, WellFormedTwoClipFileLoadsTwoRecords) {
  std::istringstream in(line_for(tiny_clip("a", 4, 4)) + line_for(tiny_clip("b", 5, 5)));
  const auto clips = parse_corpus(in);
  ASSERT_EQ(clips.size(), 2u);
  EXPECT_EQ(clips[1].id, "b");
  EXPECT_EQ(clips[1].music.length(), 5u);
}

TEST(Corpus, TMismatchNamesTheClip) {
  std::istringstream in(line_for(tiny_clip("ok", 4, 4)) + line_for(tiny_clip("bad_clip", 64, 63)));
  try {
    parse_corpus(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("bad_clip"), std::string::npos) << msg;
    EXPECT_NE(msg.find("T mismatch"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
  }
}

TEST(Corpus, UnknownChannelCountIsRejected) {
  ClipRecord c = tiny_clip("wide", 4, 4);
  c.music.frames = Tensor({4, 40}, 0.0);
  std::istringstream in(line_for(c));
  try {
    parse_corpus(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown channel count"), std::string::npos);
  }
}

TEST(Corpus, MalformedLineReportsLineNumber) {
  std::istringstream in(line_for(tiny_clip("a", 4, 4)) + "{not json\n");
  try {
    parse_corpus(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Corpus, InvariantViolationsAreRejected) {
  ClipRecord c = tiny_clip("neg", 4, 4);
  c.music.frames.at(1, channel::kRmse) = -0.5;
  EXPECT_THROW(validate_clip(c), DataError);
  c = tiny_clip("beat", 4, 4);
  c.music.frames.at(1, channel::kBeat) = 0.5;
  EXPECT_THROW(validate_clip(c), DataError);
  c = tiny_clip("range", 4, 4);
  c.motion.poses.at(0, 0) = 1.5;
  EXPECT_THROW(validate_clip(c), DataError);
  c = tiny_clip("short", 1, 1);
  EXPECT_THROW(validate_clip(c), DataError);
}

TEST(Corpus, DuplicateIdsAreRejected) {
  std::istringstream in(line_for(tiny_clip("a", 4, 4)) + line_for(tiny_clip("a", 4, 4)));
  EXPECT_THROW(parse_corpus(in), DataError);
}

TEST(Corpus, HeaderLineIsSkippedAndReturned) {
  const std::string text = serialize_corpus({tiny_clip("a", 4, 4)}, R"({"seed":3})");
  std::istringstream in(text);
  std::string header;
  const auto clips = parse_corpus(in, channel::kCount, &header);
  EXPECT_EQ(clips.size(), 1u);
  EXPECT_EQ(header, R"({"seed":3})");
}

TEST(Corpus, StyleIdsBuiltinsFirstThenUserStyles) {
  StyleRegistry reg;
  EXPECT_EQ(reg.resolve("house").id, 3);
  EXPECT_EQ(reg.resolve("locking_dance").id, 2);
  EXPECT_EQ(reg.resolve("anime_dance").id, 0);
  EXPECT_EQ(reg.resolve("krump").id, 4);
  EXPECT_EQ(reg.resolve("house").id, 3);
}

TEST(Corpus, RoundTripIsBitExact) {
  SynthConfig cfg;
  cfg.clips_per_style = 2;
  cfg.frames = 20;
  cfg.seed = 5;
  auto clips = synth_corpus(cfg);
  // Values that stress shortest round-trip printing.
  clips[0].music.frames.at(0, 0) = 0.1 + 0.2;
  clips[0].music.frames.at(0, 1) = 1e-300;
  clips[0].motion.poses.at(0, 0) = -0.3333333333333333;
  const std::string path = temp_path("roundtrip.ndjson");
  save_corpus(clips, path);
  const auto back = load_corpus(path);
  ASSERT_EQ(back.size(), clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) {
    EXPECT_EQ(back[i].id, clips[i].id);
    EXPECT_EQ(back[i].style, clips[i].style);
    EXPECT_EQ(back[i].music.fps, clips[i].music.fps);
    ASSERT_EQ(back[i].music.frames.size(), clips[i].music.frames.size());
    EXPECT_EQ(0, std::memcmp(back[i].music.frames.data(), clips[i].music.frames.data(),
                             clips[i].music.frames.size() * sizeof(double)));
    EXPECT_EQ(0, std::memcmp(back[i].motion.poses.data(), clips[i].motion.poses.data(),
                             clips[i].motion.poses.size() * sizeof(double)));
    ASSERT_TRUE(back[i].ground_truth);
    EXPECT_EQ(back[i].ground_truth->beats, clips[i].ground_truth->beats);
    EXPECT_EQ(back[i].ground_truth->intensity, clips[i].ground_truth->intensity);
  }
  std::filesystem::remove(path);
}

TEST(Corpus, MissingFileIsAnIoError) {
  EXPECT_THROW(load_corpus(temp_path("does_not_exist.ndjson")), IoError);
}

TEST(Corpus, NormalizePoseCornersAndCenter) {
  Tensor raw({1, kPoseDim}, 0.0);
  raw.at(0, 0) = 320;
  raw.at(0, 1) = 240;
  raw.at(0, 2) = 0;
  raw.at(0, 3) = 0;
  raw.at(0, 4) = 640;
  raw.at(0, 5) = 480;
  raw.at(0, 6) = 700;   // out of frame
  raw.at(0, 7) = -10;   // out of frame
  std::size_t clamped = 0;
  const MotionSequence m = normalize_pose(raw, 640, 480, &clamped);
  EXPECT_DOUBLE_EQ(m.poses.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.poses.at(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(m.poses.at(0, 2), -1.0);
  EXPECT_DOUBLE_EQ(m.poses.at(0, 3), -1.0);
  EXPECT_DOUBLE_EQ(m.poses.at(0, 4), 1.0);
  EXPECT_DOUBLE_EQ(m.poses.at(0, 5), 1.0);
  EXPECT_DOUBLE_EQ(m.poses.at(0, 6), 1.0);
  EXPECT_DOUBLE_EQ(m.poses.at(0, 7), -1.0);
  EXPECT_EQ(clamped, 2u);
  EXPECT_THROW(normalize_pose(raw, 0, 480), DataError);
}

TEST(Synth, FixedSeedIsBitIdentical) {
  SynthConfig cfg;
  cfg.clips_per_style = 3;
  cfg.seed = 42;
  EXPECT_EQ(serialize_corpus(synth_corpus(cfg)), serialize_corpus(synth_corpus(cfg)));
  SynthConfig other = cfg;
  other.seed = 43;
  EXPECT_NE(serialize_corpus(synth_corpus(cfg)), serialize_corpus(synth_corpus(other)));
}

TEST(Synth, EveryClipSatisfiesInvariants) {
  SynthConfig cfg;
  cfg.clips_per_style = 10;
  cfg.frames = 16;
  for (const auto& c : synth_corpus(cfg)) {
    EXPECT_NO_THROW(validate_clip(c));
    ASSERT_TRUE(c.ground_truth);
    EXPECT_FALSE(c.ground_truth->beats.empty());
  }
}

TEST(Synth, MusicChannelsMarkBeatsExactly) {
  SynthConfig cfg;
  cfg.clips_per_style = 4;
  for (const auto& c : synth_corpus(cfg)) {
    const auto& beats = c.ground_truth->beats;
    for (std::size_t t = 0; t < c.music.length(); ++t) {
      const bool is_beat = std::find(beats.begin(), beats.end(), t) != beats.end();
      EXPECT_EQ(c.music.at(t, channel::kBeat), is_beat ? 1.0 : 0.0);
      EXPECT_DOUBLE_EQ(c.music.at(t, channel::kRmse), c.ground_truth->intensity[t]);
      if (is_beat && t > 0) {
        EXPECT_GT(c.music.at(t, channel::kOnset), c.music.at(t - 1, channel::kOnset));
      }
    }
  }
}

// Direct scan: at every beat of a style-B clip the pose-delta magnitude is
// at most half the mean of the preceding three deltas.
TEST(Synth, PoppingBeatsDropMotionByHalf) {
  SynthConfig cfg;
  cfg.clips_per_style = 20;
  std::size_t checked = 0;
  for (const auto& c : synth_corpus(cfg)) {
    if (c.style.name != "popping_dance") continue;
    const auto m = motion_magnitudes(c.motion);
    for (std::size_t b : c.ground_truth->beats) {
      if (b < 3 || b >= m.size()) continue;
      const double before = (m[b - 3] + m[b - 2] + m[b - 1]) / 3.0;
      EXPECT_LE(m[b], 0.5 * before) << c.id << " beat " << b;
      ++checked;
    }
  }
  EXPECT_GT(checked, 100u);
}

double nearest_centroid_accuracy(const std::vector<ClipRecord>& clips) {
  std::vector<std::array<double, 2>> x;
  for (const auto& c : clips) {
    const auto s = motion_stats(c.motion);
    x.push_back({s.mean_magnitude, s.dominant_frequency});
  }
  // Standardize both statistics.
  for (int k = 0; k < 2; ++k) {
    double mu = 0, sd = 0;
    for (const auto& p : x) mu += p[k];
    mu /= x.size();
    for (const auto& p : x) sd += (p[k] - mu) * (p[k] - mu);
    sd = std::sqrt(sd / x.size());
    for (auto& p : x) p[k] = (p[k] - mu) / sd;
  }
  std::array<std::array<double, 2>, 3> cen{};
  std::array<int, 3> count{};
  for (std::size_t i = 0; i < clips.size(); ++i) {
    cen[clips[i].style.id][0] += x[i][0];
    cen[clips[i].style.id][1] += x[i][1];
    ++count[clips[i].style.id];
  }
  for (int s = 0; s < 3; ++s) {
    cen[s][0] /= count[s];
    cen[s][1] /= count[s];
  }
  std::size_t ok = 0;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    int best = 0;
    double bd = 1e300;
    for (int s = 0; s < 3; ++s) {
      const double d = std::pow(x[i][0] - cen[s][0], 2) + std::pow(x[i][1] - cen[s][1], 2);
      if (d < bd) {
        bd = d;
        best = s;
      }
    }
    ok += best == clips[i].style.id;
  }
  return static_cast<double>(ok) / clips.size();
}

TEST(Synth, StylesAreSeparableOnHandComputedStatistics) {
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    SynthConfig cfg;
    cfg.clips_per_style = 40;
    cfg.seed = seed;
    EXPECT_EQ(nearest_centroid_accuracy(synth_corpus(cfg)), 1.0) << "seed " << seed;
  }
}

TEST(Synth, SingleStyleCorpus) {
  SynthConfig cfg;
  cfg.clips_per_style = 3;
  cfg.styles = 1;
  const auto clips = synth_corpus(cfg);
  ASSERT_EQ(clips.size(), 3u);
  for (const auto& c : clips) EXPECT_EQ(c.style.name, "anime_dance");
}

TEST(Io, AtomicWriteReplacesContents) {
  const std::string path = temp_path("atomic.txt");
  write_file_atomic(path, "one");
  write_file_atomic(path, "two");
  EXPECT_EQ(read_file(path), "two");
  std::filesystem::remove(path);
  EXPECT_THROW(write_file_atomic("/nonexistent_dir/x/y.txt", "z"), IoError);
  EXPECT_THROW(read_file(path), IoError);
}

}  // namespace
}  // namespace csds

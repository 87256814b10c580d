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
#include "csds/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "csds/error.hpp"
#include "csds/io.hpp"
#include "csds/rng.hpp"

namespace csds {

using nlohmann::json;

const std::array<std::string_view, kJointCount>& joint_names() {
  static const std::array<std::string_view, kJointCount> names = {
      "nose",       "neck",        "mid_hip",    "l_ear",   "r_ear",   "l_shoulder",
      "r_shoulder", "l_elbow",     "r_elbow",    "l_wrist", "r_wrist", "l_hip",
      "r_hip",      "l_knee",      "r_knee",     "l_hand",  "r_hand",  "l_ankle",
      "r_ankle",    "l_toe",       "r_toe"};
  return names;
}

StyleLabel StyleRegistry::resolve(const std::string& name) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return {name, ids_[i]};
  }
  int id = -1;
  for (std::size_t i = 0; i < kBuiltinStyles.size(); ++i) {
    if (kBuiltinStyles[i] == name) id = static_cast<int>(i);
  }
  if (id < 0) {
    id = static_cast<int>(kBuiltinStyles.size());
    for (int existing : ids_) id = std::max(id, existing + 1);
  }
  names_.push_back(name);
  ids_.push_back(id);
  return {name, id};
}

void validate_clip(const ClipRecord& clip, std::size_t expected_channels) {
  const auto fail = [&](const std::string& what) {
    throw DataError("clip '" + clip.id + "': " + what);
  };
  if (clip.id.empty()) throw DataError("clip with empty id");
  const Tensor& m = clip.music.frames;
  const Tensor& d = clip.motion.poses;
  if (m.rank() != 2 || d.rank() != 2) fail("music and motion must be matrices");
  if (m.cols() != expected_channels) {
    fail("unknown channel count " + std::to_string(m.cols()) + ", expected " +
         std::to_string(expected_channels));
  }
  if (d.cols() != kPoseDim) {
    fail("pose width " + std::to_string(d.cols()) + ", expected " + std::to_string(kPoseDim));
  }
  if (m.rows() != d.rows()) {
    fail("T mismatch: music has " + std::to_string(m.rows()) + " frames, motion has " +
         std::to_string(d.rows()));
  }
  if (m.rows() < 2) fail("need at least 2 frames");
  if (clip.music.fps <= 0) fail("fps must be positive");
  if (!m.all_finite() || !d.all_finite()) fail("non-finite value");
  if (expected_channels == channel::kCount) {
    for (std::size_t t = 0; t < m.rows(); ++t) {
      if (m.at(t, channel::kRmse) < 0 || m.at(t, channel::kOnset) < 0) {
        fail("negative RMSE/onset at frame " + std::to_string(t));
      }
      const double b = m.at(t, channel::kBeat);
      if (b != 0.0 && b != 1.0) fail("beat indicator not in {0,1} at frame " + std::to_string(t));
    }
  }
  for (double x : d.values()) {
    if (x < -1.0 || x > 1.0) fail("pose coordinate outside [-1, 1]");
  }
  if (clip.ground_truth) {
    const auto& gt = *clip.ground_truth;
    for (std::size_t i = 0; i < gt.beats.size(); ++i) {
      if (gt.beats[i] >= m.rows() || (i && gt.beats[i] <= gt.beats[i - 1])) {
        fail("ground-truth beats must be strictly increasing frame indices");
      }
    }
    if (!gt.intensity.empty() && gt.intensity.size() != m.rows()) {
      fail("ground-truth intensity length differs from T");
    }
  }
}

namespace {

Tensor matrix_from_json(const json& rows, const char* what, const std::string& id) {
  if (!rows.is_array() || rows.empty()) {
    throw DataError("clip '" + id + "': '" + what + "' must be a non-empty array of frames");
  }
  const std::size_t t = rows.size();
  const std::size_t w = rows[0].is_array() ? rows[0].size() : 0;
  if (w == 0) throw DataError("clip '" + id + "': '" + what + "' frames must be arrays");
  std::vector<double> values;
  values.reserve(t * w);
  for (std::size_t r = 0; r < t; ++r) {
    const json& frame = rows[r];
    if (!frame.is_array() || frame.size() != w) {
      throw DataError("clip '" + id + "': '" + what + "' frame " + std::to_string(r) +
                      " has " + std::to_string(frame.is_array() ? frame.size() : 0) +
                      " channels, expected " + std::to_string(w));
    }
    for (const auto& v : frame) values.push_back(v.get<double>());
  }
  return Tensor({t, w}, std::move(values));
}

json matrix_to_json(const Tensor& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.data() + r * m.cols(), m.data() + (r + 1) * m.cols()));
  }
  return rows;
}

ClipRecord clip_from_json(const json& j, StyleRegistry& styles, std::size_t expected_channels) {
  if (!j.is_object()) throw DataError("clip line is not a JSON object");
  ClipRecord c;
  c.id = j.at("id").get<std::string>();
  c.style = styles.resolve(j.at("style").get<std::string>());
  c.music.fps = j.value("fps", kDefaultFps);
  c.music.frames = matrix_from_json(j.at("music"), "music", c.id);
  c.motion.poses = matrix_from_json(j.at("motion"), "motion", c.id);
  if (j.contains("beats") || j.contains("intensity")) {
    GroundTruth gt;
    if (j.contains("beats")) gt.beats = j.at("beats").get<std::vector<std::size_t>>();
    if (j.contains("intensity")) gt.intensity = j.at("intensity").get<std::vector<double>>();
    c.ground_truth = std::move(gt);
  }
  validate_clip(c, expected_channels);
  return c;
}

}  // namespace

std::vector<ClipRecord> parse_corpus(std::istream& in, std::size_t expected_channels,
                                     std::string* header_json) {
  std::vector<ClipRecord> out;
  StyleRegistry styles;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      if (j.is_object() && j.contains("csds_header")) {
        if (header_json) *header_json = j.at("csds_header").dump();
        continue;
      }
      out.push_back(clip_from_json(j, styles, expected_channels));
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
      if (out[i].id == out.back().id) {
        throw DataError("line " + std::to_string(line_no) + ": duplicate clip id '" +
                        out.back().id + "'");
      }
    }
  }
  return out;
}

std::vector<ClipRecord> load_corpus(const std::string& path, std::size_t expected_channels,
                                    std::string* header_json) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus " + path);
  return parse_corpus(in, expected_channels, header_json);
}

std::string serialize_clip(const ClipRecord& clip) {
  json j;
  j["id"] = clip.id;
  j["style"] = clip.style.name;
  j["fps"] = clip.music.fps;
  j["music"] = matrix_to_json(clip.music.frames);
  j["motion"] = matrix_to_json(clip.motion.poses);
  if (clip.ground_truth) {
    j["beats"] = clip.ground_truth->beats;
    if (!clip.ground_truth->intensity.empty()) j["intensity"] = clip.ground_truth->intensity;
  }
  return j.dump();
}

std::string serialize_corpus(const std::vector<ClipRecord>& clips, const std::string& header_json) {
  std::string out;
  if (!header_json.empty()) {
    json h;
    h["csds_header"] = json::parse(header_json);
    out += h.dump();
    out += '\n';
  }
  for (const auto& c : clips) {
    out += serialize_clip(c);
    out += '\n';
  }
  return out;
}

void save_corpus(const std::vector<ClipRecord>& clips, const std::string& path,
                 const std::string& header_json) {
  write_file_atomic(path, serialize_corpus(clips, header_json));
}

const ClipRecord& find_clip(const std::vector<ClipRecord>& clips, const std::string& id) {
  for (const auto& c : clips) {
    if (c.id == id) return c;
  }
  throw DataError("no clip with id '" + id + "'");
}

MotionSequence normalize_pose(const Tensor& raw, double width, double height,
                              std::size_t* clamped) {
  if (!(width > 0) || !(height > 0)) throw DataError("frame width and height must be positive");
  if (raw.rank() != 2 || raw.cols() != kPoseDim) {
    throw ShapeError("raw keypoints must be T x 42, got " + shape_string(raw.shape()));
  }
  Tensor out(raw.shape());
  std::size_t n_clamped = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double extent = (i % 2 == 0) ? width : height;
    double v = 2.0 * raw[i] / extent - 1.0;
    if (v < -1.0 || v > 1.0) {
      v = std::clamp(v, -1.0, 1.0);
      ++n_clamped;
    }
    out[i] = v;
  }
  if (clamped) *clamped = n_clamped;
  return MotionSequence{std::move(out)};
}

std::vector<double> motion_magnitudes(const MotionSequence& motion) {
  const Tensor& p = motion.poses;
  const std::size_t t_len = p.rows();
  std::vector<double> m(t_len > 0 ? t_len - 1 : 0);
  for (std::size_t t = 0; t + 1 < t_len; ++t) {
    double s = 0.0;
    for (std::size_t c = 0; c < kPoseDim; ++c) {
      const double d = p.at(t + 1, c) - p.at(t, c);
      s += d * d;
    }
    m[t] = std::sqrt(s);
  }
  return m;
}

MotionStats motion_stats(const MotionSequence& motion) {
  MotionStats stats;
  const auto mags = motion_magnitudes(motion);
  for (double v : mags) stats.mean_magnitude += v;
  if (!mags.empty()) stats.mean_magnitude /= static_cast<double>(mags.size());

  // Hann-windowed power spectrum summed over coordinates; DC excluded. The
  // window keeps edge discontinuities from leaking into the lowest bins.
  const Tensor& p = motion.poses;
  const std::size_t n = p.rows();
  std::vector<double> power(n / 2 + 1, 0.0);
  std::vector<double> hann(n);
  for (std::size_t t = 0; t < n; ++t) {
    hann[t] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n));
  }
  for (std::size_t c = 0; c < kPoseDim; ++c) {
    double mu = 0.0;
    for (std::size_t t = 0; t < n; ++t) mu += p.at(t, c);
    mu /= static_cast<double>(n);
    for (std::size_t k = 1; k <= n / 2; ++k) {
      double re = 0.0, im = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n);
        re += hann[t] * (p.at(t, c) - mu) * std::cos(ang);
        im -= hann[t] * (p.at(t, c) - mu) * std::sin(ang);
      }
      power[k] += re * re + im * im;
    }
  }
  std::size_t best = 1;
  for (std::size_t k = 1; k < power.size(); ++k) {
    if (power[k] > power[best]) best = k;
  }
  stats.dominant_frequency = static_cast<double>(best) / static_cast<double>(n);
  return stats;
}

// ---- synthetic corpus ------------------------------------------------------

namespace {

// Skeleton driving parameters.
enum Dof : std::size_t {
  kLean, kHead, kLShoulder, kLElbow, kRShoulder, kRElbow,
  kLHip, kLKnee, kRHip, kRKnee, kShiftX, kBobY, kDofCount
};
using Dofs = std::array<double, kDofCount>;

struct Body {
  double cx, cy, scale;
};

struct Vec2 {
  double x, y;
};
Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
Vec2 rotate(Vec2 v, double a) {
  return {v.x * std::cos(a) - v.y * std::sin(a), v.x * std::sin(a) + v.y * std::cos(a)};
}
// Limb direction at angle `a` from hanging straight down; side -1 = left.
Vec2 limb(double a, double side) { return {side * std::sin(a), std::cos(a)}; }

std::array<Vec2, kJointCount> forward_kinematics(const Dofs& q, const Body& b) {
  const double s = b.scale;
  std::array<Vec2, kJointCount> j{};
  const Vec2 mid_hip{b.cx + q[kShiftX], b.cy + 0.15 * s + q[kBobY]};
  const Vec2 neck = mid_hip + rotate({0.0, -0.5 * s}, q[kLean]);
  const double head = q[kLean] + q[kHead];
  const Vec2 nose = neck + rotate({0.0, -0.17 * s}, head);
  j[0] = nose;
  j[1] = neck;
  j[2] = mid_hip;
  j[3] = nose + rotate({-0.06 * s, 0.02 * s}, head);
  j[4] = nose + rotate({0.06 * s, 0.02 * s}, head);
  for (int side_i = 0; side_i < 2; ++side_i) {
    const double side = side_i == 0 ? -1.0 : 1.0;
    const std::size_t k = static_cast<std::size_t>(side_i);
    const double sh = q[side_i == 0 ? kLShoulder : kRShoulder];
    const double el = q[side_i == 0 ? kLElbow : kRElbow];
    const Vec2 shoulder = neck + rotate({side * 0.16 * s, 0.03 * s}, q[kLean]);
    const Vec2 elbow = shoulder + rotate(0.24 * s * limb(sh, side), q[kLean]);
    const Vec2 wrist = elbow + rotate(0.22 * s * limb(sh + el, side), q[kLean]);
    const Vec2 hand = wrist + rotate(0.06 * s * limb(sh + el, side), q[kLean]);
    const double hp = q[side_i == 0 ? kLHip : kRHip];
    const double kn = q[side_i == 0 ? kLKnee : kRKnee];
    const Vec2 hip = mid_hip + Vec2{side * 0.09 * s, 0.0};
    const Vec2 knee = hip + 0.3 * s * limb(hp, side);
    const Vec2 ankle = knee + 0.3 * s * limb(hp - kn, side);
    const Vec2 toe = ankle + Vec2{side * 0.05 * s, 0.035 * s};
    j[5 + k] = shoulder;
    j[7 + k] = elbow;
    j[9 + k] = wrist;
    j[11 + k] = hip;
    j[13 + k] = knee;
    j[15 + k] = hand;
    j[17 + k] = ankle;
    j[19 + k] = toe;
  }
  return j;
}

Dofs rest_pose() {
  Dofs q{};
  q[kLShoulder] = q[kRShoulder] = 0.25;
  q[kLElbow] = q[kRElbow] = 0.15;
  q[kLHip] = q[kRHip] = 0.08;
  return q;
}

Dofs make_dofs(std::initializer_list<std::pair<Dof, double>> entries) {
  Dofs d{};
  for (auto [k, v] : entries) d[k] = v;
  return d;
}

struct StyleProgram {
  std::vector<Dofs> keys;  // key-pose offsets cycled beat by beat
  double easing;           // exponent of the in-interval progress curve
  double swing;            // amplitude of the per-beat alternating arm swing
  double amplitude;        // excursion gain around the mean key pose
};

const StyleProgram& style_program(std::size_t style) {
  static const std::array<StyleProgram, 3> programs = {{
      // Anime: four-beat cycle of large sweeping poses.
      {{make_dofs({{kLShoulder, 1.3}, {kLElbow, 0.4}, {kRShoulder, 0.2}, {kLean, 0.2},
                   {kShiftX, -0.10}, {kHead, 0.15}}),
        make_dofs({{kLShoulder, 0.7}, {kRShoulder, 0.7}, {kLElbow, 0.6}, {kRElbow, 0.6},
                   {kLKnee, 0.4}, {kRKnee, 0.4}, {kBobY, 0.05}}),
        make_dofs({{kRShoulder, 1.3}, {kRElbow, 0.4}, {kLShoulder, 0.2}, {kLean, -0.2},
                   {kShiftX, 0.10}, {kHead, -0.15}}),
        make_dofs({{kLShoulder, 1.0}, {kRShoulder, 1.0}, {kLElbow, 0.2}, {kRElbow, 0.2},
                   {kBobY, -0.02}})},
       2.0, 0.0, 1.3},
      // Popping: two sharp poses, hold then pop into the beat.
      {{make_dofs({{kLShoulder, 0.5}, {kLElbow, 1.2}, {kRShoulder, 0.1}, {kRElbow, 0.2},
                   {kLean, 0.05}, {kLKnee, 0.3}}),
        make_dofs({{kRShoulder, 0.5}, {kRElbow, 1.2}, {kLShoulder, 0.1}, {kLElbow, 0.2},
                   {kLean, -0.05}, {kRKnee, 0.3}})},
       4.0, 0.0, 0.5},
      // Locking: small weight shifts with alternating arm swings that lock on the beat.
      {{make_dofs({{kLean, 0.05}, {kLKnee, 0.25}, {kShiftX, -0.02}}),
        make_dofs({{kLean, -0.05}, {kRKnee, 0.25}, {kShiftX, 0.02}})},
       2.0, 2.0, 1.0},
  }};
  return programs.at(style);
}

// Smooth zero-mean noise with unit-ish variance.
class SmoothNoise {
 public:
  SmoothNoise(Rng& rng, double rho) : rng_(rng), rho_(rho), state_(rng.normal()) {}
  double next() {
    state_ = rho_ * state_ + std::sqrt(1.0 - rho_ * rho_) * rng_.normal();
    return state_;
  }

 private:
  Rng& rng_;
  double rho_;
  double state_;
};

ClipRecord synth_clip(std::size_t style, std::size_t index, const SynthConfig& cfg, Rng& rng) {
  const std::size_t T = cfg.frames;
  const StyleProgram& prog = style_program(style);

  const std::size_t period = 7 + rng.index(3);  // frames per beat
  const std::size_t first_beat = 3 + rng.index(period);
  const double env_period = rng.uniform(0.7, 1.3) * static_cast<double>(T);
  const double env_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const Body body{rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), rng.uniform(0.85, 1.0)};
  const double gain = rng.uniform(0.9, 1.1);

  auto envelope = [&](double t) {
    return 0.55 + 0.4 * std::sin(2.0 * std::numbers::pi * t / env_period + env_phase);
  };

  GroundTruth gt;
  for (std::size_t b = first_beat; b < T; b += period) gt.beats.push_back(b);

  const Dofs rest = rest_pose();
  const std::size_t n_keys = prog.keys.size();
  // Only the excursion around the mean key pose follows the envelope.
  Dofs key_mean{};
  for (const auto& key : prog.keys) {
    for (std::size_t i = 0; i < kDofCount; ++i) key_mean[i] += key[i] / static_cast<double>(n_keys);
  }
  auto key_at = [&](long k) {
    const long beat_frame = static_cast<long>(first_beat) + k * static_cast<long>(period);
    const double e = gain * envelope(static_cast<double>(beat_frame));
    const Dofs& key = prog.keys[static_cast<std::size_t>(((k % static_cast<long>(n_keys)) +
                                                          static_cast<long>(n_keys)) %
                                                         static_cast<long>(n_keys))];
    Dofs q{};
    for (std::size_t i = 0; i < kDofCount; ++i) q[i] = key_mean[i] + prog.amplitude * e * (key[i] - key_mean[i]);
    return q;
  };

  Tensor poses({T, kPoseDim});
  Tensor music({T, channel::kCount});
  gt.intensity.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const long rel = static_cast<long>(t) - static_cast<long>(first_beat);
    const long k = rel >= 0 ? rel / static_cast<long>(period)
                            : -((-rel + static_cast<long>(period) - 1) / static_cast<long>(period));
    const double u = static_cast<double>(rel - k * static_cast<long>(period)) /
                     static_cast<double>(period);
    const double progress = std::pow(u, prog.easing);
    const Dofs from = key_at(k);
    const Dofs to = key_at(k + 1);
    const double e = envelope(static_cast<double>(t));
    gt.intensity[t] = e;

    Dofs q{};
    for (std::size_t i = 0; i < kDofCount; ++i) {
      q[i] = rest[i] + from[i] + (to[i] - from[i]) * progress;
    }
    if (prog.swing > 0) {
      // Arms take turns beat by beat and lock still on the beat itself.
      const double lobe = std::pow(std::sin(std::numbers::pi * u), 4);
      q[(k % 2 == 0) ? kLShoulder : kRShoulder] += gain * e * prog.swing * lobe;
    }
    const auto joints = forward_kinematics(q, body);
    for (std::size_t j = 0; j < kJointCount; ++j) {
      poses.at(t, 2 * j) = std::clamp(joints[j].x, -1.0, 1.0);
      poses.at(t, 2 * j + 1) = std::clamp(joints[j].y, -1.0, 1.0);
    }
  }

  // Music channels: style-correlated smooth noise for timbre/harmony, exact
  // envelope and beat schedule for RMSE/onset/beat.
  std::vector<SmoothNoise> noise;
  noise.reserve(channel::kPitch + 1);
  for (std::size_t c = 0; c <= channel::kPitch; ++c) noise.emplace_back(rng, 0.85);
  const double pitch_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<bool> is_beat(T, false);
  for (auto b : gt.beats) is_beat[b] = true;
  const double s = static_cast<double>(style);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < channel::kMfccCount; ++c) {
      const double mu = 0.6 * std::sin(1.7 * static_cast<double>(c) + 2.3 * s);
      music.at(t, channel::kMfccBegin + c) = mu + 0.3 * noise[c].next();
    }
    for (std::size_t c = 0; c < channel::kChromaCount; ++c) {
      const double mu = 0.5 + 0.25 * std::sin(0.9 * static_cast<double>(c) + 1.3 * s);
      const double v = mu + 0.15 * noise[channel::kChromaBegin + c].next();
      music.at(t, channel::kChromaBegin + c) = std::clamp(v, 0.0, 1.0);
    }
    music.at(t, channel::kPitch) =
        0.5 + 0.1 * s + 0.2 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 20.0 + pitch_phase) +
        0.05 * noise[channel::kPitch].next();
    const double e = gt.intensity[t];
    music.at(t, channel::kRmse) = e;
    double onset = 0.05 * e;
    if (is_beat[t]) onset += e;
    if (t > 0 && is_beat[t - 1]) onset += 0.3 * e;
    music.at(t, channel::kOnset) = onset;
    music.at(t, channel::kBeat) = is_beat[t] ? 1.0 : 0.0;
  }

  ClipRecord clip;
  char id[64];
  std::snprintf(id, sizeof(id), "%s_%03zu", std::string(kBuiltinStyles[style]).c_str(), index);
  clip.id = id;
  clip.style = StyleLabel{std::string(kBuiltinStyles[style]), static_cast<int>(style)};
  clip.music = MusicFeatureSequence{std::move(music), cfg.fps};
  clip.motion = MotionSequence{std::move(poses)};
  clip.ground_truth = std::move(gt);
  return clip;
}

}  // namespace

std::vector<ClipRecord> synth_corpus(const SynthConfig& config) {
  if (config.frames < 16) throw DataError("synthetic clips need at least 16 frames");
  if (config.styles < 1 || config.styles > kBuiltinStyles.size()) {
    throw DataError("synthetic corpus supports 1 to 3 styles");
  }
  if (config.clips_per_style < 1) throw DataError("clips_per_style must be at least 1");
  if (config.fps <= 0) throw DataError("fps must be positive");
  Rng rng(config.seed);
  std::vector<ClipRecord> out;
  out.reserve(config.styles * config.clips_per_style);
  for (std::size_t i = 0; i < config.clips_per_style; ++i) {
    for (std::size_t s = 0; s < config.styles; ++s) {
      out.push_back(synth_clip(s, i, config, rng));
      validate_clip(out.back());
    }
  }
  return out;
}

}  // namespace csds

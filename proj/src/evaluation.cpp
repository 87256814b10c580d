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
#include "csds/evaluation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "csds/error.hpp"

namespace csds {

void EvalConfig::validate() const {
  if (!(drop_ratio >= 0 && drop_ratio < 1)) throw DataError("eval.drop_ratio must lie in [0, 1)");
  if (beat_window < 1) throw DataError("eval.beat_window must be at least 1");
  if (intensity_window < 1 || intensity_window % 2 == 0) {
    throw DataError("eval.intensity_window must be odd and at least 1");
  }
  if (diversity_samples < 2) throw DataError("eval.diversity_samples must be at least 2");
  if (threads < 1) throw DataError("eval.threads must be at least 1");
}

// ---- beats -----------------------------------------------------------------

std::vector<std::size_t> onset_peaks(std::span<const double> onset, int fps) {
  const std::size_t n = onset.size();
  std::vector<std::size_t> out;
  if (n < 3) return out;
  const double mu = std::accumulate(onset.begin(), onset.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : onset) var += (v - mu) * (v - mu);
  const double threshold = mu + std::sqrt(var / static_cast<double>(n));

  std::vector<std::size_t> candidates;
  for (std::size_t t = 0; t < n; ++t) {
    const bool left = t == 0 || onset[t] > onset[t - 1];
    const bool right = t + 1 == n || onset[t] >= onset[t + 1];
    if (left && right && onset[t] > threshold) candidates.push_back(t);
  }
  // Strongest peaks claim their neighborhood first.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return onset[a] > onset[b]; });
  const std::size_t gap = static_cast<std::size_t>(std::max(1, fps / 4));
  for (std::size_t c : candidates) {
    bool clear = true;
    for (std::size_t k : out) {
      if ((c > k ? c - k : k - c) < gap) clear = false;
    }
    if (clear) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> music_beats(const MusicFeatureSequence& music) {
  const std::size_t t_len = music.length();
  std::vector<std::size_t> marked;
  if (music.channels() > channel::kBeat) {
    for (std::size_t t = 0; t < t_len; ++t) {
      if (music.at(t, channel::kBeat) > 0.5) marked.push_back(t);
    }
    if (!marked.empty()) return marked;
  }
  if (music.channels() <= channel::kOnset) return {};
  std::vector<double> onset(t_len);
  for (std::size_t t = 0; t < t_len; ++t) onset[t] = music.at(t, channel::kOnset);
  return onset_peaks(onset, music.fps);
}

std::vector<std::size_t> dance_beats(const MotionSequence& motion, double drop_ratio,
                                     std::size_t window) {
  const std::vector<double> m = motion_magnitudes(motion);
  std::vector<std::size_t> out;
  if (m.size() < window + 1) return out;
  for (std::size_t t = window; t < m.size(); ++t) {
    double before = 0.0;
    for (std::size_t k = t - window; k < t; ++k) before += m[k];
    before /= static_cast<double>(window);
    if (!(before > 1e-12)) continue;
    if (m[t] > (1.0 - drop_ratio) * before) continue;
    bool is_min = true;
    const std::size_t hi = std::min(m.size() - 1, t + window);
    for (std::size_t k = t - window; k <= hi && is_min; ++k) is_min = m[t] <= m[k];
    if (!is_min) continue;
    // One event per slowdown: a tie within the window keeps the earliest frame.
    if (!out.empty() && t - out.back() <= window) continue;
    out.push_back(t);
  }
  return out;
}

BeatReport beat_hit_rate(const std::vector<std::size_t>& music, const std::vector<std::size_t>& dance,
                         std::size_t tolerance) {
  BeatReport r;
  r.music_beats = music;
  r.dance_beats = dance;
  std::vector<std::size_t> d = dance;
  std::sort(d.begin(), d.end());
  std::vector<bool> used(d.size(), false);
  std::vector<std::size_t> m = music;
  std::sort(m.begin(), m.end());
  for (std::size_t b : m) {
    const std::size_t lo = b >= tolerance ? b - tolerance : 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (used[k] || d[k] < lo) continue;
      if (d[k] > b + tolerance) break;
      used[k] = true;
      ++r.aligned;
      break;
    }
  }
  if (!m.empty()) r.hit_rate = static_cast<double>(r.aligned) / static_cast<double>(m.size());
  return r;
}

// ---- intensity -------------------------------------------------------------

IntensityCurve intensity_curves(const MusicFeatureSequence& music, const MotionSequence& dance,
                                std::size_t window) {
  if (window < 1 || window % 2 == 0) throw DataError("intensity window must be odd and at least 1");
  if (music.length() != dance.length()) throw DataError("music and dance lengths differ");
  const std::vector<double> m = motion_magnitudes(dance);
  IntensityCurve curve;
  curve.window = window;
  const std::size_t half = window / 2;
  curve.dance.resize(m.size());
  for (std::size_t t = 0; t < m.size(); ++t) {
    const std::size_t lo = t >= half ? t - half : 0;
    const std::size_t hi = std::min(m.size() - 1, t + half);
    double s = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) s += m[k];
    curve.dance[t] = s / static_cast<double>(hi - lo + 1);
  }
  curve.music.resize(m.size());
  for (std::size_t t = 0; t < m.size(); ++t) curve.music[t] = music.at(t, channel::kRmse);
  return curve;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// ---- embedding statistics --------------------------------------------------

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat to_matrix(const std::vector<Embedding>& set, std::size_t dim) {
  Mat x(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i].size() != dim) throw DataError("embeddings have inconsistent dimensions");
    for (std::size_t j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = set[i][j];
  }
  return x;
}

// Unbiased covariance (population when a single sample).
void gaussian_fit(const Mat& x, Vec& mean, Mat& cov) {
  mean = x.colwise().mean().transpose();
  const Mat centered = x.rowwise() - mean.transpose();
  const double denom = x.rows() > 1 ? static_cast<double>(x.rows() - 1) : 1.0;
  cov = centered.transpose() * centered / denom;
}

Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

FidScore fid(const std::vector<Embedding>& a, const std::vector<Embedding>& b) {
  if (a.empty() || b.empty()) throw DataError("fid needs two non-empty embedding sets");
  const std::size_t dim = a[0].size();
  if (dim == 0) throw DataError("fid: zero-dimensional embeddings");
  Vec mu_a, mu_b;
  Mat cov_a, cov_b;
  gaussian_fit(to_matrix(a, dim), mu_a, cov_a);
  gaussian_fit(to_matrix(b, dim), mu_b, cov_b);
  const Mat eye = Mat::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  if (a.size() < dim + 1) cov_a += 1e-6 * eye;
  if (b.size() < dim + 1) cov_b += 1e-6 * eye;

  const Mat root_a = psd_sqrt(cov_a);
  const Mat cross = psd_sqrt(root_a * cov_b * root_a);
  FidScore s;
  s.value = (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * cross.trace();
  s.value = std::max(0.0, s.value);
  s.size_a = a.size();
  s.size_b = b.size();
  s.dimension = dim;
  return s;
}

PcaProjection pca_2d(const std::vector<Embedding>& embeddings, const std::vector<std::string>& labels) {
  if (embeddings.size() < 3) throw DataError("pca needs at least 3 embeddings");
  if (!labels.empty() && labels.size() != embeddings.size()) {
    throw DataError("pca: label count does not match embedding count");
  }
  const std::size_t dim = embeddings[0].size();
  const Mat x = to_matrix(embeddings, dim);
  Vec mean;
  Mat cov;
  gaussian_fit(x, mean, cov);
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  // Eigen sorts ascending.
  const Vec evals = es.eigenvalues().cwiseMax(0.0);
  const Eigen::Index n = evals.size();
  const double total = evals.sum();

  PcaProjection p;
  p.labels = labels;
  p.total_variance = total;
  const Mat centered = x.rowwise() - mean.transpose();
  Mat basis(static_cast<Eigen::Index>(dim), 2);
  basis.setZero();
  for (Eigen::Index k = 0; k < 2; ++k) {
    if (n - 1 - k < 0) break;
    Vec v = es.eigenvectors().col(n - 1 - k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    basis.col(k) = v;
    p.explained[static_cast<std::size_t>(k)] = total > 0 ? evals(n - 1 - k) / total : 0.0;
    p.components.emplace_back(v.data(), v.data() + v.size());
  }
  const Mat proj = centered * basis;
  p.points.resize(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    p.points[i] = {proj(static_cast<Eigen::Index>(i), 0), proj(static_cast<Eigen::Index>(i), 1)};
  }
  return p;
}

double style_cluster_accuracy(const std::vector<Embedding>& embeddings, const std::vector<int>& labels) {
  if (embeddings.size() != labels.size()) throw DataError("cluster accuracy: label count mismatch");
  std::map<int, std::pair<Embedding, std::size_t>> sums;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    auto& [s, count] = sums[labels[i]];
    if (s.empty()) s.assign(embeddings[i].size(), 0.0);
    if (embeddings[i].size() != s.size()) throw DataError("embeddings have inconsistent dimensions");
    for (std::size_t j = 0; j < s.size(); ++j) s[j] += embeddings[i][j];
    ++count;
  }
  if (sums.size() < 2) throw DataError("cluster accuracy needs at least two style labels");

  std::size_t correct = 0;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& [label, entry] : sums) {
      const auto& [s, count] = entry;
      const bool own = label == labels[i];
      const std::size_t n = own ? count - 1 : count;
      if (n == 0) continue;
      double d = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        const double c = (s[j] - (own ? embeddings[i][j] : 0.0)) / static_cast<double>(n);
        d += (embeddings[i][j] - c) * (embeddings[i][j] - c);
      }
      if (d < best_d) {
        best_d = d;
        best = label;
      }
    }
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(embeddings.size());
}

}  // namespace csds

// Copyright 2026 The avsync Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "avsync/error.hpp"
#include "avsync/melspec.hpp"
#include "avsync/parallel.hpp"

namespace avsync {

// (n, m) pairs: n indexes the original, m the recording.
struct WarpPath {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  // Starts at (0,0), ends at (N-1, M-1), steps (1,1), (1,0) or (0,1).
  bool valid(std::size_t n, std::size_t m) const {
    if (pairs.empty() || n == 0 || m == 0) return false;
    if (pairs.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
    if (pairs.back() != std::pair<std::size_t, std::size_t>{n - 1, m - 1}) return false;
    for (std::size_t k = 1; k < pairs.size(); ++k) {
      const auto dn = pairs[k].first - pairs[k - 1].first;
      const auto dm = pairs[k].second - pairs[k - 1].second;
      if (pairs[k].first < pairs[k - 1].first || pairs[k].second < pairs[k - 1].second) return false;
      if (dn > 1 || dm > 1 || (dn == 0 && dm == 0)) return false;
    }
    return true;
  }

  bool operator==(const WarpPath&) const = default;
};

struct DtwResult {
  WarpPath path;
  double cost = 0.0;
};

struct DtwOptions {
  // Sakoe-Chiba half-width in frames around the scaled diagonal; unset means
  // unconstrained (exact optimum).
  std::optional<std::size_t> band;
};

// Dynamic programming over an n x m local-distance matrix (row-major).
// Backtracking prefers the diagonal predecessor, then (n-1, m), on ties.
inline DtwResult dtw_from_distances(std::span<const double> dist, std::size_t n, std::size_t m,
                                    const DtwOptions& opts = {}) {
  if (n == 0 || m == 0) throw Error(Errc::argument_error, "DTW on an empty sequence");
  if (dist.size() != n * m) throw Error(Errc::argument_error, "distance matrix size mismatch");
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto in_band = [&](std::size_t i, std::size_t j) {
    if (!opts.band) return true;
    const double centre = n > 1 ? static_cast<double>(i) * static_cast<double>(m - 1) /
                                      static_cast<double>(n - 1)
                                : 0.0;
    return std::abs(static_cast<double>(j) - centre) <= static_cast<double>(*opts.band);
  };
  std::vector<double> acc(n * m, inf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!in_band(i, j) && !(i == 0 && j == 0) && !(i == n - 1 && j == m - 1)) continue;
      const double d = dist[i * m + j];
      if (i == 0 && j == 0) {
        acc[0] = d;
        continue;
      }
      double best = inf;
      if (i > 0 && j > 0) best = acc[(i - 1) * m + (j - 1)];
      if (i > 0) best = std::min(best, acc[(i - 1) * m + j]);
      if (j > 0) best = std::min(best, acc[i * m + (j - 1)]);
      acc[i * m + j] = best + d;
    }
  }
  DtwResult r;
  r.cost = acc[n * m - 1];
  if (!std::isfinite(r.cost)) {
    throw Error(Errc::argument_error, "DTW band too narrow to connect the end points");
  }
  std::size_t i = n - 1, j = m - 1;
  r.path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const double diag = acc[(i - 1) * m + (j - 1)];
      const double up = acc[(i - 1) * m + j];
      const double left = acc[i * m + (j - 1)];
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    r.path.pairs.emplace_back(i, j);
  }
  std::reverse(r.path.pairs.begin(), r.path.pairs.end());
  return r;
}

inline double frame_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace detail {

inline void require_comparable(const MelSpectrogram& a, const MelSpectrogram& b) {
  if (a.empty() || b.empty()) throw Error(Errc::argument_error, "empty mel spectrogram");
  if (a.bands() != b.bands()) {
    throw Error(Errc::argument_error, "band counts differ (" + std::to_string(a.bands()) +
                                          " vs " + std::to_string(b.bands()) + ")");
  }
  if (a.sample_rate() != b.sample_rate() ||
      a.params().hop_samples(a.sample_rate()) != b.params().hop_samples(b.sample_rate())) {
    throw Error(Errc::argument_error, "spectrograms use different hops or sample rates");
  }
}

}  // namespace detail

// Euclidean-distance DTW between two spectrograms.
inline DtwResult dtw(const MelSpectrogram& a, const MelSpectrogram& b, const DtwOptions& opts = {}) {
  detail::require_comparable(a, b);
  const std::size_t n = a.frames(), m = b.frames();
  std::vector<double> dist(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) dist[i * m + j] = frame_distance(a.frame(i), b.frame(j));
  }
  return dtw_from_distances(dist, n, m, opts);
}

// How several m matched to one n collapse into wp(n).
enum class WarpCollapse { mean, first, last };

// wp(n) for n in [0, n_frames). Every n must appear in the path.
inline std::vector<double> warp_function(const WarpPath& path, std::size_t n_frames,
                                         WarpCollapse collapse = WarpCollapse::mean) {
  std::vector<double> sum(n_frames, 0.0);
  std::vector<std::size_t> count(n_frames, 0);
  std::vector<double> wp(n_frames, 0.0);
  for (const auto& [n, m] : path.pairs) {
    if (n >= n_frames) throw Error(Errc::argument_error, "path exceeds original length");
    const auto mv = static_cast<double>(m);
    if (count[n] == 0 && collapse == WarpCollapse::first) wp[n] = mv;
    if (collapse == WarpCollapse::last) wp[n] = mv;
    sum[n] += mv;
    ++count[n];
  }
  for (std::size_t n = 0; n < n_frames; ++n) {
    if (count[n] == 0) throw Error(Errc::argument_error, "path skips original frame " + std::to_string(n));
    if (collapse == WarpCollapse::mean) wp[n] = sum[n] / static_cast<double>(count[n]);
  }
  return wp;
}

struct AsyncScore {
  double frames = 0.0;
  double seconds = 0.0;
};

// RMS of wp(n) - n, in frames and scaled by the hop.
inline AsyncScore asynchrony_score(std::span<const double> wp, double hop_seconds) {
  if (wp.empty()) throw Error(Errc::argument_error, "empty warp function");
  double ss = 0.0;
  for (std::size_t n = 0; n < wp.size(); ++n) {
    const double d = wp[n] - static_cast<double>(n);
    ss += d * d;
  }
  AsyncScore s;
  s.frames = std::sqrt(ss / static_cast<double>(wp.size()));
  s.seconds = s.frames * hop_seconds;
  return s;
}

struct AlignmentResult {
  WarpPath path;
  double cost = 0.0;
  std::vector<double> warp_fn;
  double async_frames = 0.0;
  double async_seconds = 0.0;
};

struct AlignOptions {
  DtwOptions dtw;
  WarpCollapse collapse = WarpCollapse::mean;
};

inline AlignmentResult align(const MelSpectrogram& original, const MelSpectrogram& take,
                             const AlignOptions& opts = {}) {
  auto d = dtw(original, take, opts.dtw);
  AlignmentResult r;
  r.warp_fn = warp_function(d.path, original.frames(), opts.collapse);
  const auto score = asynchrony_score(r.warp_fn, original.hop_seconds());
  r.path = std::move(d.path);
  r.cost = d.cost;
  r.async_frames = score.frames;
  r.async_seconds = score.seconds;
  return r;
}

// Negative offsets drop leading frames; positive offsets prepend zero frames.
inline MelSpectrogram shift_frames(const MelSpectrogram& mel, long offset) {
  const std::size_t nb = mel.bands();
  std::vector<double> values;
  std::size_t n = 0;
  if (offset < 0) {
    const auto drop = static_cast<std::size_t>(-offset);
    if (drop < mel.frames()) {
      n = mel.frames() - drop;
      values.assign(mel.values().begin() + static_cast<std::ptrdiff_t>(drop * nb), mel.values().end());
    }
  } else {
    n = mel.frames() + static_cast<std::size_t>(offset);
    values.assign(static_cast<std::size_t>(offset) * nb, 0.0);
    values.insert(values.end(), mel.values().begin(), mel.values().end());
  }
  return MelSpectrogram(n, nb, std::move(values), mel.params(), mel.sample_rate());
}

struct OffsetSearch {
  double range_seconds = 2.0;  // candidates cover [-range, +range]
  long step_hops = 1;
  unsigned threads = 1;
  AlignOptions align;
};

struct OffsetResult {
  long offset_hops = 0;
  double offset_seconds = 0.0;
  AlignmentResult corrected;
};

// Whole-hop offset of `take` minimizing the asynchrony score. Ties go to the
// smallest |offset|, then to the negative one.
inline OffsetResult find_best_offset(const MelSpectrogram& original, const MelSpectrogram& take,
                                     const OffsetSearch& search = {}) {
  detail::require_comparable(original, take);
  if (search.step_hops < 1) throw Error(Errc::argument_error, "offset step must be >= 1 hop");
  if (!(search.range_seconds >= 0.0)) throw Error(Errc::argument_error, "negative search range");
  const double hop = original.hop_seconds();
  const auto reach = static_cast<long>(std::floor(search.range_seconds / hop + 1e-9));
  // Candidate order encodes the tie rule: 0, -s, +s, -2s, +2s, ...
  std::vector<long> candidates{0};
  for (long k = search.step_hops; k <= reach; k += search.step_hops) {
    candidates.push_back(-k);
    candidates.push_back(k);
  }
  std::vector<std::optional<AlignmentResult>> results(candidates.size());
  parallel_for(candidates.size(), search.threads, [&](std::size_t c) {
    const auto shifted = shift_frames(take, candidates[c]);
    if (shifted.empty()) return;
    results[c] = align(original, shifted, search.align);
  });
  std::optional<std::size_t> best;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (!results[c]) continue;
    if (!best || results[c]->async_frames < results[*best]->async_frames) best = c;
  }
  if (!best) throw Error(Errc::degenerate_input, "take vanishes under every candidate offset");
  OffsetResult out;
  out.offset_hops = candidates[*best];
  out.offset_seconds = static_cast<double>(out.offset_hops) * hop;
  out.corrected = std::move(*results[*best]);
  return out;
}

}  // namespace avsync

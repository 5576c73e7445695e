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


// Adaptive level tracking toward the 80% word-recognition point, plus the
// SRT estimate and its clamping at the acoustic detection bounds.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avsync/error.hpp"
#include "avsync/mst.hpp"

namespace avsync {

enum class Modality { AO, AV, VO };
enum class Background { noise, quiet };
enum class ResponseFormat { open, closed };

struct Condition {
  Modality modality = Modality::AV;
  Background background = Background::noise;
  ResponseFormat format = ResponseFormat::closed;

  // The nine tested conditions; visual-only exists only in noise, closed set.
  bool valid() const {
    if (modality == Modality::VO) {
      return background == Background::noise && format == ResponseFormat::closed;
    }
    return true;
  }

  bool adaptive() const { return modality != Modality::VO; }

  std::string name() const {
    std::string s = modality == Modality::AO ? "AO" : modality == Modality::AV ? "AV" : "VO";
    s += background == Background::noise ? "Noise" : "Quiet";
    s += format == ResponseFormat::closed ? "Closed" : "Open";
    return s;
  }

  static Condition parse(std::string_view name) {
    for (const auto& c : all()) {
      if (c.name() == name) return c;
    }
    throw Error(Errc::argument_error, "unknown condition '" + std::string(name) + "'");
  }

  static std::array<Condition, 9> all() {
    using M = Modality;
    using B = Background;
    using F = ResponseFormat;
    return {{{M::AO, B::noise, F::closed}, {M::AO, B::noise, F::open},
             {M::AV, B::noise, F::closed}, {M::AV, B::noise, F::open},
             {M::AO, B::quiet, F::closed}, {M::AO, B::quiet, F::open},
             {M::AV, B::quiet, F::closed}, {M::AV, B::quiet, F::open},
             {M::VO, B::noise, F::closed}}};
  }

  bool operator==(const Condition&) const = default;
};

struct AdaptiveConfig {
  double target = 0.8;
  double slope_noise = 0.15;   // assumed psychometric slope, 1/dB
  double slope_quiet = 0.05;
  double step_initial = 1.5;   // f(0)
  double step_ratio = 1.41;    // f(r) = max(step_min, step_initial * step_ratio^-r)
  double step_min = 0.1;
  double start_speech_spl = 60.0;
  double noise_spl = 65.0;
  double snr_min = -40.0, snr_max = 20.0;
  double spl_min = -20.0, spl_max = 90.0;
  double clamp_snr = -20.0;
  double clamp_spl = 0.0;
  std::size_t list_length = mst::kListLength;
  std::size_t srt_first_sentence = 11;  // 1-based; estimate also uses the next level

  double slope(Background b) const { return b == Background::noise ? slope_noise : slope_quiet; }
  double lower_bound(Background b) const { return b == Background::noise ? snr_min : spl_min; }
  double upper_bound(Background b) const { return b == Background::noise ? snr_max : spl_max; }
  double clamp_level(Background b) const { return b == Background::noise ? clamp_snr : clamp_spl; }

  double step_factor(int reversals) const {
    return std::max(step_min, step_initial * std::pow(step_ratio, -reversals));
  }
};

struct SrtEstimate {
  double srt_raw = 0.0;
  double srt_clamped = 0.0;
  bool clamped = false;
};

// levels[k] is the level of sentence k+1; an adaptive track that has seen n
// responses holds n + 1 levels (the last one not yet presented).
// Levels are dB SNR in noise and speech dB SPL in quiet.
struct AdaptiveTrack {
  Condition condition;
  std::vector<double> levels;
  std::vector<int> words_correct;
  std::vector<int> reversals_after;  // reversal count after each update
  int reversals = 0;
  int last_step_sign = 0;
  double fixed_noise_spl = 65.0;

  std::size_t responses() const { return words_correct.size(); }
};

inline AdaptiveTrack init_track(const Condition& condition, const AdaptiveConfig& cfg = {}) {
  if (!condition.valid()) throw Error(Errc::argument_error, "invalid condition " + condition.name());
  AdaptiveTrack t;
  t.condition = condition;
  t.fixed_noise_spl = cfg.noise_spl;
  if (condition.adaptive()) {
    t.levels.push_back(condition.background == Background::noise
                           ? cfg.start_speech_spl - cfg.noise_spl
                           : cfg.start_speech_spl);
  }
  return t;
}

// Signed level change for the observed proportion correct at reversal count r.
inline double level_step(double proportion, int reversals, Background background,
                         const AdaptiveConfig& cfg = {}) {
  return -cfg.step_factor(reversals) * (proportion - cfg.target) / cfg.slope(background);
}

// Records the response to the current level and appends the next level.
inline double update_level(AdaptiveTrack& track, int words_correct, const AdaptiveConfig& cfg = {}) {
  if (!track.condition.adaptive()) {
    throw Error(Errc::usage_error, "update_level on a visual-only track");
  }
  if (track.responses() >= cfg.list_length) {
    throw Error(Errc::usage_error, "track already holds a full list");
  }
  if (words_correct < 0 || words_correct > static_cast<int>(mst::kCategories)) {
    throw Error(Errc::argument_error, "words_correct outside 0..5");
  }
  const double p = words_correct / static_cast<double>(mst::kCategories);
  const auto bg = track.condition.background;
  const double step = level_step(p, track.reversals, bg, cfg);
  const double next = std::clamp(track.levels.back() + step, cfg.lower_bound(bg), cfg.upper_bound(bg));
  const int sign = step > 0.0 ? 1 : step < 0.0 ? -1 : 0;
  if (sign != 0) {
    if (track.last_step_sign != 0 && sign != track.last_step_sign) ++track.reversals;
    track.last_step_sign = sign;
  }
  track.words_correct.push_back(words_correct);
  track.reversals_after.push_back(track.reversals);
  track.levels.push_back(next);
  return next;
}

inline void record_vo_response(AdaptiveTrack& track, int words_correct, const AdaptiveConfig& cfg = {}) {
  if (track.condition.adaptive()) throw Error(Errc::usage_error, "not a visual-only track");
  if (track.responses() >= cfg.list_length) throw Error(Errc::usage_error, "track already holds a full list");
  track.words_correct.push_back(words_correct);
}

inline SrtEstimate clamp_srt(double srt_raw, Background background, const AdaptiveConfig& cfg = {}) {
  const double bound = cfg.clamp_level(background);
  SrtEstimate e;
  e.srt_raw = srt_raw;
  e.clamped = srt_raw < bound;
  e.srt_clamped = e.clamped ? bound : srt_raw;
  return e;
}

// Mean of the levels of sentences 11..20 and the computed 21st level.
inline SrtEstimate estimate_srt(const AdaptiveTrack& track, const AdaptiveConfig& cfg = {}) {
  if (!track.condition.adaptive()) throw Error(Errc::usage_error, "visual-only tracks have no SRT");
  if (track.responses() < cfg.list_length || track.levels.size() < cfg.list_length + 1) {
    throw Error(Errc::incomplete_track, std::to_string(track.responses()) + " of " +
                                            std::to_string(cfg.list_length) + " responses recorded");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = cfg.srt_first_sentence - 1; k <= cfg.list_length; ++k) {
    sum += track.levels[k];
    ++n;
  }
  return clamp_srt(sum / static_cast<double>(n), track.condition.background, cfg);
}

inline double vo_score(const AdaptiveTrack& track, const AdaptiveConfig& cfg = {}) {
  if (track.condition.adaptive()) throw Error(Errc::usage_error, "vo_score on an adaptive track");
  if (track.responses() < cfg.list_length) {
    throw Error(Errc::incomplete_track, "visual-only list not complete");
  }
  return mst::word_percentage(track.words_correct);
}

// CSV `sentence_idx,level,words_correct,reversals`, one row per presented
// sentence (1-based). Visual-only tracks report level NA.
inline std::string format_track_csv(const AdaptiveTrack& track) {
  std::string out = "sentence_idx,level,words_correct,reversals\n";
  char buf[32];
  for (std::size_t k = 0; k < track.responses(); ++k) {
    out += std::to_string(k + 1) + ",";
    if (track.condition.adaptive()) {
      std::snprintf(buf, sizeof buf, "%.4f", track.levels[k]);
      out += buf;
    } else {
      out += "NA";
    }
    out += "," + std::to_string(track.words_correct[k]) + ",";
    out += track.condition.adaptive() ? std::to_string(track.reversals_after[k]) : "0";
    out += "\n";
  }
  return out;
}

}  // namespace avsync

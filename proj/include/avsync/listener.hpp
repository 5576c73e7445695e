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


// Simulated listeners: logistic word psychometric function, speechreading
// probability v, audiovisual integration by probability summation on top of
// a v-proportional effective-SNR gain, training and retest variability.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "avsync/adaptive.hpp"
#include "avsync/csv.hpp"
#include "avsync/error.hpp"
#include "avsync/mst.hpp"
#include "avsync/random.hpp"

namespace avsync {

inline constexpr double kDefaultSigma = 1.0 / (4.0 * 0.15);

struct ListenerProfile {
  int id = 0;
  double m50_noise = -9.4;  // dB SNR at 50% words
  double m50_quiet = 15.3;  // dB SPL at 50% words
  double sigma = kDefaultSigma;
  double v = 0.5;                    // visual-only word probability
  double visual_gain = 0.0;          // dB of effective SNR per unit v
  double training_amplitude = 4.0;   // dB
  double training_tau = 2.5;         // lists
  double retest_jitter = 1.4;        // dB, per-track midpoint jitter std
  double closed_advantage = 0.0;     // dB, lowers the midpoint for closed-set tracks
  double detection_floor_snr = -16.9;
  double av_floor_extension = 3.0;

  void validate() const {
    if (!(sigma > 0.0)) throw Error(Errc::argument_error, "sigma must be positive");
    if (!(v >= 0.0 && v <= 1.0)) throw Error(Errc::argument_error, "v must lie in [0, 1]");
    if (!(training_amplitude >= 0.0)) throw Error(Errc::argument_error, "training amplitude must be >= 0");
    if (!(training_tau > 0.0)) throw Error(Errc::argument_error, "training tau must be positive");
    if (!(retest_jitter >= 0.0)) throw Error(Errc::argument_error, "retest jitter must be >= 0");
  }
};

struct PopulationConfig {
  std::size_t n_listeners = 28;
  double v_mean = 0.50;
  double v_std = 0.214;
  double m50_noise_mean = -9.4;
  double m50_noise_std = 1.0;
  double m50_quiet_mean = 15.3;
  double m50_quiet_std = 2.0;
  double sigma = kDefaultSigma;
  double visual_gain = 5.875;  // calibrated: mean AV benefit in noise of 5.0 dB
  double training_amplitude = 4.0;
  double training_tau = 2.5;
  double retest_jitter = 1.4;
  double closed_advantage = 0.0;
  double detection_floor_snr = -16.9;
  double av_floor_extension = 3.0;

  void validate() const {
    if (n_listeners < 1) throw Error(Errc::argument_error, "population needs >= 1 listener");
    if (v_std < 0 || m50_noise_std < 0 || m50_quiet_std < 0) {
      throw Error(Errc::argument_error, "standard deviations must be >= 0");
    }
    if (!(v_mean >= 0.0 && v_mean <= 1.0)) throw Error(Errc::argument_error, "v_mean outside [0, 1]");
    if (!(sigma > 0.0) || !(training_tau > 0.0) || training_amplitude < 0 || retest_jitter < 0) {
      throw Error(Errc::argument_error, "invalid psychometric or training parameters");
    }
  }
};

namespace stream_purpose {
inline constexpr std::uint64_t population = 1;
inline constexpr std::uint64_t experiment = 2;
}  // namespace stream_purpose

// Listener i draws from its own stream addressed by (seed, i), so the
// population is identical whatever order or thread count samples it.
inline std::vector<ListenerProfile> sample_population(const PopulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<ListenerProfile> out;
  out.reserve(cfg.n_listeners);
  for (std::size_t i = 0; i < cfg.n_listeners; ++i) {
    Rng rng = make_stream(seed, i, stream_purpose::population);
    std::normal_distribution<double> unit(0.0, 1.0);
    ListenerProfile p;
    p.id = static_cast<int>(i);
    if (cfg.v_std == 0.0) {
      p.v = cfg.v_mean;
    } else {
      do {
        p.v = cfg.v_mean + cfg.v_std * unit(rng);
      } while (p.v < 0.0 || p.v > 1.0);
    }
    p.m50_noise = cfg.m50_noise_mean + cfg.m50_noise_std * unit(rng);
    p.m50_quiet = cfg.m50_quiet_mean + cfg.m50_quiet_std * unit(rng);
    p.sigma = cfg.sigma;
    p.visual_gain = cfg.visual_gain;
    p.training_amplitude = cfg.training_amplitude;
    p.training_tau = cfg.training_tau;
    p.retest_jitter = cfg.retest_jitter;
    p.closed_advantage = cfg.closed_advantage;
    p.detection_floor_snr = cfg.detection_floor_snr;
    p.av_floor_extension = cfg.av_floor_extension;
    out.push_back(p);
  }
  return out;
}

// Effective 50% point for a track: base midpoint, decaying training offset,
// per-track jitter, and the optional closed-set advantage.
inline double effective_midpoint(const ListenerProfile& p, const Condition& c, int trial_index,
                                 double jitter_db = 0.0) {
  const double base = c.background == Background::noise ? p.m50_noise : p.m50_quiet;
  double m = base + p.training_amplitude * std::exp(-static_cast<double>(trial_index) / p.training_tau) +
             jitter_db;
  if (c.format == ResponseFormat::closed) m -= p.closed_advantage;
  return m;
}

// Probability that one word is recognized.
inline double p_word(const ListenerProfile& p, double level, const Condition& c, int trial_index,
                     double jitter_db = 0.0) {
  if (c.modality == Modality::VO) return p.v;
  const bool av = c.modality == Modality::AV;
  double p_audio = 0.0;
  bool audible = true;
  if (c.background == Background::noise) {
    const double floor = av ? p.detection_floor_snr - p.av_floor_extension : p.detection_floor_snr;
    audible = level >= floor;
  }
  if (audible) {
    const double m = effective_midpoint(p, c, trial_index, jitter_db);
    const double x = av ? level + p.visual_gain * p.v : level;
    p_audio = 1.0 / (1.0 + std::exp(-(x - m) / p.sigma));
  }
  if (!av) return p_audio;
  // 1 - (1 - p_a)(1 - v), arranged so that p_a = 0 yields exactly v.
  return p.v + p_audio * (1.0 - p.v);
}

// Each word is independently correct with probability `prob`. Misses become
// a random wrong word, or in open-set format no-answer half of the time.
inline mst::Response respond_with_probability(double prob, const mst::MatrixSentence& sentence,
                                              ResponseFormat format, Rng& rng) {
  mst::Response r;
  for (std::size_t c = 0; c < mst::kCategories; ++c) {
    if (uniform01(rng) < prob) {
      r.words[c] = sentence.words[c];
      continue;
    }
    if (format == ResponseFormat::open && uniform01(rng) < 0.5) {
      r.words[c] = std::nullopt;
      continue;
    }
    const int offset = 1 + static_cast<int>(rng() % (mst::kWordsPerCategory - 1));
    r.words[c] = (sentence.words[c] + offset) % static_cast<int>(mst::kWordsPerCategory);
  }
  return r;
}

inline mst::Response respond(const ListenerProfile& p, const mst::MatrixSentence& sentence, double level,
                             const Condition& c, int trial_index, Rng& rng, double jitter_db = 0.0) {
  return respond_with_probability(p_word(p, level, c, trial_index, jitter_db), sentence, c.format, rng);
}

// CSV `listener_id,m50_noise,m50_quiet,v,sigma,visual_gain,training_amplitude,training_tau,retest_jitter`.
inline std::string format_population_csv(const std::vector<ListenerProfile>& pop) {
  std::string out =
      "listener_id,m50_noise,m50_quiet,v,sigma,visual_gain,training_amplitude,training_tau,retest_jitter\n";
  char buf[256];
  for (const auto& p : pop) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", p.id, p.m50_noise,
                  p.m50_quiet, p.v, p.sigma, p.visual_gain, p.training_amplitude, p.training_tau,
                  p.retest_jitter);
    out += buf;
  }
  return out;
}

}  // namespace avsync

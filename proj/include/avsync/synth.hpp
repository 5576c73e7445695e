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


// Synthetic speech-like material for exercising the alignment pipeline:
// harmonic vowel segments with formant shaping, fricative noise bursts and
// pauses, plus "takes" that re-time, delay and degrade an original.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "avsync/align.hpp"
#include "avsync/audio_io.hpp"
#include "avsync/csv.hpp"
#include "avsync/error.hpp"
#include "avsync/melspec.hpp"
#include "avsync/random.hpp"

namespace avsync::synth {

// Five "words" of 1-3 syllables separated by pauses, like a matrix sentence.
struct SentenceParams {
  int sample_rate = 48000;
  double lead_silence_min = 0.15;  // seconds
  double lead_silence_max = 0.40;
  double tail_silence = 0.25;
  int words = 5;
  int max_syllables = 3;
  double pause_min = 0.15;
  double pause_max = 0.35;
  double peak = 0.5;
  double noise_floor = 2e-4;  // RMS of the background noise under the whole sentence
};

namespace detail {

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline void normalize_peak(std::vector<double>& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0) {
    for (double& v : x) v *= peak / m;
  }
}

// Raised-cosine fade in/out over `ramp` samples.
inline double envelope(std::size_t i, std::size_t n, std::size_t ramp) {
  if (ramp == 0 || n == 0) return 1.0;
  const double pi = std::numbers::pi;
  if (i < ramp) return 0.5 - 0.5 * std::cos(pi * static_cast<double>(i) / static_cast<double>(ramp));
  if (i + ramp >= n) return 0.5 - 0.5 * std::cos(pi * static_cast<double>(n - i) / static_cast<double>(ramp));
  return 1.0;
}

inline void voiced(std::vector<double>& out, Rng& rng, int rate, double seconds) {
  const double pi = std::numbers::pi;
  const auto n = static_cast<std::size_t>(seconds * rate);
  const double f0a = uniform(rng, 110.0, 230.0);
  const double f0b = f0a * uniform(rng, 0.8, 1.25);
  const double f1 = uniform(rng, 300.0, 900.0);
  const double f2 = uniform(rng, 900.0, 2600.0);
  const double f3 = uniform(rng, 2400.0, 3600.0);
  const double amp = uniform(rng, 0.4, 1.0);
  double phase = 0.0;
  std::vector<double> seg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n, 1));
    const double f0 = f0a + (f0b - f0a) * u;
    phase += 2.0 * pi * f0 / rate;
    double s = 0.0;
    for (int h = 1; f0 * h < 5000.0; ++h) {
      const double f = f0 * h;
      const double w = std::exp(-0.5 * std::pow((f - f1) / 120.0, 2)) +
                       0.6 * std::exp(-0.5 * std::pow((f - f2) / 180.0, 2)) +
                       0.3 * std::exp(-0.5 * std::pow((f - f3) / 250.0, 2)) + 0.02;
      s += w * std::sin(h * phase);
    }
    seg[i] = amp * s * envelope(i, n, static_cast<std::size_t>(0.015 * rate));
  }
  out.insert(out.end(), seg.begin(), seg.end());
}

inline void fricative(std::vector<double>& out, Rng& rng, int rate, double seconds) {
  const auto n = static_cast<std::size_t>(seconds * rate);
  const double amp = uniform(rng, 0.1, 0.35);
  const double tilt = uniform(rng, 0.3, 0.95);  // first-difference weight, brightens the noise
  std::normal_distribution<double> g(0.0, 1.0);
  double prev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = g(rng);
    out.push_back(amp * (w - tilt * prev) * envelope(i, n, static_cast<std::size_t>(0.008 * rate)));
    prev = w;
  }
}

inline void pause(std::vector<double>& out, int rate, double seconds) {
  out.insert(out.end(), static_cast<std::size_t>(seconds * rate), 0.0);
}

}  // namespace detail

struct Segment {
  enum Kind { silence, voiced, fricative } kind = silence;
  double seconds = 0.0;
  std::uint64_t seed = 0;
};

// Timeline of a sentence before rendering; word_onsets[w] is the start of
// word w in seconds.
struct SentencePlan {
  std::vector<Segment> segments;
  std::vector<double> word_onsets;
  double duration = 0.0;
};

inline SentencePlan plan_sentence(std::uint64_t seed, const SentenceParams& p = {}) {
  if (p.words < 1 || p.max_syllables < 1) throw Error(Errc::argument_error, "sentence needs >= 1 word");
  if (p.lead_silence_min < 0 || p.lead_silence_max < p.lead_silence_min || p.pause_min < 0 ||
      p.pause_max < p.pause_min || p.tail_silence < 0) {
    throw Error(Errc::argument_error, "invalid silence durations");
  }
  Rng rng(seed);
  SentencePlan plan;
  auto add = [&](Segment::Kind kind, double seconds) {
    plan.segments.push_back({kind, seconds, rng()});
    plan.duration += seconds;
  };
  add(Segment::silence, detail::uniform(rng, p.lead_silence_min, p.lead_silence_max));
  for (int w = 0; w < p.words; ++w) {
    if (w > 0) add(Segment::silence, detail::uniform(rng, p.pause_min, p.pause_max));
    plan.word_onsets.push_back(plan.duration);
    const int syllables = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(p.max_syllables));
    for (int k = 0; k < syllables; ++k) {
      if (uniform01(rng) < 0.3) add(Segment::fricative, detail::uniform(rng, 0.04, 0.12));
      add(Segment::voiced, detail::uniform(rng, 0.08, 0.22));
    }
  }
  add(Segment::silence, p.tail_silence);
  return plan;
}

inline AudioBuffer render_sentence(const SentencePlan& plan, const SentenceParams& p = {}) {
  if (p.sample_rate < 16000) throw Error(Errc::argument_error, "synthetic speech needs >= 16 kHz");
  std::vector<double> x;
  for (const auto& seg : plan.segments) {
    Rng rng(seg.seed);
    switch (seg.kind) {
      case Segment::silence: detail::pause(x, p.sample_rate, seg.seconds); break;
      case Segment::voiced: detail::voiced(x, rng, p.sample_rate, seg.seconds); break;
      case Segment::fricative: detail::fricative(x, rng, p.sample_rate, seg.seconds); break;
    }
  }
  detail::normalize_peak(x, p.peak);
  if (p.noise_floor > 0.0) {
    Rng rng(plan.segments.empty() ? 0 : ~plan.segments.front().seed);
    std::normal_distribution<double> g(0.0, p.noise_floor);
    for (double& v : x) v += g(rng);
  }
  return AudioBuffer::mono(std::move(x), p.sample_rate);
}

inline AudioBuffer make_sentence(std::uint64_t seed, const SentenceParams& p = {}) {
  return render_sentence(plan_sentence(seed, p), p);
}

struct TakeParams {
  double delay = 0.0;            // seconds, >= 0
  double stretch = 1.0;          // take duration / original duration
  double warp_amplitude = 0.0;   // seconds of sinusoidal timing wobble
  double warp_period = 1.3;      // seconds
  double noise_rms = 0.0;
  double gain = 1.0;
  std::uint64_t noise_seed = 0;
};

// take(t) = gain * original(((t - delay) - A sin(2 pi (t - delay) / P)) / stretch) + noise,
// sampled by linear interpolation.
inline AudioBuffer make_take(const AudioBuffer& original, const TakeParams& p) {
  if (original.channel_count() != 1) throw Error(Errc::argument_error, "make_take expects mono audio");
  if (!(p.delay >= 0.0) || !(p.stretch > 0.0) || !(p.warp_period > 0.0) || p.noise_rms < 0.0) {
    throw Error(Errc::argument_error, "invalid take parameters");
  }
  const double pi = std::numbers::pi;
  const int rate = original.sample_rate();
  const auto src = original.channel(0);
  const double src_len = static_cast<double>(src.size());
  const auto n = static_cast<std::size_t>(std::ceil(p.delay * rate + src_len * p.stretch +
                                                    std::abs(p.warp_amplitude) * rate));
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate - p.delay;
    if (t < 0.0) continue;
    const double u = (t - p.warp_amplitude * std::sin(2.0 * pi * t / p.warp_period)) / p.stretch * rate;
    if (u < 0.0 || u > src_len - 1.0) continue;
    const auto k = static_cast<std::size_t>(u);
    const double frac = u - static_cast<double>(k);
    const double a = src[k];
    const double b = k + 1 < src.size() ? src[k + 1] : 0.0;
    y[i] = p.gain * (a + (b - a) * frac);
  }
  if (p.noise_rms > 0.0) {
    Rng rng(p.noise_seed);
    std::normal_distribution<double> g(0.0, p.noise_rms);
    for (double& v : y) v += g(rng);
  }
  for (double& v : y) v = std::clamp(v, -1.0, 32767.0 / 32768.0);
  return AudioBuffer::mono(std::move(y), rate);
}

struct CorpusParams {
  std::size_t sentences = 20;
  std::size_t takes = 4;
  std::size_t outliers = 3;
  double outlier_delay = 0.150;
  double max_delay = 0.030;  // non-outlier takes: |offset| <= max_delay
  int sample_rate = 48000;
  // Sentence k of a random ranking gets lead silence lead_base + k * lead_step,
  // so any two originals start at clearly different times.
  double lead_base = 0.15;
  double lead_step = 0.12;
  // A candidate sentence is redrawn while any of its takes scores below this
  // against an accepted original, or any accepted take does against it.
  double min_mismatch_score = 0.17;
  std::uint64_t seed = 1;
};

struct SyntheticTake {
  std::string take_id;
  double offset = 0.0;  // seconds, positive = take lags the original
  AudioBuffer audio;
};

struct SyntheticSentence {
  std::string sentence_id;
  bool outlier = false;
  AudioBuffer original;
  std::vector<SyntheticTake> takes;
};

inline std::string sentence_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%03zu", index + 1);
  return buf;
}

inline std::string take_id(std::size_t index) { return "t" + std::to_string(index + 1); }

inline constexpr std::uint64_t kCorpusPurpose = 0x53594e;

// Every take of an outlier sentence lags by outlier_delay. Other takes are
// offset by up to max_delay either way; a negative offset is realized by
// cropping the take's leading silence.
inline std::vector<SyntheticSentence> make_corpus(const CorpusParams& p) {
  if (p.sentences == 0 || p.takes == 0) throw Error(Errc::argument_error, "empty corpus");
  if (p.outliers > p.sentences) throw Error(Errc::argument_error, "more outliers than sentences");
  if (p.max_delay < 0.0 || p.max_delay >= 0.15 || p.outlier_delay < 0.0) {
    throw Error(Errc::argument_error, "invalid corpus delays");
  }
  Rng pick = make_stream(p.seed, 0, kCorpusPurpose);
  std::vector<std::size_t> order(p.sentences);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[pick() % i]);
  std::vector<bool> is_outlier(p.sentences, false);
  for (std::size_t k = 0; k < p.outliers; ++k) is_outlier[order[k]] = true;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[pick() % i]);

  SentenceParams sp;
  sp.sample_rate = p.sample_rate;
  std::vector<SyntheticSentence> corpus;
  std::vector<MelSpectrogram> originals;
  std::vector<std::vector<MelSpectrogram>> takes;
  for (std::size_t i = 0; i < p.sentences; ++i) {
    SyntheticSentence s;
    s.sentence_id = sentence_id(i);
    s.outlier = is_outlier[i];
    sp.lead_silence_min = sp.lead_silence_max = p.lead_base + p.lead_step * static_cast<double>(order[i]);
    Rng rng = make_stream(p.seed, i + 1, kCorpusPurpose);
    MelSpectrogram mel;
    std::vector<MelSpectrogram> take_mels;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw Error(Errc::argument_error, "cannot separate sentences; lower min_mismatch_score");
      s.original = make_sentence(rng(), sp);
      s.takes.clear();
      take_mels.clear();
      for (std::size_t j = 0; j < p.takes; ++j) {
        TakeParams tp;
        const double offset = s.outlier ? p.outlier_delay : detail::uniform(rng, -p.max_delay, p.max_delay);
        tp.delay = std::max(offset, 0.0);
        tp.stretch = detail::uniform(rng, 0.99, 1.01);
        tp.warp_amplitude = detail::uniform(rng, 0.0, s.outlier ? 0.004 : 0.008);
        tp.warp_period = detail::uniform(rng, 0.9, 1.8);
        tp.noise_rms = 2e-4;
        tp.gain = detail::uniform(rng, 0.6, 1.0);
        tp.noise_seed = rng();
        auto audio = make_take(s.original, tp);
        if (offset < 0.0) {
          const auto drop = static_cast<std::size_t>(std::llround(-offset * p.sample_rate));
          audio = crop(audio, drop, audio.frames() - drop);
        }
        take_mels.push_back(compute_mel_spectrogram(audio));
        s.takes.push_back({take_id(j), offset, std::move(audio)});
      }
      mel = compute_mel_spectrogram(s.original);
      bool far = true;
      for (std::size_t k = 0; k < originals.size() && far; ++k) {
        for (const auto& t : take_mels) far = far && align(originals[k], t).async_seconds >= p.min_mismatch_score;
        for (const auto& t : takes[k]) far = far && align(mel, t).async_seconds >= p.min_mismatch_score;
      }
      if (far) break;
    }
    originals.push_back(std::move(mel));
    takes.push_back(std::move(take_mels));
    corpus.push_back(std::move(s));
  }
  return corpus;
}

// Writes originals/, takes/ and manifest.csv (paths relative to the manifest).
inline std::filesystem::path write_corpus(const std::filesystem::path& dir,
                                          const std::vector<SyntheticSentence>& corpus) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "originals", ec);
  fs::create_directories(dir / "takes", ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
  std::string manifest = "kind,sentence_id,take_id,path\n";
  std::string truth = "sentence_id,take_id,offset_s,outlier\n";
  for (const auto& s : corpus) {
    const auto orig = fs::path("originals") / (s.sentence_id + ".wav");
    write_wav_file(dir / orig, s.original);
    manifest += "original," + csv::quote(s.sentence_id) + ",," + csv::quote(orig.generic_string()) + "\n";
    for (const auto& t : s.takes) {
      const auto rel = fs::path("takes") / (s.sentence_id + "_" + t.take_id + ".wav");
      write_wav_file(dir / rel, t.audio);
      manifest += "take," + csv::quote(s.sentence_id) + "," + csv::quote(t.take_id) + "," +
                  csv::quote(rel.generic_string()) + "\n";
      char buf[64];
      std::snprintf(buf, sizeof buf, ",%.6f,%d\n", t.offset, s.outlier ? 1 : 0);
      truth += s.sentence_id + "," + t.take_id + buf;
    }
  }
  csv::write_text(dir / "manifest.csv", manifest);
  csv::write_text(dir / "truth.csv", truth);
  return dir / "manifest.csv";
}

}  // namespace avsync::synth

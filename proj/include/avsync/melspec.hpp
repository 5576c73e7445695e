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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "avsync/audio_io.hpp"
#include "avsync/error.hpp"

namespace avsync {

// Framing and filterbank parameters. Defaults: 46 ms Hann windows every
// 23 ms, 64 HTK-mel bands between 50 Hz and 8 kHz, natural-log energies,
// per-band mean removed over the utterance.
struct MelParams {
  double window = 0.046;
  double hop = 0.023;
  int n_bands = 64;
  double f_min = 50.0;
  double f_max = 8000.0;
  double log_floor = 1e-10;
  bool normalize = true;

  std::size_t window_samples(int rate) const {
    return static_cast<std::size_t>(std::llround(window * rate));
  }
  std::size_t hop_samples(int rate) const {
    return static_cast<std::size_t>(std::llround(hop * rate));
  }

  void validate(int rate) const {
    if (rate <= 0) throw Error(Errc::argument_error, "sample rate must be positive");
    if (!(hop > 0.0) || hop > window || hop_samples(rate) == 0) {
      throw Error(Errc::argument_error, "need 0 < hop <= window");
    }
    if (n_bands < 2) throw Error(Errc::argument_error, "need at least 2 mel bands");
    if (!(f_min >= 0.0) || !(f_min < f_max) || f_max > rate / 2.0) {
      throw Error(Errc::argument_error, "need 0 <= f_min < f_max <= rate/2");
    }
    if (!(log_floor > 0.0)) throw Error(Errc::argument_error, "log_floor must be positive");
  }

  bool operator==(const MelParams&) const = default;
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Band b spans edges_hz[b] .. edges_hz[b + 2] and peaks at edges_hz[b + 1].
inline std::vector<double> mel_band_edges(const MelParams& p) {
  const double lo = hz_to_mel(p.f_min);
  const double hi = hz_to_mel(p.f_max);
  std::vector<double> edges(static_cast<std::size_t>(p.n_bands) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / (p.n_bands + 1));
  }
  return edges;
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Unit-area triangular filters sampled at the FFT bin frequencies.
struct Filterbank {
  std::size_t fft_size = 0;
  std::vector<double> centers_hz;
  std::vector<std::size_t> first_bin;
  std::vector<std::vector<double>> weights;

  std::size_t bands() const { return weights.size(); }

  double weight(std::size_t band, std::size_t bin) const {
    if (bin < first_bin[band] || bin >= first_bin[band] + weights[band].size()) return 0.0;
    return weights[band][bin - first_bin[band]];
  }
};

inline Filterbank make_filterbank(const MelParams& p, int rate, std::size_t fft_size) {
  Filterbank fb;
  fb.fft_size = fft_size;
  const auto edges = mel_band_edges(p);
  const std::size_t n_bins = fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(rate) / static_cast<double>(fft_size);
  for (int b = 0; b < p.n_bands; ++b) {
    const double lo = edges[b], c = edges[b + 1], hi = edges[b + 2];
    const double height = 2.0 / (hi - lo);
    std::size_t first = n_bins;
    std::vector<double> w;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double v = 0.0;
      if (f > lo && f <= c) v = height * (f - lo) / (c - lo);
      else if (f > c && f < hi) v = height * (hi - f) / (hi - c);
      if (v > 0.0) {
        if (first == n_bins) first = k;
        w.resize(k - first + 1, 0.0);
        w[k - first] = v;
      }
    }
    if (w.empty()) {
      throw Error(Errc::argument_error, "mel band " + std::to_string(b) +
                                            " covers no FFT bin; use fewer bands or a longer window");
    }
    fb.centers_hz.push_back(c);
    fb.first_bin.push_back(first);
    fb.weights.push_back(std::move(w));
  }
  return fb;
}

// Symmetric Hann window of length n.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n - 1));
  }
  return w;
}

// floor((L - W) / H) + 1 for L >= W, else 0.
inline std::size_t frame_count(std::size_t length, const MelParams& p, int rate) {
  const std::size_t w = p.window_samples(rate);
  const std::size_t h = p.hop_samples(rate);
  if (w == 0 || h == 0 || length < w) return 0;
  return (length - w) / h + 1;
}

class MelSpectrogram {
 public:
  MelSpectrogram() = default;
  MelSpectrogram(std::size_t n_frames, std::size_t n_bands, std::vector<double> values,
                 MelParams params, int sample_rate)
      : n_frames_(n_frames), n_bands_(n_bands), values_(std::move(values)),
        params_(params), sample_rate_(sample_rate) {
    if (values_.size() != n_frames_ * n_bands_) {
      throw Error(Errc::argument_error, "mel matrix size mismatch");
    }
  }

  std::size_t frames() const { return n_frames_; }
  std::size_t bands() const { return n_bands_; }
  bool empty() const { return n_frames_ == 0; }
  const MelParams& params() const { return params_; }
  int sample_rate() const { return sample_rate_; }
  // Hop in seconds as realized in whole samples.
  double hop_seconds() const {
    return static_cast<double>(params_.hop_samples(sample_rate_)) / sample_rate_;
  }

  std::span<const double> frame(std::size_t i) const {
    return {values_.data() + i * n_bands_, n_bands_};
  }
  double at(std::size_t i, std::size_t b) const { return values_[i * n_bands_ + b]; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t n_frames_ = 0;
  std::size_t n_bands_ = 0;
  std::vector<double> values_;
  MelParams params_;
  int sample_rate_ = 0;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Owns an r2c plan and its buffers; the planner itself is not thread-safe.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::lock_guard lock(fftw_planner_mutex());
    in_ = fftw_alloc_real(n_);
    out_ = fftw_alloc_complex(n_ / 2 + 1);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n_), in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::span<double> input() { return {in_, n_}; }

  // |X_k|^2 for k = 0 .. n/2.
  void power(std::vector<double>& out) {
    fftw_execute(plan_);
    out.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  std::size_t n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

}  // namespace detail

inline MelSpectrogram compute_mel_spectrogram(const AudioBuffer& audio,
                                              const MelParams& params = {}) {
  if (audio.channel_count() != 1) {
    throw Error(Errc::argument_error, "mel spectrogram needs mono audio");
  }
  const int rate = audio.sample_rate();
  params.validate(rate);
  const std::size_t w = params.window_samples(rate);
  const std::size_t h = params.hop_samples(rate);
  const std::size_t n_frames = frame_count(audio.frames(), params, rate);
  const auto nb = static_cast<std::size_t>(params.n_bands);
  std::vector<double> values(n_frames * nb, 0.0);
  if (n_frames > 0) {
    const std::size_t nfft = next_pow2(w);
    const auto fb = make_filterbank(params, rate, nfft);
    const auto win = hann_window(w);
    const auto x = audio.channel(0);
    detail::RealFft fft(nfft);
    std::vector<double> power;
    for (std::size_t f = 0; f < n_frames; ++f) {
      auto in = fft.input();
      std::fill(in.begin(), in.end(), 0.0);
      for (std::size_t i = 0; i < w; ++i) in[i] = x[f * h + i] * win[i];
      fft.power(power);
      for (std::size_t b = 0; b < nb; ++b) {
        double e = 0.0;
        const auto& wt = fb.weights[b];
        for (std::size_t k = 0; k < wt.size(); ++k) e += wt[k] * power[fb.first_bin[b] + k];
        values[f * nb + b] = std::log(e + params.log_floor);
      }
    }
    if (params.normalize) {
      // Mean as first value plus mean deviation, so constant bands become exactly 0.
      for (std::size_t b = 0; b < nb; ++b) {
        const double ref = values[b];
        double dev = 0.0;
        for (std::size_t f = 0; f < n_frames; ++f) dev += values[f * nb + b] - ref;
        const double mean = ref + dev / static_cast<double>(n_frames);
        for (std::size_t f = 0; f < n_frames; ++f) values[f * nb + b] -= mean;
      }
    }
  }
  return MelSpectrogram(n_frames, nb, std::move(values), params, rate);
}

// One row per frame, one column per band.
inline std::string format_mel_csv(const MelSpectrogram& mel) {
  std::string out;
  for (std::size_t b = 0; b < mel.bands(); ++b) {
    out += (b ? ",band_" : "band_") + std::to_string(b);
  }
  out += "\n";
  char buf[32];
  for (std::size_t f = 0; f < mel.frames(); ++f) {
    for (std::size_t b = 0; b < mel.bands(); ++b) {
      std::snprintf(buf, sizeof buf, "%.9g", mel.at(f, b));
      if (b) out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace avsync

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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "avsync/error.hpp"

namespace avsync {

// Sampled waveform, one vector per channel, all of equal length.
class AudioBuffer {
 public:
  AudioBuffer() = default;

  AudioBuffer(std::vector<std::vector<double>> channels, int sample_rate)
      : channels_(std::move(channels)), sample_rate_(sample_rate) {
    if (sample_rate_ <= 0) {
      throw Error(Errc::argument_error, "sample rate must be positive");
    }
    if (channels_.empty()) {
      throw Error(Errc::argument_error, "audio buffer needs at least one channel");
    }
    for (const auto& c : channels_) {
      if (c.size() != channels_.front().size()) {
        throw Error(Errc::argument_error, "channel lengths differ");
      }
    }
  }

  static AudioBuffer mono(std::vector<double> samples, int sample_rate) {
    std::vector<std::vector<double>> channels;
    channels.push_back(std::move(samples));
    return AudioBuffer(std::move(channels), sample_rate);
  }

  int sample_rate() const { return sample_rate_; }
  std::size_t channel_count() const { return channels_.size(); }
  std::size_t frames() const {
    return channels_.empty() ? 0 : channels_.front().size();
  }
  double duration() const {
    return sample_rate_ > 0 ? static_cast<double>(frames()) / sample_rate_ : 0.0;
  }

  std::span<const double> channel(std::size_t index) const {
    return channels_.at(index);
  }
  const std::vector<std::vector<double>>& channels() const { return channels_; }

  bool operator==(const AudioBuffer&) const = default;

 private:
  std::vector<std::vector<double>> channels_;
  int sample_rate_ = 0;
};

namespace detail {

inline std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

inline std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  for (int i = 0; i < 4; ++i) {
    if (b[at + i] != static_cast<std::uint8_t>(tag[i])) return false;
  }
  return true;
}

inline void require_same_rate(const AudioBuffer& a, const AudioBuffer& b) {
  if (a.sample_rate() != b.sample_rate()) {
    throw Error(Errc::argument_error, "sample rates differ (" +
                                          std::to_string(a.sample_rate()) + " vs " +
                                          std::to_string(b.sample_rate()) + ")");
  }
}

}  // namespace detail

// Parses a RIFF/WAVE file holding 16-bit integer PCM. Sample s maps to
// s / 32768. Only the `fmt ` and `data` chunks are interpreted.
inline AudioBuffer read_wav(std::span<const std::uint8_t> bytes) {
  using detail::read_u16;
  using detail::read_u32;
  if (bytes.size() < 12 || !detail::tag_is(bytes, 0, "RIFF") ||
      !detail::tag_is(bytes, 8, "WAVE")) {
    throw Error(Errc::malformed_file, "not a RIFF/WAVE container");
  }
  bool have_fmt = false;
  int channels = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (detail::tag_is(bytes, pos, "fmt ")) {
      if (size < 16 || body + size > bytes.size()) {
        throw Error(Errc::malformed_file, "truncated fmt chunk");
      }
      std::uint16_t format = read_u16(bytes, body);
      if (format == 0xFFFE && size >= 26) {
        // WAVE_FORMAT_EXTENSIBLE: the sub-format GUID starts with the codec tag.
        format = read_u16(bytes, body + 24);
      }
      if (format != 1) {
        throw Error(Errc::unsupported_format,
                    "codec tag " + std::to_string(format) + " is not PCM");
      }
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      const int bits = read_u16(bytes, body + 14);
      if (bits != 16) {
        throw Error(Errc::unsupported_format,
                    std::to_string(bits) + "-bit PCM is not supported");
      }
      if (rate == 0) throw Error(Errc::malformed_file, "zero sample rate");
      if (channels == 0) throw Error(Errc::malformed_file, "zero channels");
      have_fmt = true;
    } else if (detail::tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw Error(Errc::malformed_file, "data chunk before fmt chunk");
      if (body + size > bytes.size()) {
        throw Error(Errc::malformed_file, "truncated data chunk");
      }
      const std::size_t block = 2 * static_cast<std::size_t>(channels);
      if (size % block != 0) {
        throw Error(Errc::malformed_file, "data chunk holds a partial frame");
      }
      const std::size_t frames = size / block;
      std::vector<std::vector<double>> out(channels, std::vector<double>(frames));
      for (std::size_t f = 0; f < frames; ++f) {
        for (int c = 0; c < channels; ++c) {
          const auto raw = static_cast<std::int16_t>(
              read_u16(bytes, body + f * block + 2 * static_cast<std::size_t>(c)));
          out[c][f] = raw / 32768.0;
        }
      }
      return AudioBuffer(std::move(out), static_cast<int>(rate));
    }
    pos = body + size + (size & 1u);
  }
  throw Error(Errc::malformed_file, have_fmt ? "missing data chunk" : "missing fmt chunk");
}

// Serializes as 16-bit PCM. Samples outside [-1, 1] are rejected; 1.0 maps
// to 32767, everything else to round(x * 32768).
inline std::vector<std::uint8_t> write_wav(const AudioBuffer& buffer, int bit_depth = 16) {
  if (bit_depth != 16) {
    throw Error(Errc::unsupported_format, "only 16-bit PCM output is supported");
  }
  if (buffer.channel_count() == 0) {
    throw Error(Errc::argument_error, "buffer has no channels");
  }
  const std::size_t frames = buffer.frames();
  const std::size_t nch = buffer.channel_count();
  for (std::size_t c = 0; c < nch; ++c) {
    for (double x : buffer.channel(c)) {
      if (!(x >= -1.0 && x <= 1.0)) {
        throw Error(Errc::range_error, "sample outside [-1, 1]");
      }
    }
  }
  const auto data_size = static_cast<std::uint32_t>(frames * nch * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);
  detail::put_u16(out, static_cast<std::uint16_t>(nch));
  detail::put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate()));
  detail::put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate() * nch * 2));
  detail::put_u16(out, static_cast<std::uint16_t>(nch * 2));
  detail::put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_u32(out, data_size);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < nch; ++c) {
      const double x = buffer.channel(c)[f];
      const long q = std::min(32767L, std::lround(x * 32768.0));
      detail::put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
  }
  return out;
}

inline AudioBuffer read_wav_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_wav(bytes);
}

inline void write_wav_file(const std::filesystem::path& path, const AudioBuffer& buffer) {
  const auto bytes = write_wav(buffer);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline AudioBuffer extract_channel(const AudioBuffer& buffer, std::size_t index) {
  if (index >= buffer.channel_count()) {
    throw Error(Errc::argument_error, "channel " + std::to_string(index) +
                                          " out of range for " +
                                          std::to_string(buffer.channel_count()) +
                                          "-channel buffer");
  }
  auto ch = buffer.channel(index);
  return AudioBuffer::mono({ch.begin(), ch.end()}, buffer.sample_rate());
}

// Prepends round(seconds * rate) zero frames to every channel.
inline AudioBuffer delay(const AudioBuffer& buffer, double seconds) {
  if (!(seconds >= 0.0)) {
    throw Error(Errc::argument_error, "negative delay; use crop to advance audio");
  }
  const auto pad = static_cast<std::size_t>(std::llround(seconds * buffer.sample_rate()));
  std::vector<std::vector<double>> out;
  out.reserve(buffer.channel_count());
  for (const auto& c : buffer.channels()) {
    std::vector<double> v(pad, 0.0);
    v.insert(v.end(), c.begin(), c.end());
    out.push_back(std::move(v));
  }
  return AudioBuffer(std::move(out), buffer.sample_rate());
}

// Frames [first, first + count), clipped to the buffer end.
inline AudioBuffer crop(const AudioBuffer& buffer, std::size_t first, std::size_t count) {
  const std::size_t n = buffer.frames();
  const std::size_t begin = std::min(first, n);
  const std::size_t end = begin + std::min(count, n - begin);
  std::vector<std::vector<double>> out;
  for (const auto& c : buffer.channels()) {
    out.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(begin),
                     c.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return AudioBuffer(std::move(out), buffer.sample_rate());
}

inline AudioBuffer gain(const AudioBuffer& buffer, double factor) {
  auto channels = buffer.channels();
  for (auto& c : channels) {
    for (double& x : c) x *= factor;
  }
  return AudioBuffer(std::move(channels), buffer.sample_rate());
}

// Sample-wise sum; the shorter buffer is zero-extended.
inline AudioBuffer mix(const AudioBuffer& a, const AudioBuffer& b) {
  detail::require_same_rate(a, b);
  if (a.channel_count() != b.channel_count()) {
    throw Error(Errc::argument_error, "channel counts differ");
  }
  const std::size_t n = std::max(a.frames(), b.frames());
  std::vector<std::vector<double>> out(a.channel_count(), std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < a.channel_count(); ++c) {
    auto ca = a.channel(c);
    auto cb = b.channel(c);
    for (std::size_t i = 0; i < ca.size(); ++i) out[c][i] += ca[i];
    for (std::size_t i = 0; i < cb.size(); ++i) out[c][i] += cb[i];
  }
  return AudioBuffer(std::move(out), a.sample_rate());
}

// Interleaves mono buffers of equal rate and length into one multichannel buffer.
inline AudioBuffer stack_channels(std::span<const AudioBuffer> monos) {
  if (monos.empty()) throw Error(Errc::argument_error, "nothing to stack");
  std::vector<std::vector<double>> out;
  for (const auto& m : monos) {
    detail::require_same_rate(monos.front(), m);
    for (const auto& c : m.channels()) out.push_back(c);
  }
  return AudioBuffer(std::move(out), monos.front().sample_rate());
}

}  // namespace avsync

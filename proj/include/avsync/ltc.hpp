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


// SMPTE 12M linear timecode: biphase-mark encoder, a polarity- and
// gain-independent decoder, and alignment of a playback schedule onto the
// decoded frame positions of a session recording.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "avsync/audio_io.hpp"
#include "avsync/csv.hpp"
#include "avsync/error.hpp"

namespace avsync::ltc {

struct Timecode {
  int hours = 0;
  int minutes = 0;
  int seconds = 0;
  int frames = 0;
  int fps = 25;

  bool valid() const {
    return fps >= 1 && fps <= 30 && hours >= 0 && hours <= 23 && minutes >= 0 &&
           minutes <= 59 && seconds >= 0 && seconds <= 59 && frames >= 0 && frames < fps;
  }

  // Frames since 00:00:00:00.
  long long frame_number() const {
    return ((static_cast<long long>(hours) * 60 + minutes) * 60 + seconds) * fps + frames;
  }

  static Timecode from_frame_number(long long n, int fps = 25) {
    const long long day = 24LL * 3600 * fps;
    n %= day;
    if (n < 0) n += day;
    Timecode t;
    t.fps = fps;
    t.frames = static_cast<int>(n % fps);
    n /= fps;
    t.seconds = static_cast<int>(n % 60);
    n /= 60;
    t.minutes = static_cast<int>(n % 60);
    t.hours = static_cast<int>(n / 60);
    return t;
  }

  // Successor; wraps 23:59:59:(fps-1) to 00:00:00:00.
  Timecode next() const { return from_frame_number(frame_number() + 1, fps); }

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d:%02d", hours, minutes, seconds, frames);
    return buf;
  }

  bool operator==(const Timecode&) const = default;
};

struct ParsedTimecode {
  Timecode timecode;
  double sub_frame = 0.0;  // in [0, 1)
};

// Parses HH:MM:SS:FF, optionally followed by a fractional frame ".ddd".
inline ParsedTimecode parse_timecode(std::string_view text, int fps = 25) {
  int h = 0, m = 0, s = 0, f = 0;
  int consumed = 0;
  const std::string str(text);
  if (std::sscanf(str.c_str(), "%d:%d:%d:%d%n", &h, &m, &s, &f, &consumed) != 4) {
    throw Error(Errc::malformed_file, "bad timecode '" + str + "'");
  }
  ParsedTimecode out;
  out.timecode = Timecode{h, m, s, f, fps};
  if (!out.timecode.valid()) {
    throw Error(Errc::malformed_file, "timecode out of range '" + str + "'");
  }
  const std::string rest = str.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty()) {
    char* end = nullptr;
    const double frac = std::strtod(rest.c_str(), &end);
    if (rest[0] != '.' || *end != '\0' || frac < 0.0 || frac >= 1.0) {
      throw Error(Errc::malformed_file, "bad fractional frame in '" + str + "'");
    }
    out.sub_frame = frac;
  }
  return out;
}

struct LtcFrame {
  Timecode timecode;
  std::size_t start_sample = 0;
  std::uint32_t user_bits = 0;
  bool drop_frame = false;
  bool color_frame = false;
};

struct DecodeResult {
  std::vector<LtcFrame> frames;
  // Transition runs that ended (signal error, noise, dropout) while holding
  // bits that never became part of a decoded frame.
  std::size_t discarded_runs = 0;
};

struct ScheduleEntry {
  std::string sentence_id;
  Timecode start;
  double sub_frame = 0.0;

  double position() const { return static_cast<double>(start.frame_number()) + sub_frame; }
};

struct PlaybackSchedule {
  std::vector<ScheduleEntry> entries;

  void validate() const {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!seen.insert(entries[i].sentence_id).second) {
        throw Error(Errc::argument_error, "duplicate sentence_id " + entries[i].sentence_id);
      }
      if (i > 0 && entries[i].position() < entries[i - 1].position()) {
        throw Error(Errc::argument_error, "schedule entries are not time-ordered at " +
                                              entries[i].sentence_id);
      }
    }
  }
};

inline constexpr std::array<bool, 16> kSyncWord = {false, false, true, true, true, true,
                                                   true,  true,  true, true, true, true,
                                                   true,  true,  false, true};
inline constexpr int kBitsPerFrame = 80;

namespace detail {

inline void put_bcd(std::array<bool, 80>& bits, int first, int count, int value) {
  for (int i = 0; i < count; ++i) bits[first + i] = ((value >> i) & 1) != 0;
}

inline int get_bcd(const std::array<bool, 80>& bits, int first, int count) {
  int v = 0;
  for (int i = 0; i < count; ++i) v |= (bits[first + i] ? 1 : 0) << i;
  return v;
}

inline constexpr std::array<int, 8> kUserGroups = {4, 12, 20, 28, 36, 44, 52, 60};

inline int polarity_bit(int fps) { return fps == 25 ? 59 : 27; }

}  // namespace detail

// Packs one frame in transmission order (bit 0 first).
inline std::array<bool, 80> pack_frame(const Timecode& tc, std::uint32_t user_bits = 0) {
  std::array<bool, 80> bits{};
  detail::put_bcd(bits, 0, 4, tc.frames % 10);
  detail::put_bcd(bits, 8, 2, tc.frames / 10);
  detail::put_bcd(bits, 16, 4, tc.seconds % 10);
  detail::put_bcd(bits, 24, 3, tc.seconds / 10);
  detail::put_bcd(bits, 32, 4, tc.minutes % 10);
  detail::put_bcd(bits, 40, 3, tc.minutes / 10);
  detail::put_bcd(bits, 48, 4, tc.hours % 10);
  detail::put_bcd(bits, 56, 2, tc.hours / 10);
  for (int g = 0; g < 8; ++g) {
    detail::put_bcd(bits, detail::kUserGroups[g], 4, static_cast<int>((user_bits >> (4 * g)) & 0xf));
  }
  for (int i = 0; i < 16; ++i) bits[64 + i] = kSyncWord[i];
  // Even number of ones keeps every frame starting on the same polarity.
  int ones = 0;
  for (bool b : bits) ones += b ? 1 : 0;
  if (ones % 2 != 0) bits[detail::polarity_bit(tc.fps)] = true;
  return bits;
}

// Unpacks and range-checks the time fields; nullopt for impossible BCD.
inline std::optional<LtcFrame> unpack_frame(const std::array<bool, 80>& bits, int fps) {
  for (int i = 0; i < 16; ++i) {
    if (bits[64 + i] != kSyncWord[i]) return std::nullopt;
  }
  const int fu = detail::get_bcd(bits, 0, 4), ft = detail::get_bcd(bits, 8, 2);
  const int su = detail::get_bcd(bits, 16, 4), st = detail::get_bcd(bits, 24, 3);
  const int mu = detail::get_bcd(bits, 32, 4), mt = detail::get_bcd(bits, 40, 3);
  const int hu = detail::get_bcd(bits, 48, 4), ht = detail::get_bcd(bits, 56, 2);
  if (fu > 9 || su > 9 || mu > 9 || hu > 9) return std::nullopt;
  LtcFrame f;
  f.timecode = Timecode{ht * 10 + hu, mt * 10 + mu, st * 10 + su, ft * 10 + fu, fps};
  if (!f.timecode.valid()) return std::nullopt;
  for (int g = 0; g < 8; ++g) {
    f.user_bits |= static_cast<std::uint32_t>(detail::get_bcd(bits, detail::kUserGroups[g], 4))
                   << (4 * g);
  }
  f.drop_frame = bits[10];
  f.color_frame = bits[11];
  return f;
}

// Biphase-mark square wave of n_frames consecutive timecodes starting at
// `start`, amplitude +/-0.8. Cell edges sit at round(h * rate / (fps * 160))
// for half-cell index h, so the buffer has round(n_frames * rate / fps) samples.
inline AudioBuffer encode_ltc(const Timecode& start, std::size_t n_frames, int sample_rate,
                              std::uint32_t user_bits = 0) {
  if (n_frames < 1) throw Error(Errc::argument_error, "n_frames must be >= 1");
  if (sample_rate < 8000) throw Error(Errc::argument_error, "sample rate must be >= 8000 Hz");
  if (!start.valid()) throw Error(Errc::argument_error, "invalid start timecode");
  const long long fps = start.fps;
  const long long rate = sample_rate;
  auto edge = [&](long long half_cell) -> std::size_t {
    const long long den = 2 * fps * 160;
    return static_cast<std::size_t>((2 * half_cell * rate + fps * 160) / den);
  };
  const long long total_halves = static_cast<long long>(n_frames) * 160;
  std::vector<double> out(edge(total_halves), 0.0);
  constexpr double kAmplitude = 0.8;
  double level = -kAmplitude;
  Timecode tc = start;
  long long h = 0;
  for (std::size_t f = 0; f < n_frames; ++f, tc = tc.next()) {
    const auto bits = pack_frame(tc, user_bits);
    for (bool bit : bits) {
      level = -level;
      for (std::size_t i = edge(h); i < edge(h + 1); ++i) out[i] = level;
      if (bit) level = -level;
      for (std::size_t i = edge(h + 1); i < edge(h + 2); ++i) out[i] = level;
      h += 2;
    }
  }
  return AudioBuffer::mono(std::move(out), sample_rate);
}

namespace detail {

enum class EdgeKind { transition, onset, end };

struct Edge {
  std::size_t sample;
  EdgeKind kind;
};

// Sign changes of the mean-removed carrier with a hysteresis of 0.25 x the
// local peak. Stretches quieter than 1e-3 count as silence; entering or
// leaving the signal produces `end`/`onset` edges.
inline std::vector<Edge> find_edges(std::span<const double> x, std::size_t window) {
  const std::size_t n = x.size();
  std::vector<Edge> edges;
  if (n == 0) return edges;
  const std::size_t half = std::max<std::size_t>(1, window / 2);

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    y[i] = x[i] - (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }

  // Sliding maximum of |y| over [i - half, i + half].
  std::vector<double> peak(n);
  std::deque<std::size_t> dq;
  std::size_t pushed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t hi = std::min(n, i + half + 1);
    for (; pushed < hi; ++pushed) {
      while (!dq.empty() && std::abs(y[dq.back()]) <= std::abs(y[pushed])) dq.pop_back();
      dq.push_back(pushed);
    }
    while (dq.front() + half < i) dq.pop_front();
    peak[i] = std::abs(y[dq.front()]);
  }

  constexpr double kSilence = 1e-3;
  int state = 0;  // 0 unknown, +1 / -1 current polarity
  std::size_t last_active = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (peak[i] < kSilence) {
      if (state != 0) {
        edges.push_back({last_active + 1, EdgeKind::end});
        state = 0;
      }
      continue;
    }
    const double thr = 0.25 * peak[i];
    int s = 0;
    if (y[i] > thr) s = 1;
    if (y[i] < -thr) s = -1;
    if (s == 0) continue;
    if (state == 0) {
      edges.push_back({i, EdgeKind::onset});
    } else if (s != state) {
      edges.push_back({i, EdgeKind::transition});
    }
    state = s;
    last_active = i;
  }
  if (state != 0) edges.push_back({last_active + 1, EdgeKind::end});
  return edges;
}

struct Bit {
  bool value;
  std::size_t start;
  std::size_t end;
};

}  // namespace detail

// Decodes every complete, sync-word-terminated frame. A frame is emitted only
// when its first bit follows the previous frame's sync word within the same
// uninterrupted run, or starts exactly at a signal onset; bits recovered
// after noise therefore never yield a frame whose head lies in the noise.
inline DecodeResult decode_ltc(const AudioBuffer& carrier, int fps = 25) {
  if (carrier.channel_count() != 1) {
    throw Error(Errc::argument_error, "decode_ltc expects a mono carrier");
  }
  if (fps < 1 || fps > 30) throw Error(Errc::argument_error, "fps out of range");
  DecodeResult result;
  const double nominal = static_cast<double>(carrier.sample_rate()) / (fps * 80.0);
  const auto window = static_cast<std::size_t>(
      std::max(1.0, std::round(static_cast<double>(carrier.sample_rate()) / fps)));
  const auto edges = detail::find_edges(carrier.channel(0), window);

  std::vector<detail::Bit> run;
  bool run_from_onset = false;
  std::size_t emitted_upto = 0;  // run bits already covered by emitted frames
  std::vector<bool> frame_end;   // frame_end[i]: run[i] closes a sync word
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t pending_half = kNone;  // start of an unpaired half cell
  double cell = nominal;

  auto reset = [&] {
    if (run.size() > emitted_upto || pending_half != kNone) ++result.discarded_runs;
    run.clear();
    frame_end.clear();
    emitted_upto = 0;
    pending_half = kNone;
    run_from_onset = false;
    cell = nominal;
  };

  auto push_bit = [&](bool value, std::size_t start, std::size_t end) {
    run.push_back({value, start, end});
    frame_end.push_back(false);
    const std::size_t len = run.size();
    if (len < 16) return;
    for (int i = 0; i < 16; ++i) {
      if (run[len - 16 + i].value != kSyncWord[i]) return;
    }
    frame_end[len - 1] = true;
    if (len < kBitsPerFrame) return;
    const std::size_t first = len - kBitsPerFrame;
    const bool locked = (first == 0 && run_from_onset) || (first > 0 && frame_end[first - 1]);
    if (!locked) return;
    std::array<bool, 80> bits{};
    for (int i = 0; i < kBitsPerFrame; ++i) {
      const auto& b = run[first + i];
      const double dur = static_cast<double>(b.end - b.start);
      if (dur < 0.75 * nominal || dur > 1.25 * nominal) return;
      bits[i] = b.value;
    }
    if (auto frame = unpack_frame(bits, fps)) {
      frame->start_sample = run[first].start;
      result.frames.push_back(*frame);
      emitted_upto = len;
    }
  };

  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const auto& a = edges[k];
    const auto& b = edges[k + 1];
    if (a.kind == detail::EdgeKind::end) {
      reset();
      continue;
    }
    if (a.kind == detail::EdgeKind::onset) {
      reset();
      run_from_onset = true;
    }
    const double d = static_cast<double>(b.sample - a.sample);
    const double ratio = d / cell;
    if (ratio < 0.25 || ratio > 1.35) {
      reset();
      continue;
    }
    if (ratio < 0.75) {
      if (pending_half == kNone) {
        pending_half = a.sample;
      } else {
        const std::size_t start = pending_half;
        pending_half = kNone;
        cell = 0.9 * cell + 0.1 * static_cast<double>(b.sample - start);
        push_bit(true, start, b.sample);
      }
    } else {
      if (pending_half != kNone) {
        // Misaligned half-cell pairing; restart from this full cell.
        reset();
      }
      cell = 0.9 * cell + 0.1 * d;
      push_bit(false, a.sample, b.sample);
    }
  }
  reset();
  return result;
}

// Maps every schedule entry to a sample position by linear interpolation
// between the two decoded frames bracketing its timecode. Entries outside
// the decoded range map to nullopt.
inline std::map<std::string, std::optional<double>> align_session(
    std::span<const LtcFrame> frames, const PlaybackSchedule& schedule) {
  if (frames.empty()) throw Error(Errc::argument_error, "no decoded LTC frames");
  schedule.validate();
  std::vector<std::pair<long long, double>> points;
  points.reserve(frames.size());
  for (const auto& f : frames) {
    points.emplace_back(f.timecode.frame_number(), static_cast<double>(f.start_sample));
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const auto& x, const auto& y) { return x.first == y.first; }),
               points.end());

  std::map<std::string, std::optional<double>> out;
  for (const auto& e : schedule.entries) {
    const double q = e.position();
    if (q < static_cast<double>(points.front().first) ||
        q > static_cast<double>(points.back().first)) {
      out[e.sentence_id] = std::nullopt;
      continue;
    }
    auto hi = std::lower_bound(points.begin(), points.end(), q,
                               [](const auto& p, double v) { return static_cast<double>(p.first) < v; });
    if (static_cast<double>(hi->first) == q) {
      out[e.sentence_id] = hi->second;
      continue;
    }
    auto lo = hi - 1;
    const double t = (q - static_cast<double>(lo->first)) /
                     static_cast<double>(hi->first - lo->first);
    out[e.sentence_id] = lo->second + t * (hi->second - lo->second);
  }
  return out;
}

// CSV with header `sentence_id,timecode`.
inline PlaybackSchedule parse_schedule_csv(std::string_view text, int fps = 25) {
  const auto table = csv::parse(text);
  const std::size_t id_col = table.column("sentence_id");
  const std::size_t tc_col = table.column("timecode");
  PlaybackSchedule s;
  for (const auto& row : table.rows) {
    const auto parsed = parse_timecode(row[tc_col], fps);
    s.entries.push_back({row[id_col], parsed.timecode, parsed.sub_frame});
  }
  s.validate();
  return s;
}

inline std::string format_alignment_csv(const PlaybackSchedule& schedule,
                                        const std::map<std::string, std::optional<double>>& starts) {
  std::string out = "sentence_id,start_sample\n";
  char buf[64];
  for (const auto& e : schedule.entries) {
    const auto& v = starts.at(e.sentence_id);
    out += csv::quote(e.sentence_id) + ",";
    if (v) {
      std::snprintf(buf, sizeof buf, "%.3f", *v);
      out += buf;
    } else {
      out += "out_of_range";
    }
    out += "\n";
  }
  return out;
}

inline std::string format_frames_csv(std::span<const LtcFrame> frames) {
  std::string out = "timecode,start_sample,user_bits\n";
  char buf[32];
  for (const auto& f : frames) {
    std::snprintf(buf, sizeof buf, "%08x", f.user_bits);
    out += f.timecode.str() + "," + std::to_string(f.start_sample) + "," + buf + "\n";
  }
  return out;
}

}  // namespace avsync::ltc

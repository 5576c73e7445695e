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

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "avsync/audio_io.hpp"
#include "avsync/ltc.hpp"

namespace avsync::ltc {
namespace {

// Sample index of half-cell boundary h in an encoded stream.
std::size_t half_cell_edge(long long h, long long rate, long long fps) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(h) * rate / (fps * 160.0)));
}

// Reads bits back from the waveform by sampling the middle of both half
// cells: a level change inside the cell is a one.
std::vector<bool> sample_bits(const AudioBuffer& a, std::size_t n_bits, int fps) {
  std::vector<bool> bits;
  const double half = a.sample_rate() / (fps * 160.0);
  for (std::size_t k = 0; k < n_bits; ++k) {
    const double x0 = a.channel(0)[static_cast<std::size_t>((2 * k + 0.5) * half)];
    const double x1 = a.channel(0)[static_cast<std::size_t>((2 * k + 1.5) * half)];
    bits.push_back((x0 > 0) != (x1 > 0));
  }
  return bits;
}

// SMPTE field layout written out by hand: (first bit, width, value).
std::array<bool, 80> reference_bits(int h, int m, int s, int f) {
  std::array<bool, 80> b{};
  auto put = [&](int first, int width, int value) {
    for (int i = 0; i < width; ++i) b[first + i] = (value >> i) & 1;
  };
  put(0, 4, f % 10);
  put(8, 2, f / 10);
  put(16, 4, s % 10);
  put(24, 3, s / 10);
  put(32, 4, m % 10);
  put(40, 3, m / 10);
  put(48, 4, h % 10);
  put(56, 2, h / 10);
  const char* sync = "0011111111111101";
  for (int i = 0; i < 16; ++i) b[64 + i] = sync[i] == '1';
  return b;
}

TEST(Timecode, SuccessorWraps) {
  EXPECT_EQ((Timecode{0, 0, 0, 24, 25}.next()), (Timecode{0, 0, 1, 0, 25}));
  EXPECT_EQ((Timecode{0, 59, 59, 24, 25}.next()), (Timecode{1, 0, 0, 0, 25}));
  EXPECT_EQ((Timecode{23, 59, 59, 24, 25}.next()), (Timecode{0, 0, 0, 0, 25}));
  EXPECT_EQ((Timecode{1, 2, 3, 4, 25}.str()), "01:02:03:04");
  EXPECT_FALSE((Timecode{0, 0, 0, 25, 25}.valid()));
  EXPECT_FALSE((Timecode{24, 0, 0, 0, 25}.valid()));
}

TEST(Timecode, Parse) {
  const auto p = parse_timecode("10:00:01:12.5");
  EXPECT_EQ(p.timecode, (Timecode{10, 0, 1, 12, 25}));
  EXPECT_DOUBLE_EQ(p.sub_frame, 0.5);
  EXPECT_THROW(parse_timecode("10:00:01"), Error);
  EXPECT_THROW(parse_timecode("10:00:01:25"), Error);
  EXPECT_THROW(parse_timecode("10:00:01:02x"), Error);
}

TEST(Frame, LayoutMatchesReference) {
  const Timecode tc{12, 34, 56, 17, 25};
  const auto bits = pack_frame(tc);
  auto ref = reference_bits(12, 34, 56, 17);
  int ones = 0;
  for (bool b : ref) ones += b;
  if (ones % 2) ref[59] = true;
  EXPECT_EQ(bits, ref);
  int total = 0;
  for (bool b : bits) total += b;
  EXPECT_EQ(total % 2, 0);
  const auto back = unpack_frame(bits, 25);
  ASSERT_TRUE(back);
  EXPECT_EQ(back->timecode, tc);
}

TEST(Frame, UserBitsRoundTrip) {
  const auto bits = pack_frame(Timecode{1, 2, 3, 4, 25}, 0xdeadbeef);
  const auto f = unpack_frame(bits, 25);
  ASSERT_TRUE(f);
  EXPECT_EQ(f->user_bits, 0xdeadbeefu);
}

TEST(Encode, OneFrameLength) {
  const auto a = encode_ltc(Timecode{}, 1, 48000);
  EXPECT_EQ(a.frames(), 1920u);
  for (double x : a.channel(0)) EXPECT_EQ(std::abs(x), 0.8);
  EXPECT_THROW(encode_ltc(Timecode{}, 0, 48000), Error);
  EXPECT_THROW(encode_ltc(Timecode{}, 1, 4000), Error);
}

TEST(Encode, WaveformCarriesPackedBits) {
  const Timecode start{3, 14, 15, 9, 25};
  const auto a = encode_ltc(start, 3, 48000);
  const auto bits = sample_bits(a, 240, 25);
  Timecode tc = start;
  for (int f = 0; f < 3; ++f, tc = tc.next()) {
    const auto ref = pack_frame(tc);
    for (int i = 0; i < 80; ++i) ASSERT_EQ(bits[80 * f + i], ref[i]) << f << ":" << i;
  }
  // Biphase mark: the level flips at every cell boundary.
  const double half = 48000 / 4000.0;
  for (int k = 1; k < 240; ++k) {
    const double before = a.channel(0)[static_cast<std::size_t>((2 * k - 0.5) * half)];
    const double after = a.channel(0)[static_cast<std::size_t>((2 * k + 0.5) * half)];
    ASSERT_NE(before > 0, after > 0);
  }
}

TEST(Decode, Silence) {
  const auto r = decode_ltc(AudioBuffer::mono(std::vector<double>(48000, 0.0), 48000));
  EXPECT_TRUE(r.frames.empty());
}

TEST(Decode, TenFramesFromZero) {
  const auto r = decode_ltc(encode_ltc(Timecode{}, 10, 48000));
  ASSERT_EQ(r.frames.size(), 10u);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(r.frames[k].timecode, (Timecode{0, 0, 0, k, 25}));
}

TEST(Decode, FiftyFramesSpacing) {
  const Timecode start{9, 59, 59, 20, 25};
  const auto r = decode_ltc(encode_ltc(start, 50, 48000));
  ASSERT_EQ(r.frames.size(), 50u);
  for (std::size_t k = 0; k < 50; ++k) {
    EXPECT_EQ(r.frames[k].timecode, Timecode::from_frame_number(start.frame_number() + k));
    EXPECT_NEAR(static_cast<double>(r.frames[k].start_sample), static_cast<double>(half_cell_edge(160 * k, 48000, 25)), 1.0);
    if (k > 0) {
      const double d = static_cast<double>(r.frames[k].start_sample) - static_cast<double>(r.frames[k - 1].start_sample);
      EXPECT_NEAR(d, 1920.0, 1.0);
    }
  }
}

TEST(Decode, RandomStartsAndRates) {
  std::mt19937_64 rng(11);
  const int rates[] = {8000, 16000, 44100, 48000, 96000};
  for (int trial = 0; trial < 100; ++trial) {
    const auto start = Timecode::from_frame_number(static_cast<long long>(rng() % (24LL * 3600 * 25)));
    const int rate = rates[trial % 5];
    const auto r = decode_ltc(encode_ltc(start, 4, rate));
    ASSERT_EQ(r.frames.size(), 4u) << start.str() << " @" << rate;
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_EQ(r.frames[k].timecode, Timecode::from_frame_number(start.frame_number() + k));
    }
  }
}

TEST(Decode, PolarityAndGainInvariant) {
  const auto a = encode_ltc(Timecode{5, 6, 7, 8, 25}, 12, 48000, 0x1234);
  const auto r = decode_ltc(a);
  for (double g : {-1.0, 0.1, -0.05}) {
    const auto s = decode_ltc(gain(a, g));
    ASSERT_EQ(s.frames.size(), r.frames.size());
    for (std::size_t k = 0; k < r.frames.size(); ++k) {
      EXPECT_EQ(s.frames[k].timecode, r.frames[k].timecode);
      EXPECT_EQ(s.frames[k].start_sample, r.frames[k].start_sample);
      EXPECT_EQ(s.frames[k].user_bits, 0x1234u);
    }
  }
}

TEST(Decode, LeadingSilenceOffsetsStart) {
  const auto a = delay(encode_ltc(Timecode{0, 0, 10, 0, 25}, 5, 48000), 0.1234);
  const auto r = decode_ltc(a);
  ASSERT_EQ(r.frames.size(), 5u);
  EXPECT_NEAR(static_cast<double>(r.frames[0].start_sample), 5923.0, 1.0);
}

TEST(Decode, NoiseSpliceLosesOnlyTheGap) {
  const Timecode start{1, 0, 0, 0, 25};
  auto a = encode_ltc(start, 50, 48000);
  auto samples = a.channels();
  const std::size_t gap_begin = 40000, gap_end = gap_begin + 4800;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.3);
  for (std::size_t i = gap_begin; i < gap_end; ++i) samples[0][i] = std::clamp(g(rng), -1.0, 1.0);
  const auto r = decode_ltc(AudioBuffer(samples, 48000));
  std::size_t before = 0, after = 0;
  for (const auto& f : r.frames) {
    const auto k = static_cast<long long>(f.timecode.frame_number() - start.frame_number());
    ASSERT_GE(k, 0);
    ASSERT_LT(k, 50);
    EXPECT_NEAR(static_cast<double>(f.start_sample), static_cast<double>(half_cell_edge(160 * k, 48000, 25)), 1.0);
    const std::size_t end = f.start_sample + 1920;
    EXPECT_TRUE(end <= gap_begin + 1 || f.start_sample >= gap_end) << f.timecode.str();
    (f.start_sample < gap_begin ? before : after)++;
  }
  EXPECT_EQ(before, 40000u / 1920u);
  // Frames that start after the gap and after the first sync word past it.
  const std::size_t first_after = (gap_end + 1919) / 1920 + 1;
  EXPECT_GE(after, 50 - first_after);
  EXPECT_GE(r.discarded_runs, 1u);
}

TEST(Decode, StereoCarrierChannel) {
  const auto ltc_track = encode_ltc(Timecode{2, 0, 0, 0, 25}, 25, 48000);
  std::vector<double> speech(ltc_track.frames());
  for (std::size_t i = 0; i < speech.size(); ++i) speech[i] = 0.3 * std::sin(0.01 * static_cast<double>(i));
  const std::vector<AudioBuffer> monos{AudioBuffer::mono(speech, 48000), ltc_track};
  const auto stereo = read_wav(write_wav(stack_channels(monos)));
  const auto r = decode_ltc(extract_channel(stereo, 1));
  ASSERT_EQ(r.frames.size(), 25u);
  EXPECT_EQ(r.frames.front().timecode, (Timecode{2, 0, 0, 0, 25}));
  EXPECT_TRUE(decode_ltc(extract_channel(stereo, 0)).frames.empty());
}

TEST(Align, ExactAndInterpolated) {
  std::vector<LtcFrame> frames;
  for (int k = 0; k < 4; ++k) {
    LtcFrame f;
    f.timecode = Timecode::from_frame_number(100 + k);
    f.start_sample = 1000 + 1920 * static_cast<std::size_t>(k);
    frames.push_back(f);
  }
  PlaybackSchedule s;
  s.entries = {{"c", Timecode::from_frame_number(99), 0.0},
               {"a", Timecode::from_frame_number(101), 0.0},
               {"b", Timecode::from_frame_number(101), 0.5},
               {"d", Timecode::from_frame_number(103), 0.0},
               {"e", Timecode::from_frame_number(103), 0.25}};
  const auto m = align_session(frames, s);
  EXPECT_EQ(*m.at("a"), 2920.0);
  EXPECT_EQ(*m.at("b"), 3880.0);
  EXPECT_FALSE(m.at("c"));
  EXPECT_EQ(*m.at("d"), 1000.0 + 3 * 1920.0);
  EXPECT_FALSE(m.at("e"));
  EXPECT_THROW(align_session({}, s), Error);
}

TEST(Align, SyntheticSessionWithinOneSample) {
  const double lead = 0.3712;
  const int rate = 48000;
  const Timecode start{10, 0, 0, 0, 25};
  const auto carrier = delay(encode_ltc(start, 250, rate), lead);
  const auto frames = decode_ltc(carrier).frames;
  ASSERT_EQ(frames.size(), 250u);
  PlaybackSchedule s;
  std::mt19937_64 rng(5);
  double pos = 0.0;
  for (int i = 0; i < 40; ++i) {
    pos += 1.0 + static_cast<double>(rng() % 5000) / 1000.0;
    const auto whole = static_cast<long long>(pos);
    s.entries.push_back({"s" + std::to_string(i), Timecode::from_frame_number(start.frame_number() + whole),
                         pos - static_cast<double>(whole)});
  }
  const auto m = align_session(frames, s);
  const double offset = std::llround(lead * rate);
  for (const auto& e : s.entries) {
    const double frames_in = static_cast<double>(e.start.frame_number() - start.frame_number()) + e.sub_frame;
    ASSERT_TRUE(m.at(e.sentence_id));
    EXPECT_NEAR(*m.at(e.sentence_id), offset + frames_in * rate / 25.0, 1.0) << e.sentence_id;
  }
}

TEST(Schedule, CsvAndValidation) {
  const auto s = parse_schedule_csv("sentence_id,timecode\nx,00:00:01:00\ny,00:00:01:00.5\n");
  ASSERT_EQ(s.entries.size(), 2u);
  EXPECT_DOUBLE_EQ(s.entries[1].position(), 25.5);
  EXPECT_THROW(parse_schedule_csv("sentence_id,timecode\nx,00:00:01:00\nx,00:00:02:00\n"), Error);
  EXPECT_THROW(parse_schedule_csv("sentence_id,timecode\nx,00:00:02:00\ny,00:00:01:00\n"), Error);
  const std::map<std::string, std::optional<double>> starts{{"x", 12.0}, {"y", std::nullopt}};
  EXPECT_EQ(format_alignment_csv(s, starts), "sentence_id,start_sample\nx,12.000\ny,out_of_range\n");
}

}  // namespace
}  // namespace avsync::ltc

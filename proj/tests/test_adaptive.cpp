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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "avsync/adaptive.hpp"
#include "avsync/error.hpp"
#include "avsync/random.hpp"

namespace avsync {
namespace {

const Condition kAVNoiseClosed{Modality::AV, Background::noise, ResponseFormat::closed};
const Condition kAOQuietOpen{Modality::AO, Background::quiet, ResponseFormat::open};
const Condition kVO{Modality::VO, Background::noise, ResponseFormat::closed};

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return Errc::io_error;
}

TEST(Condition, NineValidCombinations) {
  int valid = 0;
  for (auto m : {Modality::AO, Modality::AV, Modality::VO}) {
    for (auto b : {Background::noise, Background::quiet}) {
      for (auto f : {ResponseFormat::open, ResponseFormat::closed}) valid += Condition{m, b, f}.valid();
    }
  }
  EXPECT_EQ(valid, 9);
  for (const auto& c : Condition::all()) {
    EXPECT_TRUE(c.valid());
    EXPECT_EQ(Condition::parse(c.name()), c);
  }
  EXPECT_EQ(kAVNoiseClosed.name(), "AVNoiseClosed");
  EXPECT_THROW(Condition::parse("VOQuietOpen"), Error);
}

TEST(InitTrack, StartingLevels) {
  EXPECT_EQ(init_track(kAVNoiseClosed).levels, std::vector<double>{-5.0});
  EXPECT_EQ(init_track(kAOQuietOpen).levels, std::vector<double>{60.0});
  const auto vo = init_track(kVO);
  EXPECT_TRUE(vo.levels.empty());
  EXPECT_EQ(vo.fixed_noise_spl, 65.0);
  EXPECT_THROW(init_track({Modality::VO, Background::quiet, ResponseFormat::open}), Error);
}

TEST(UpdateLevel, Examples) {
  EXPECT_EQ(level_step(0.8, 0, Background::noise), 0.0);
  EXPECT_NEAR(level_step(1.0, 0, Background::noise), -1.5 * 0.2 / 0.15, 1e-12);
  EXPECT_NEAR(level_step(1.0, 0, Background::noise), -2.0, 1e-12);
  EXPECT_NEAR(level_step(0.0, 0, Background::noise), 8.0, 1e-12);

  auto t = init_track(kAVNoiseClosed);
  EXPECT_NEAR(update_level(t, 5), -7.0, 1e-12);
  EXPECT_NEAR(update_level(t, 4), -7.0, 1e-12);
  EXPECT_EQ(t.reversals, 0);
  // Up after down is the first reversal; the step uses the count before it.
  EXPECT_NEAR(update_level(t, 0), 1.0, 1e-12);
  EXPECT_EQ(t.reversals, 1);
  EXPECT_NEAR(update_level(t, 5), 1.0 - 1.5 / 1.41 * 0.2 / 0.15, 1e-12);
  EXPECT_EQ(t.reversals, 2);
}

TEST(UpdateLevel, StepFactorShrinksToFloor) {
  const AdaptiveConfig cfg;
  for (int r = 0; r < 40; ++r) {
    const double a = cfg.step_factor(r), b = cfg.step_factor(r + 1);
    if (a > 0.1) EXPECT_LT(b, a);
    else EXPECT_EQ(b, 0.1);
    EXPECT_GE(b, 0.1);
  }
  EXPECT_EQ(cfg.step_factor(0), 1.5);
}

TEST(UpdateLevel, Errors) {
  auto vo = init_track(kVO);
  EXPECT_EQ(code_of([&] { update_level(vo, 3); }), Errc::usage_error);
  auto t = init_track(kAVNoiseClosed);
  EXPECT_EQ(code_of([&] { update_level(t, 6); }), Errc::argument_error);
  for (int k = 0; k < 20; ++k) update_level(t, 4);
  EXPECT_EQ(code_of([&] { update_level(t, 4); }), Errc::usage_error);
}

TEST(UpdateLevel, LevelsStayWithinHardBounds) {
  auto down = init_track(kAVNoiseClosed);
  auto up = init_track(kAOQuietOpen);
  for (int k = 0; k < 20; ++k) {
    update_level(down, 5);
    update_level(up, 0);
  }
  for (double l : down.levels) EXPECT_GE(l, -40.0);
  for (double l : up.levels) EXPECT_LE(l, 90.0);
  auto bottom = init_track(kAOQuietOpen);
  for (int k = 0; k < 20; ++k) update_level(bottom, 5);
  for (double l : bottom.levels) EXPECT_GE(l, -20.0);
}

TEST(EstimateSrt, StationaryTrack) {
  auto t = init_track(kAVNoiseClosed);
  t.levels = {-10.0};
  for (int k = 0; k < 20; ++k) update_level(t, 4);
  const auto e = estimate_srt(t);
  EXPECT_EQ(e.srt_raw, -10.0);
  EXPECT_FALSE(e.clamped);
}

TEST(EstimateSrt, MeanOfLevelsElevenToTwentyOne) {
  auto t = init_track(kAVNoiseClosed);
  Rng rng(5);
  for (int k = 0; k < 20; ++k) update_level(t, static_cast<int>(rng() % 6));
  ASSERT_EQ(t.levels.size(), 21u);
  double s = 0.0;
  for (std::size_t k = 10; k < 21; ++k) s += t.levels[k];
  EXPECT_NEAR(estimate_srt(t).srt_raw, s / 11.0, 1e-12);
}

TEST(EstimateSrt, ClampExamples) {
  auto e = clamp_srt(-23.4, Background::noise);
  EXPECT_EQ(e.srt_clamped, -20.0);
  EXPECT_TRUE(e.clamped);
  EXPECT_EQ(e.srt_raw, -23.4);
  e = clamp_srt(12.3, Background::quiet);
  EXPECT_EQ(e.srt_clamped, 12.3);
  EXPECT_FALSE(e.clamped);
  e = clamp_srt(-0.5, Background::quiet);
  EXPECT_EQ(e.srt_clamped, 0.0);
  EXPECT_TRUE(e.clamped);
  e = clamp_srt(-20.0, Background::noise);
  EXPECT_FALSE(e.clamped);
}

TEST(EstimateSrt, ClampProperty) {
  Rng rng(17);
  for (int k = 0; k < 2000; ++k) {
    const double raw = -45.0 + 60.0 * uniform01(rng);
    const auto bg = k % 2 ? Background::noise : Background::quiet;
    const auto e = clamp_srt(raw, bg);
    EXPECT_GE(e.srt_clamped - e.srt_raw, 0.0);
    EXPECT_EQ(e.srt_clamped - e.srt_raw > 0.0, e.clamped);
  }
}

TEST(EstimateSrt, Errors) {
  auto t = init_track(kAVNoiseClosed);
  for (int k = 0; k < 19; ++k) update_level(t, 4);
  EXPECT_EQ(code_of([&] { estimate_srt(t); }), Errc::incomplete_track);
  auto vo = init_track(kVO);
  EXPECT_EQ(code_of([&] { estimate_srt(vo); }), Errc::usage_error);
  EXPECT_EQ(code_of([&] { vo_score(t); }), Errc::usage_error);
}

TEST(VoScore, Examples) {
  for (int words : {5, 0}) {
    auto vo = init_track(kVO);
    for (int k = 0; k < 20; ++k) record_vo_response(vo, words);
    EXPECT_EQ(vo_score(vo), words * 20.0);
  }
  auto half = init_track(kVO);
  for (int k = 0; k < 20; ++k) record_vo_response(half, k % 2 ? 2 : 3);
  EXPECT_DOUBLE_EQ(vo_score(half), 50.0);
  auto incomplete = init_track(kVO);
  record_vo_response(incomplete, 5);
  EXPECT_EQ(code_of([&] { vo_score(incomplete); }), Errc::incomplete_track);
}

// Stationary logistic listener simulated here with its own binomial draws.
TEST(Convergence, MeanSrtNearEightyPercentPoint) {
  const double m50 = -9.4;
  const double sigma = 1.0 / (4.0 * 0.15);
  const double target = m50 + sigma * std::log(4.0);
  std::mt19937 gen(2024);
  double sum = 0.0;
  const int runs = 200;
  for (int run = 0; run < runs; ++run) {
    auto t = init_track({Modality::AO, Background::noise, ResponseFormat::closed});
    for (int k = 0; k < 20; ++k) {
      const double p = 1.0 / (1.0 + std::exp(-(t.levels.back() - m50) / sigma));
      std::binomial_distribution<int> words(5, p);
      update_level(t, words(gen));
    }
    for (double l : t.levels) {
      EXPECT_GE(l, -40.0);
      EXPECT_LE(l, 20.0);
    }
    sum += estimate_srt(t).srt_raw;
  }
  EXPECT_NEAR(sum / runs, target, 0.5);
}

TEST(TrackCsv, Format) {
  auto t = init_track(kAVNoiseClosed);
  update_level(t, 5);
  update_level(t, 0);
  EXPECT_EQ(format_track_csv(t),
            "sentence_idx,level,words_correct,reversals\n1,-5.0000,5,0\n2,-7.0000,0,1\n");
  auto vo = init_track(kVO);
  record_vo_response(vo, 3);
  EXPECT_EQ(format_track_csv(vo), "sentence_idx,level,words_correct,reversals\n1,NA,3,0\n");
}

}  // namespace
}  // namespace avsync

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
#include <vector>

#include <gtest/gtest.h>

#include "avsync/adaptive.hpp"
#include "avsync/listener.hpp"
#include "avsync/mst.hpp"
#include "avsync/random.hpp"

namespace avsync {
namespace {

const Condition kAONoise{Modality::AO, Background::noise, ResponseFormat::closed};
const Condition kAVNoise{Modality::AV, Background::noise, ResponseFormat::closed};
const Condition kAOQuiet{Modality::AO, Background::quiet, ResponseFormat::open};
const Condition kAVQuiet{Modality::AV, Background::quiet, ResponseFormat::open};
const Condition kVO{Modality::VO, Background::noise, ResponseFormat::closed};

ListenerProfile untrained(double v, double g) {
  ListenerProfile p;
  p.v = v;
  p.visual_gain = g;
  p.training_amplitude = 0.0;
  p.retest_jitter = 0.0;
  return p;
}

TEST(Population, VMomentsOverTenThousand) {
  PopulationConfig cfg;
  cfg.n_listeners = 10000;
  const auto pop = sample_population(cfg, 99);
  ASSERT_EQ(pop.size(), 10000u);
  double s = 0.0, ss = 0.0;
  for (const auto& p : pop) {
    ASSERT_GE(p.v, 0.0);
    ASSERT_LE(p.v, 1.0);
    s += p.v;
  }
  const double mean = s / 10000.0;
  for (const auto& p : pop) ss += (p.v - mean) * (p.v - mean);
  const double sd = std::sqrt(ss / 9999.0);
  EXPECT_NEAR(mean, 0.50, 0.02);
  EXPECT_NEAR(sd, 0.214, 0.02);
}

TEST(Population, DegenerateAndDeterministic) {
  PopulationConfig cfg;
  cfg.n_listeners = 50;
  cfg.v_std = 0.0;
  for (const auto& p : sample_population(cfg, 1)) EXPECT_EQ(p.v, 0.5);

  cfg.v_std = 0.214;
  const auto a = sample_population(cfg, 3);
  const auto b = sample_population(cfg, 3);
  const auto c = sample_population(cfg, 4);
  int differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].v, b[i].v);
    EXPECT_EQ(a[i].m50_noise, b[i].m50_noise);
    differ += a[i].v != c[i].v;
  }
  EXPECT_GT(differ, 45);
}

TEST(Population, ListenerStreamsIgnorePopulationSize) {
  PopulationConfig small, big;
  small.n_listeners = 5;
  big.n_listeners = 40;
  const auto a = sample_population(small, 8);
  const auto b = sample_population(big, 8);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].v, b[i].v);
}

TEST(Population, Validation) {
  PopulationConfig cfg;
  cfg.n_listeners = 0;
  EXPECT_THROW(sample_population(cfg, 1), Error);
  cfg.n_listeners = 3;
  cfg.v_std = -0.1;
  EXPECT_THROW(sample_population(cfg, 1), Error);
  ListenerProfile p;
  p.sigma = 0.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(PWord, Examples) {
  const auto p = untrained(0.5, 0.0);
  EXPECT_DOUBLE_EQ(p_word(p, p.m50_noise, kAONoise, 0), 0.5);
  EXPECT_DOUBLE_EQ(p_word(p, p.m50_quiet, kAOQuiet, 0), 0.5);
  for (double level : {-40.0, -10.0, 20.0}) EXPECT_EQ(p_word(p, level, kVO, 0), 0.5);
  // p_a = 0.6 at m + sigma * ln 1.5; probability summation with v = 0.5 gives 0.8.
  const double level = p.m50_noise + p.sigma * std::log(1.5);
  EXPECT_NEAR(p_word(p, level, kAONoise, 0), 0.6, 1e-12);
  EXPECT_NEAR(p_word(p, level, kAVNoise, 0), 0.8, 1e-12);
}

TEST(PWord, VisualGainShiftsTheAudioTerm) {
  auto p = untrained(0.4, 5.0);
  const double pa = p_word(p, -8.0 + 5.0 * 0.4, kAONoise, 0);
  EXPECT_NEAR(p_word(p, -8.0, kAVNoise, 0), 1.0 - (1.0 - pa) * 0.6, 1e-12);
}

TEST(PWord, DetectionFloor) {
  const auto p = untrained(0.3, 6.0);
  EXPECT_EQ(p_word(p, -16.91, kAONoise, 0), 0.0);
  EXPECT_GT(p_word(p, -16.9, kAONoise, 0), 0.0);
  EXPECT_EQ(p_word(p, -19.91, kAVNoise, 0), 0.3);
  EXPECT_GT(p_word(p, -19.9, kAVNoise, 0), 0.3);
  for (double level : {-20.0, -25.0, -40.0, -1e6}) EXPECT_EQ(p_word(p, level, kAVNoise, 0), p.v);
  // The floor is a property of noise; quiet has none.
  EXPECT_GT(p_word(p, -18.0, kAOQuiet, 0), 0.0);
}

TEST(PWord, MonotoneAndAudiovisualDominance) {
  PopulationConfig cfg;
  cfg.n_listeners = 40;
  const auto pop = sample_population(cfg, 12);
  for (const auto& p : pop) {
    for (const auto& [ao, av] : {std::pair{kAONoise, kAVNoise}, std::pair{kAOQuiet, kAVQuiet}}) {
      double prev_ao = -1.0, prev_av = -1.0;
      for (double level = -40.0; level <= 90.0; level += 0.25) {
        const int trial = static_cast<int>(level + 40.0) % 7;
        const double a = p_word(p, level, ao, trial);
        const double b = p_word(p, level, av, trial);
        EXPECT_GE(b, a);
        EXPECT_GE(b, p.v);
        const double a0 = p_word(p, level, ao, 0);
        const double b0 = p_word(p, level, av, 0);
        EXPECT_GE(a0, prev_ao);
        EXPECT_GE(b0, prev_av);
        prev_ao = a0;
        prev_av = b0;
      }
    }
  }
}

TEST(PWord, TrainingLowersTheMidpoint) {
  ListenerProfile p;
  p.retest_jitter = 0.0;
  double prev = effective_midpoint(p, kAVNoise, 0);
  EXPECT_DOUBLE_EQ(prev, p.m50_noise + p.training_amplitude);
  for (int k = 1; k < 30; ++k) {
    const double m = effective_midpoint(p, kAVNoise, k);
    EXPECT_LE(m, prev);
    prev = m;
  }
  EXPECT_NEAR(prev, p.m50_noise, 1e-3);
  p.closed_advantage = 1.8;
  EXPECT_DOUBLE_EQ(effective_midpoint(p, kAVNoise, 3) + 1.8,
                   effective_midpoint(p, {Modality::AV, Background::noise, ResponseFormat::open}, 3));
}

TEST(Respond, Extremes) {
  const mst::MatrixSentence s{1, {3, 1, 4, 1, 5}};
  Rng rng(1);
  for (auto f : {ResponseFormat::open, ResponseFormat::closed}) {
    for (int k = 0; k < 200; ++k) {
      EXPECT_EQ(mst::score_response(s, respond_with_probability(1.0, s, f, rng)), 5);
      EXPECT_EQ(mst::score_response(s, respond_with_probability(0.0, s, f, rng)), 0);
    }
  }
}

TEST(Respond, BinomialMean) {
  const mst::MatrixSentence s{1, {0, 9, 2, 7, 4}};
  Rng rng(2);
  long total = 0;
  for (int k = 0; k < 10000; ++k) {
    total += mst::score_response(s, respond_with_probability(0.8, s, ResponseFormat::closed, rng));
  }
  EXPECT_NEAR(total / 10000.0, 4.0, 0.05);
}

TEST(Respond, OpenSetMissesAreHalfNoAnswer) {
  const mst::MatrixSentence s{1, {0, 0, 0, 0, 0}};
  Rng rng(4);
  int none = 0, wrong = 0;
  for (int k = 0; k < 4000; ++k) {
    const auto open = respond_with_probability(0.0, s, ResponseFormat::open, rng);
    const auto closed = respond_with_probability(0.0, s, ResponseFormat::closed, rng);
    for (std::size_t c = 0; c < mst::kCategories; ++c) {
      ASSERT_TRUE(closed.words[c].has_value());
      if (open.words[c]) ++wrong;
      else ++none;
    }
  }
  EXPECT_NEAR(none / 20000.0, 0.5, 0.02);
  EXPECT_EQ(none + wrong, 20000);
}

TEST(Respond, SameStreamSameResponses) {
  const auto p = untrained(0.5, 4.0);
  const mst::MatrixSentence s{1, {1, 2, 3, 4, 5}};
  Rng a = make_stream(10, 3), b = make_stream(10, 3);
  for (int k = 0; k < 100; ++k) {
    const auto ra = respond(p, s, -8.0, kAVNoise, 2, a);
    const auto rb = respond(p, s, -8.0, kAVNoise, 2, b);
    EXPECT_EQ(ra.words, rb.words);
  }
}

TEST(PopulationCsv, Header) {
  PopulationConfig cfg;
  cfg.n_listeners = 2;
  const auto csv = format_population_csv(sample_population(cfg, 1));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "listener_id,m50_noise,m50_quiet,v,sigma,visual_gain,training_amplitude,training_tau,retest_jitter");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

}  // namespace
}  // namespace avsync

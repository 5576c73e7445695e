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

#include "avsync/error.hpp"
#include "avsync/random.hpp"
#include "avsync/stats.hpp"

namespace avsync {
namespace {

using V = std::vector<double>;

// Direct textbook formula, written independently of stats::pearson_r.
double pearson_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

TEST(Pearson, Examples) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_NEAR(stats::pearson_r(x, x), 1.0, 1e-15);
  std::vector<double> y;
  for (double v : x) y.push_back(-2.0 * v + 7.0);
  EXPECT_NEAR(stats::pearson_r(x, y), -1.0, 1e-15);
  // Deviations: x (-1.5, -0.5, 0.5, 1.5), y (-1.75, 0.25, -0.75, 2.25).
  // Sxy = 5.5, Sxx = 5, Syy = 8.75.
  EXPECT_NEAR(stats::pearson_r(x, V{1, 3, 2, 5}), 5.5 / std::sqrt(5.0 * 8.75), 1e-14);
}

TEST(Pearson, MatchesRawSumFormula) {
  Rng rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng() % 40;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = 0.3 * x[i] + g(rng);
    }
    const double r = stats::pearson_r(x, y);
    EXPECT_NEAR(r, pearson_oracle(x, y), 1e-10);
    EXPECT_GE(r, -1.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(Pearson, Errors) {
  try {
    stats::pearson_r(V{1, 1, 1}, V{1, 2, 3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::undefined_correlation);
  }
  EXPECT_THROW(stats::pearson_r(V{1, 2}, V{1, 2}), Error);
  EXPECT_THROW(stats::pearson_r(V{1, 2, 3}, V{1, 2}), Error);
}

TEST(Descriptive, Examples) {
  auto d = stats::descriptive(std::vector<double>{3, 3, 3});
  EXPECT_EQ(d.mean, 3.0);
  EXPECT_EQ(d.std, 0.0);
  EXPECT_DOUBLE_EQ(d.rms, 3.0);

  d = stats::descriptive(std::vector<double>{0, 1});
  EXPECT_DOUBLE_EQ(d.mean, 0.5);
  EXPECT_NEAR(d.std, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(d.rms, std::sqrt(0.5), 1e-15);

  d = stats::descriptive(std::vector<double>{-1, 1});
  EXPECT_EQ(d.mean, 0.0);
  EXPECT_DOUBLE_EQ(d.rms, 1.0);
}

TEST(Descriptive, Errors) {
  EXPECT_THROW(stats::mean(std::vector<double>{}), Error);
  EXPECT_THROW(stats::sample_std(std::vector<double>{1.0}), Error);
  EXPECT_THROW(stats::rms(std::vector<double>{}), Error);
}

TEST(Quantile, Interpolates) {
  EXPECT_DOUBLE_EQ(stats::median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(stats::median({4, 1, 2, 3}), 2.5);
  EXPECT_DOUBLE_EQ(stats::quantile({0, 10}, 0.25), 2.5);
  EXPECT_DOUBLE_EQ(stats::quantile({5}, 0.9), 5.0);
}

}  // namespace
}  // namespace avsync

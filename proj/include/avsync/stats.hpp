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
#include <span>
#include <vector>

#include "avsync/error.hpp"

namespace avsync::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw Error(Errc::argument_error, "mean of an empty sequence");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// n - 1 denominator.
inline double sample_std(std::span<const double> x) {
  if (x.size() < 2) throw Error(Errc::argument_error, "sample std needs at least 2 values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

inline double rms(std::span<const double> x) {
  if (x.empty()) throw Error(Errc::argument_error, "RMS of an empty sequence");
  double ss = 0.0;
  for (double v : x) ss += v * v;
  return std::sqrt(ss / static_cast<double>(x.size()));
}

struct Descriptive {
  double mean = 0.0;
  double std = 0.0;
  double rms = 0.0;
};

inline Descriptive descriptive(std::span<const double> x) {
  return {mean(x), sample_std(x), rms(x)};
}

// Sample Pearson correlation.
inline double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::argument_error, "pearson_r needs equal lengths");
  if (x.size() < 3) throw Error(Errc::argument_error, "pearson_r needs at least 3 pairs");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(Errc::undefined_correlation, "constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Linear interpolation between order statistics (q in [0, 1]).
inline double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw Error(Errc::argument_error, "quantile of an empty sequence");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

}  // namespace avsync::stats

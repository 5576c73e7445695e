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

// Finds the visual gain g at which the default population's mean AV-minus-AO
// benefit in noise equals the target, using common random numbers across g.

#include <cstdio>
#include <cstdlib>
#include <vector>

#include <CLI11.hpp>

#include "avsync/experiment.hpp"

namespace {

struct Outcome {
  double benefit = 0.0;
  double training_gain = 0.0;  // curve index 0 minus index 4
};

Outcome evaluate(avsync::ExperimentConfig cfg, double g, const std::vector<std::uint64_t>& seeds,
                 unsigned threads) {
  cfg.population.visual_gain = g;
  Outcome o;
  for (auto seed : seeds) {
    const auto rep = avsync::summarize(avsync::simulate(cfg, seed, threads));
    o.benefit += rep.av_benefit_noise.mean;
    o.training_gain += rep.training_curve.at(0) - rep.training_curve.at(4);
  }
  o.benefit /= static_cast<double>(seeds.size());
  o.training_gain /= static_cast<double>(seeds.size());
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibrate the audiovisual gain of the simulated listeners"};
  double target = 5.0;
  std::uint64_t first_seed = 1001;
  std::size_t n_seeds = 20;
  unsigned threads = 1;
  app.add_option("--target", target, "mean AV benefit in noise, dB")->capture_default_str();
  app.add_option("--first-seed", first_seed)->capture_default_str();
  app.add_option("--seeds", n_seeds, "number of master seeds")->capture_default_str();
  app.add_option("--threads", threads)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::vector<std::uint64_t> seeds;
  for (std::size_t k = 0; k < n_seeds; ++k) seeds.push_back(first_seed + k);
  const avsync::ExperimentConfig cfg;
  double lo = 0.0, hi = 20.0;
  const auto at_lo = evaluate(cfg, lo, seeds, threads);
  const auto at_hi = evaluate(cfg, hi, seeds, threads);
  std::printf("g=%.4f benefit=%.4f\ng=%.4f benefit=%.4f\n", lo, at_lo.benefit, hi, at_hi.benefit);
  if (at_lo.benefit > target || at_hi.benefit < target) {
    std::fprintf(stderr, "target %.3f dB not bracketed by g in [%.1f, %.1f]\n", target, lo, hi);
    return 2;
  }
  for (int it = 0; it < 30; ++it) {
    const double mid = 0.5 * (lo + hi);
    (evaluate(cfg, mid, seeds, threads).benefit < target ? lo : hi) = mid;
  }
  const double g = 0.5 * (lo + hi);
  const auto o = evaluate(cfg, g, seeds, threads);
  std::printf("visual_gain=%.4f benefit=%.4f training_gain=%.4f\n", g, o.benefit, o.training_gain);
  return 0;
}

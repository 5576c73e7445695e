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


// Test/retest session orchestration for simulated listeners and the summary
// statistics computed from the raw per-trial results.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "avsync/adaptive.hpp"
#include "avsync/error.hpp"
#include "avsync/listener.hpp"
#include "avsync/mst.hpp"
#include "avsync/parallel.hpp"
#include "avsync/random.hpp"
#include "avsync/stats.hpp"

namespace avsync {

struct PlanConfig {
  std::size_t n_lists = 45;
  std::uint64_t list_seed = 45;
  std::size_t training_lists_test = 4;
  std::size_t training_lists_retest = 1;
  bool retest = true;
  // Listeners trained in the closed-set format; negative means round(n * 13 / 28).
  long closed_trained = -1;
  std::vector<Condition> conditions = [] {
    const auto all = Condition::all();
    return std::vector<Condition>(all.begin(), all.end());
  }();
};

struct ExperimentConfig {
  PopulationConfig population;
  AdaptiveConfig adaptive;
  PlanConfig plan;
};

enum class Phase { training, test };

struct PlannedTrack {
  int session = 1;
  Phase phase = Phase::test;
  Condition condition;
  std::size_t list_index = 0;
  int trial_index = 0;   // lists this listener completed before this one
  int curve_index = -1;  // position on the trained-format AV-noise curve
};

struct ListenerPlan {
  ResponseFormat trained_format = ResponseFormat::closed;
  std::vector<PlannedTrack> tracks;
};

struct SessionPlan {
  std::vector<ListenerPlan> listeners;
};

namespace stream_purpose {
inline constexpr std::uint64_t plan_order = 3;
inline constexpr std::uint64_t format_assignment = 4;
}  // namespace stream_purpose

namespace detail {

template <typename T>
void shuffle_with(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace detail

// Per session: training lists in AV noise with the trained format, then the
// trained format's conditions in shuffled order, then the other format's.
// Lists are dealt round-robin from a per-listener offset and never repeat
// within a session.
inline SessionPlan make_plan(std::size_t n_listeners, const PlanConfig& cfg, std::uint64_t seed) {
  if (n_listeners == 0) throw Error(Errc::plan_error, "no listeners");
  for (const auto& c : cfg.conditions) {
    if (!c.valid()) throw Error(Errc::plan_error, "invalid condition " + c.name());
  }
  const std::size_t per_test = cfg.training_lists_test + cfg.conditions.size();
  const std::size_t per_retest = cfg.retest ? cfg.training_lists_retest + cfg.conditions.size() : 0;
  if (per_test > cfg.n_lists || per_retest > cfg.n_lists) {
    throw Error(Errc::plan_error, "a session needs " + std::to_string(std::max(per_test, per_retest)) +
                                      " lists but only " + std::to_string(cfg.n_lists) + " exist");
  }
  if (per_test + per_retest == 0) throw Error(Errc::plan_error, "plan contains no tracks");

  std::size_t closed = cfg.closed_trained >= 0
                           ? static_cast<std::size_t>(cfg.closed_trained)
                           : static_cast<std::size_t>(std::lround(static_cast<double>(n_listeners) * 13.0 / 28.0));
  closed = std::min(closed, n_listeners);
  std::vector<std::size_t> order(n_listeners);
  std::iota(order.begin(), order.end(), 0);
  Rng assign = make_stream(seed, 0, stream_purpose::format_assignment);
  detail::shuffle_with(order, assign);
  std::vector<ResponseFormat> trained(n_listeners, ResponseFormat::open);
  for (std::size_t k = 0; k < closed; ++k) trained[order[k]] = ResponseFormat::closed;

  SessionPlan plan;
  plan.listeners.resize(n_listeners);
  for (std::size_t i = 0; i < n_listeners; ++i) {
    auto& lp = plan.listeners[i];
    lp.trained_format = trained[i];
    Rng rng = make_stream(seed, i, stream_purpose::plan_order);
    std::size_t list_cursor = (i * (per_test + per_retest)) % cfg.n_lists;
    int trial = 0;
    int curve = 0;
    const Condition training{Modality::AV, Background::noise, lp.trained_format};
    auto add = [&](int session, Phase phase, const Condition& c) {
      PlannedTrack t;
      t.session = session;
      t.phase = phase;
      t.condition = c;
      t.list_index = list_cursor;
      list_cursor = (list_cursor + 1) % cfg.n_lists;
      t.trial_index = trial++;
      if (c == training) t.curve_index = curve++;
      lp.tracks.push_back(t);
    };
    const int sessions = cfg.retest ? 2 : 1;
    for (int s = 1; s <= sessions; ++s) {
      const std::size_t n_train = s == 1 ? cfg.training_lists_test : cfg.training_lists_retest;
      for (std::size_t k = 0; k < n_train; ++k) add(s, Phase::training, training);
      for (ResponseFormat f : {lp.trained_format, lp.trained_format == ResponseFormat::closed
                                                      ? ResponseFormat::open
                                                      : ResponseFormat::closed}) {
        std::vector<Condition> group;
        for (const auto& c : cfg.conditions) {
          if (c.format == f) group.push_back(c);
        }
        detail::shuffle_with(group, rng);
        for (const auto& c : group) add(s, Phase::test, c);
      }
    }
  }
  return plan;
}

struct TrackRecord {
  int listener = 0;
  int session = 1;
  Phase phase = Phase::test;
  int order = 0;
  Condition condition;
  int list_id = 0;
  int trial_index = 0;
  int curve_index = -1;
  double jitter_db = 0.0;
  std::vector<double> levels;
  std::vector<int> words_correct;
  std::vector<int> reversals;
  std::optional<SrtEstimate> srt;
  std::optional<double> vo_percent;
};

struct RawResults {
  ExperimentConfig config;
  std::uint64_t seed = 0;
  std::vector<ListenerProfile> listeners;
  std::vector<ResponseFormat> trained_format;
  std::vector<TrackRecord> tracks;
};

inline TrackRecord run_track(const ListenerProfile& listener, const PlannedTrack& planned,
                             const mst::TestList& list, const AdaptiveConfig& cfg, Rng& rng) {
  TrackRecord rec;
  rec.listener = listener.id;
  rec.session = planned.session;
  rec.phase = planned.phase;
  rec.condition = planned.condition;
  rec.list_id = list.list_id;
  rec.trial_index = planned.trial_index;
  rec.curve_index = planned.curve_index;
  std::normal_distribution<double> unit(0.0, 1.0);
  rec.jitter_db = listener.retest_jitter * unit(rng);
  auto track = init_track(planned.condition, cfg);
  for (std::size_t k = 0; k < cfg.list_length; ++k) {
    const auto& sentence = list.sentences[k % list.sentences.size()];
    const double level = planned.condition.adaptive() ? track.levels.back() : 0.0;
    const auto response =
        respond(listener, sentence, level, planned.condition, planned.trial_index, rng, rec.jitter_db);
    const int wc = mst::score_response(sentence, response);
    if (planned.condition.adaptive()) {
      update_level(track, wc, cfg);
    } else {
      record_vo_response(track, wc, cfg);
    }
  }
  rec.words_correct = track.words_correct;
  if (planned.condition.adaptive()) {
    rec.levels = track.levels;
    rec.reversals = track.reversals_after;
    rec.srt = estimate_srt(track, cfg);
  } else {
    rec.vo_percent = vo_score(track, cfg);
  }
  return rec;
}

// Runs every planned track. Listener i consumes only its own random stream,
// so results are identical for any thread count.
inline RawResults run_experiment(const std::vector<ListenerProfile>& population, const SessionPlan& plan,
                                 const ExperimentConfig& cfg, std::uint64_t seed, unsigned threads = 1) {
  if (plan.listeners.size() != population.size()) {
    throw Error(Errc::plan_error, "plan and population sizes differ");
  }
  const auto lists = mst::generate_lists(mst::WordMatrix::olsa(), cfg.plan.n_lists, cfg.plan.list_seed);
  for (const auto& lp : plan.listeners) {
    for (const auto& t : lp.tracks) {
      if (t.list_index >= lists.size()) throw Error(Errc::plan_error, "list index out of range");
    }
  }
  for (const auto& p : population) p.validate();
  std::vector<std::vector<TrackRecord>> per_listener(population.size());
  parallel_for(population.size(), threads, [&](std::size_t i) {
    Rng rng = make_stream(seed, i, stream_purpose::experiment);
    int order = 0;
    for (const auto& planned : plan.listeners[i].tracks) {
      auto rec = run_track(population[i], planned, lists[planned.list_index], cfg.adaptive, rng);
      rec.order = order++;
      per_listener[i].push_back(std::move(rec));
    }
  });
  RawResults raw;
  raw.config = cfg;
  raw.seed = seed;
  raw.listeners = population;
  for (const auto& lp : plan.listeners) raw.trained_format.push_back(lp.trained_format);
  for (auto& v : per_listener) {
    for (auto& r : v) raw.tracks.push_back(std::move(r));
  }
  return raw;
}

// Population sampling, planning and simulation from one seed.
inline RawResults simulate(const ExperimentConfig& cfg, std::uint64_t seed, unsigned threads = 1) {
  const auto population = sample_population(cfg.population, seed);
  const auto plan = make_plan(population.size(), cfg.plan, seed);
  return run_experiment(population, plan, cfg, seed, threads);
}

// ---------------------------------------------------------------------------
// Summary statistics

struct Spread {
  std::size_t n = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
};

inline Spread spread_of(const std::vector<double>& x) {
  Spread s;
  s.n = x.size();
  if (!x.empty()) s.mean = stats::mean(x);
  if (x.size() >= 2) s.std = stats::sample_std(x);
  return s;
}

struct ConditionSummary {
  Condition condition;
  Spread srt;                // clamped SRTs of test and retest tracks
  Spread test_minus_retest;  // per listener
  std::size_t clamped = 0;
};

struct ExperimentReport {
  std::vector<ConditionSummary> conditions;
  std::size_t av_tracks = 0;
  std::size_t av_clamped = 0;
  std::size_t training_clamped = 0;
  double clamp_fraction = std::numeric_limits<double>::quiet_NaN();
  std::size_t listeners_clamped = 0;
  Spread vo_percent;  // per listener, averaged over sessions
  double vo_min = std::numeric_limits<double>::quiet_NaN();
  double vo_max = std::numeric_limits<double>::quiet_NaN();
  Spread vo_retest_minus_test;
  std::map<std::string, double> pearson_v_vs_srt;  // per AV condition
  std::vector<double> training_curve;              // mean clamped SRT per curve index
  std::vector<std::size_t> training_curve_n;
  Spread av_benefit_noise;  // AO minus AV within session and format
  Spread av_benefit_quiet;
};

inline double srt_of(const TrackRecord& t) { return t.srt->srt_clamped; }

inline ExperimentReport summarize(const RawResults& raw) {
  ExperimentReport rep;
  const std::size_t n_listeners = raw.listeners.size();
  std::map<int, std::size_t> index_of;
  for (std::size_t i = 0; i < n_listeners; ++i) index_of[raw.listeners[i].id] = i;

  // Test-phase track lookup: (listener, session, condition name) -> track.
  std::map<std::tuple<int, int, std::string>, const TrackRecord*> test_tracks;
  std::vector<bool> clamped_listener(n_listeners, false);
  for (const auto& t : raw.tracks) {
    if (t.phase == Phase::test) test_tracks[{t.listener, t.session, t.condition.name()}] = &t;
    if (t.condition.modality == Modality::AV && t.srt) {
      ++rep.av_tracks;
      if (t.srt->clamped) {
        ++rep.av_clamped;
        if (t.phase == Phase::training) ++rep.training_clamped;
        clamped_listener[index_of.at(t.listener)] = true;
      }
    }
  }
  if (rep.av_tracks > 0) rep.clamp_fraction = static_cast<double>(rep.av_clamped) / rep.av_tracks;
  rep.listeners_clamped = static_cast<std::size_t>(std::count(clamped_listener.begin(), clamped_listener.end(), true));

  for (const auto& c : raw.config.plan.conditions) {
    if (!c.adaptive()) continue;
    ConditionSummary cs;
    cs.condition = c;
    std::vector<double> srts, diffs, v, srt_for_v;
    for (const auto& t : raw.tracks) {
      if (t.phase != Phase::test || !(t.condition == c)) continue;
      srts.push_back(srt_of(t));
      if (t.srt->clamped) ++cs.clamped;
      v.push_back(raw.listeners[index_of.at(t.listener)].v);
    }
    for (const auto& l : raw.listeners) {
      auto a = test_tracks.find({l.id, 1, c.name()});
      auto b = test_tracks.find({l.id, 2, c.name()});
      if (a != test_tracks.end() && b != test_tracks.end()) diffs.push_back(srt_of(*a->second) - srt_of(*b->second));
    }
    cs.srt = spread_of(srts);
    cs.test_minus_retest = spread_of(diffs);
    if (c.modality == Modality::AV) {
      double r = std::numeric_limits<double>::quiet_NaN();
      try {
        r = stats::pearson_r(v, srts);
      } catch (const Error&) {
      }
      rep.pearson_v_vs_srt[c.name()] = r;
    }
    rep.conditions.push_back(cs);
  }

  std::vector<double> vo_means, vo_gain;
  for (const auto& l : raw.listeners) {
    std::vector<double> sessions;
    std::optional<double> s1, s2;
    for (const auto& t : raw.tracks) {
      if (t.listener != l.id || !t.vo_percent) continue;
      sessions.push_back(*t.vo_percent);
      (t.session == 1 ? s1 : s2) = *t.vo_percent;
    }
    if (!sessions.empty()) vo_means.push_back(stats::mean(sessions));
    if (s1 && s2) vo_gain.push_back(*s2 - *s1);
  }
  rep.vo_percent = spread_of(vo_means);
  if (!vo_means.empty()) {
    rep.vo_min = *std::min_element(vo_means.begin(), vo_means.end());
    rep.vo_max = *std::max_element(vo_means.begin(), vo_means.end());
  }
  rep.vo_retest_minus_test = spread_of(vo_gain);

  int max_curve = -1;
  for (const auto& t : raw.tracks) max_curve = std::max(max_curve, t.curve_index);
  for (int k = 0; k <= max_curve; ++k) {
    std::vector<double> x;
    for (const auto& t : raw.tracks) {
      if (t.curve_index == k && t.srt) x.push_back(srt_of(t));
    }
    rep.training_curve.push_back(x.empty() ? std::numeric_limits<double>::quiet_NaN() : stats::mean(x));
    rep.training_curve_n.push_back(x.size());
  }

  std::vector<double> benefit_noise, benefit_quiet;
  for (const auto& [key, t] : test_tracks) {
    if (t->condition.modality != Modality::AO) continue;
    Condition av = t->condition;
    av.modality = Modality::AV;
    auto it = test_tracks.find({t->listener, t->session, av.name()});
    if (it == test_tracks.end()) continue;
    const double b = srt_of(*t) - srt_of(*it->second);
    (t->condition.background == Background::noise ? benefit_noise : benefit_quiet).push_back(b);
  }
  rep.av_benefit_noise = spread_of(benefit_noise);
  rep.av_benefit_quiet = spread_of(benefit_quiet);
  return rep;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline std::string format_name(ResponseFormat f) { return f == ResponseFormat::closed ? "closed" : "open"; }

inline ResponseFormat parse_format(const std::string& s) {
  if (s == "closed") return ResponseFormat::closed;
  if (s == "open") return ResponseFormat::open;
  throw Error(Errc::malformed_file, "unknown response format '" + s + "'");
}

inline nlohmann::json number_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline double number_or_nan(const nlohmann::json& j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const PopulationConfig& c) {
  return {{"n_listeners", c.n_listeners},
          {"v_mean", c.v_mean},
          {"v_std", c.v_std},
          {"m50_noise_mean", c.m50_noise_mean},
          {"m50_noise_std", c.m50_noise_std},
          {"m50_quiet_mean", c.m50_quiet_mean},
          {"m50_quiet_std", c.m50_quiet_std},
          {"sigma", c.sigma},
          {"visual_gain", c.visual_gain},
          {"training_amplitude", c.training_amplitude},
          {"training_tau", c.training_tau},
          {"retest_jitter", c.retest_jitter},
          {"closed_advantage", c.closed_advantage},
          {"detection_floor_snr", c.detection_floor_snr},
          {"av_floor_extension", c.av_floor_extension}};
}

inline nlohmann::ordered_json to_json(const AdaptiveConfig& c) {
  return {{"target", c.target},
          {"slope_noise", c.slope_noise},
          {"slope_quiet", c.slope_quiet},
          {"step_initial", c.step_initial},
          {"step_ratio", c.step_ratio},
          {"step_min", c.step_min},
          {"start_speech_spl", c.start_speech_spl},
          {"noise_spl", c.noise_spl},
          {"snr_min", c.snr_min},
          {"snr_max", c.snr_max},
          {"spl_min", c.spl_min},
          {"spl_max", c.spl_max},
          {"clamp_snr", c.clamp_snr},
          {"clamp_spl", c.clamp_spl},
          {"list_length", c.list_length},
          {"srt_first_sentence", c.srt_first_sentence}};
}

inline nlohmann::ordered_json to_json(const PlanConfig& c) {
  nlohmann::ordered_json conds = nlohmann::ordered_json::array();
  for (const auto& x : c.conditions) conds.push_back(x.name());
  return {{"n_lists", c.n_lists},
          {"list_seed", c.list_seed},
          {"training_lists_test", c.training_lists_test},
          {"training_lists_retest", c.training_lists_retest},
          {"retest", c.retest},
          {"closed_trained", c.closed_trained},
          {"conditions", conds}};
}

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  return {{"population", to_json(c.population)}, {"adaptive", to_json(c.adaptive)}, {"plan", to_json(c.plan)}};
}

// Missing keys keep their defaults, so partial config files are accepted.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("population")) {
      const auto& p = j["population"];
      auto& o = c.population;
      o.n_listeners = p.value("n_listeners", o.n_listeners);
      o.v_mean = p.value("v_mean", o.v_mean);
      o.v_std = p.value("v_std", o.v_std);
      o.m50_noise_mean = p.value("m50_noise_mean", o.m50_noise_mean);
      o.m50_noise_std = p.value("m50_noise_std", o.m50_noise_std);
      o.m50_quiet_mean = p.value("m50_quiet_mean", o.m50_quiet_mean);
      o.m50_quiet_std = p.value("m50_quiet_std", o.m50_quiet_std);
      o.sigma = p.value("sigma", o.sigma);
      o.visual_gain = p.value("visual_gain", o.visual_gain);
      o.training_amplitude = p.value("training_amplitude", o.training_amplitude);
      o.training_tau = p.value("training_tau", o.training_tau);
      o.retest_jitter = p.value("retest_jitter", o.retest_jitter);
      o.closed_advantage = p.value("closed_advantage", o.closed_advantage);
      o.detection_floor_snr = p.value("detection_floor_snr", o.detection_floor_snr);
      o.av_floor_extension = p.value("av_floor_extension", o.av_floor_extension);
    }
    if (j.contains("adaptive")) {
      const auto& a = j["adaptive"];
      auto& o = c.adaptive;
      o.target = a.value("target", o.target);
      o.slope_noise = a.value("slope_noise", o.slope_noise);
      o.slope_quiet = a.value("slope_quiet", o.slope_quiet);
      o.step_initial = a.value("step_initial", o.step_initial);
      o.step_ratio = a.value("step_ratio", o.step_ratio);
      o.step_min = a.value("step_min", o.step_min);
      o.start_speech_spl = a.value("start_speech_spl", o.start_speech_spl);
      o.noise_spl = a.value("noise_spl", o.noise_spl);
      o.snr_min = a.value("snr_min", o.snr_min);
      o.snr_max = a.value("snr_max", o.snr_max);
      o.spl_min = a.value("spl_min", o.spl_min);
      o.spl_max = a.value("spl_max", o.spl_max);
      o.clamp_snr = a.value("clamp_snr", o.clamp_snr);
      o.clamp_spl = a.value("clamp_spl", o.clamp_spl);
      o.list_length = a.value("list_length", o.list_length);
      o.srt_first_sentence = a.value("srt_first_sentence", o.srt_first_sentence);
      if (o.list_length != mst::kListLength || o.srt_first_sentence < 1 ||
          o.srt_first_sentence > o.list_length) {
        throw Error(Errc::argument_error, "lists hold 20 sentences; srt_first_sentence must be in 1..20");
      }
    }
    if (j.contains("plan")) {
      const auto& p = j["plan"];
      auto& o = c.plan;
      o.n_lists = p.value("n_lists", o.n_lists);
      o.list_seed = p.value("list_seed", o.list_seed);
      o.training_lists_test = p.value("training_lists_test", o.training_lists_test);
      o.training_lists_retest = p.value("training_lists_retest", o.training_lists_retest);
      o.retest = p.value("retest", o.retest);
      o.closed_trained = p.value("closed_trained", o.closed_trained);
      if (p.contains("conditions")) {
        o.conditions.clear();
        for (const auto& name : p["conditions"]) o.conditions.push_back(Condition::parse(name.get<std::string>()));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_file, std::string("config: ") + e.what());
  }
  c.population.validate();
  return c;
}

inline nlohmann::ordered_json to_json(const ListenerProfile& p) {
  return {{"id", p.id},
          {"m50_noise", p.m50_noise},
          {"m50_quiet", p.m50_quiet},
          {"sigma", p.sigma},
          {"v", p.v},
          {"visual_gain", p.visual_gain},
          {"training_amplitude", p.training_amplitude},
          {"training_tau", p.training_tau},
          {"retest_jitter", p.retest_jitter},
          {"closed_advantage", p.closed_advantage},
          {"detection_floor_snr", p.detection_floor_snr},
          {"av_floor_extension", p.av_floor_extension}};
}

inline ListenerProfile listener_from_json(const nlohmann::json& j) {
  ListenerProfile p;
  p.id = j.at("id").get<int>();
  p.m50_noise = j.at("m50_noise").get<double>();
  p.m50_quiet = j.at("m50_quiet").get<double>();
  p.sigma = j.at("sigma").get<double>();
  p.v = j.at("v").get<double>();
  p.visual_gain = j.at("visual_gain").get<double>();
  p.training_amplitude = j.at("training_amplitude").get<double>();
  p.training_tau = j.at("training_tau").get<double>();
  p.retest_jitter = j.at("retest_jitter").get<double>();
  p.closed_advantage = j.value("closed_advantage", 0.0);
  p.detection_floor_snr = j.value("detection_floor_snr", -16.9);
  p.av_floor_extension = j.value("av_floor_extension", 3.0);
  return p;
}

inline constexpr const char* kRawFormat = "avsync-sim-raw/1";

inline nlohmann::ordered_json to_json(const RawResults& raw) {
  nlohmann::ordered_json j;
  j["format"] = kRawFormat;
  j["seed"] = raw.seed;
  j["config"] = to_json(raw.config);
  auto& listeners = j["listeners"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < raw.listeners.size(); ++i) {
    auto l = to_json(raw.listeners[i]);
    l["trained_format"] = detail::format_name(raw.trained_format.at(i));
    listeners.push_back(std::move(l));
  }
  auto& tracks = j["tracks"] = nlohmann::ordered_json::array();
  for (const auto& t : raw.tracks) {
    nlohmann::ordered_json o;
    o["listener"] = t.listener;
    o["session"] = t.session;
    o["phase"] = t.phase == Phase::training ? "training" : "test";
    o["order"] = t.order;
    o["condition"] = t.condition.name();
    o["list_id"] = t.list_id;
    o["trial_index"] = t.trial_index;
    o["curve_index"] = t.curve_index;
    o["jitter_db"] = t.jitter_db;
    o["levels"] = t.levels;
    o["words_correct"] = t.words_correct;
    o["reversals"] = t.reversals;
    if (t.srt) {
      o["srt_raw"] = t.srt->srt_raw;
      o["srt_clamped"] = t.srt->srt_clamped;
      o["clamped"] = t.srt->clamped;
    }
    if (t.vo_percent) o["vo_percent"] = *t.vo_percent;
    tracks.push_back(std::move(o));
  }
  return j;
}

inline RawResults raw_results_from_json(const nlohmann::json& j) {
  RawResults raw;
  try {
    if (j.value("format", std::string()) != kRawFormat) {
      throw Error(Errc::malformed_file, "not an avsync raw results file");
    }
    raw.seed = j.at("seed").get<std::uint64_t>();
    raw.config = experiment_config_from_json(j.at("config"));
    for (const auto& l : j.at("listeners")) {
      raw.listeners.push_back(listener_from_json(l));
      raw.trained_format.push_back(detail::parse_format(l.at("trained_format").get<std::string>()));
    }
    for (const auto& o : j.at("tracks")) {
      TrackRecord t;
      t.listener = o.at("listener").get<int>();
      t.session = o.at("session").get<int>();
      t.phase = o.at("phase").get<std::string>() == "training" ? Phase::training : Phase::test;
      t.order = o.at("order").get<int>();
      t.condition = Condition::parse(o.at("condition").get<std::string>());
      t.list_id = o.at("list_id").get<int>();
      t.trial_index = o.at("trial_index").get<int>();
      t.curve_index = o.at("curve_index").get<int>();
      t.jitter_db = o.at("jitter_db").get<double>();
      t.levels = o.at("levels").get<std::vector<double>>();
      t.words_correct = o.at("words_correct").get<std::vector<int>>();
      t.reversals = o.at("reversals").get<std::vector<int>>();
      if (o.contains("srt_raw")) {
        t.srt = SrtEstimate{o.at("srt_raw").get<double>(), o.at("srt_clamped").get<double>(),
                            o.at("clamped").get<bool>()};
      }
      if (o.contains("vo_percent")) t.vo_percent = o.at("vo_percent").get<double>();
      raw.tracks.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_file, std::string("raw results: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::malformed_file) throw;
    throw Error(Errc::malformed_file, e.what());
  }
  return raw;
}

// Human reference values (test and retest pooled, 28 listeners) printed
// next to simulated results for comparison only.
inline nlohmann::ordered_json reference_values() {
  return {{"srt_mean_std",
           {{"AONoiseClosed", {-7.9, 2.5}},
            {"AONoiseOpen", {-8.8, 1.1}},
            {"AVNoiseClosed", {-13.4, 3.2}},
            {"AVNoiseOpen", {-12.9, 3.4}},
            {"AOQuietClosed", {17.6, 3.2}},
            {"AOQuietOpen", {17.8, 2.4}},
            {"AVQuietClosed", {10.9, 4.4}},
            {"AVQuietOpen", {10.5, 4.6}}}},
          {"av_benefit_noise_db", 5.0},
          {"av_benefit_quiet_db", 7.0},
          {"clamped_av_tracks", {18, 366}},
          {"vo_percent", {{"min", 0.0}, {"max", 84.0}, {"mean", 50.0}, {"std", 21.4}}},
          {"pearson_vo_vs_srt",
           {{"AVNoiseClosed", -0.66}, {"AVNoiseOpen", -0.69}, {"AVQuietClosed", -0.65}, {"AVQuietOpen", -0.65}}},
          {"training_improvement_db", {{"trial3", -1.6}, {"test", -2.9}, {"retest", -3.8}}}};
}

inline nlohmann::ordered_json spread_json(const Spread& s) {
  return {{"n", s.n}, {"mean", detail::number_or_null(s.mean)}, {"std", detail::number_or_null(s.std)}};
}

inline nlohmann::ordered_json to_json(const ExperimentReport& r, const RawResults& raw) {
  nlohmann::ordered_json j;
  j["format"] = "avsync-sim-report/1";
  j["seed"] = raw.seed;
  j["config"] = to_json(raw.config);
  auto& conds = j["conditions"] = nlohmann::ordered_json::array();
  for (const auto& c : r.conditions) {
    conds.push_back({{"condition", c.condition.name()},
                     {"srt", spread_json(c.srt)},
                     {"test_minus_retest", spread_json(c.test_minus_retest)},
                     {"clamped", c.clamped}});
  }
  j["clamping"] = {{"av_tracks", r.av_tracks},
                   {"clamped", r.av_clamped},
                   {"training_clamped", r.training_clamped},
                   {"fraction", detail::number_or_null(r.clamp_fraction)},
                   {"listeners_below_detection", r.listeners_clamped}};
  j["visual_only"] = {{"percent", spread_json(r.vo_percent)},
                      {"min", detail::number_or_null(r.vo_min)},
                      {"max", detail::number_or_null(r.vo_max)},
                      {"retest_minus_test", spread_json(r.vo_retest_minus_test)}};
  nlohmann::ordered_json pr;
  for (const auto& [k, v] : r.pearson_v_vs_srt) pr[k] = detail::number_or_null(v);
  j["pearson_v_vs_srt"] = pr;
  nlohmann::ordered_json curve = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.training_curve.size(); ++k) {
    curve.push_back({{"index", k}, {"n", r.training_curve_n[k]}, {"mean_srt", detail::number_or_null(r.training_curve[k])}});
  }
  j["training_curve"] = curve;
  j["av_benefit"] = {{"noise", spread_json(r.av_benefit_noise)}, {"quiet", spread_json(r.av_benefit_quiet)}};
  j["reference"] = reference_values();
  return j;
}

inline std::string format_report_csv(const ExperimentReport& r) {
  std::string out = "condition,n,mean_srt,std_srt,test_minus_retest_mean,test_minus_retest_std,clamped\n";
  auto num = [](double x) {
    if (!std::isfinite(x)) return std::string("NA");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return std::string(buf);
  };
  for (const auto& c : r.conditions) {
    out += c.condition.name() + "," + std::to_string(c.srt.n) + "," + num(c.srt.mean) + "," + num(c.srt.std) +
           "," + num(c.test_minus_retest.mean) + "," + num(c.test_minus_retest.std) + "," +
           std::to_string(c.clamped) + "\n";
  }
  return out;
}

}  // namespace avsync

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


// Batch scoring of a corpus of dubbed takes against their original sentences:
// score matrix, best-take selection, outlier correction and the matched /
// mismatched score distributions.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "avsync/align.hpp"
#include "avsync/audio_io.hpp"
#include "avsync/csv.hpp"
#include "avsync/error.hpp"
#include "avsync/melspec.hpp"
#include "avsync/parallel.hpp"
#include "avsync/random.hpp"
#include "avsync/stats.hpp"

namespace avsync {

struct TakeCorpus {
  std::map<std::string, std::filesystem::path> originals;
  std::map<std::string, std::map<std::string, std::filesystem::path>> takes;

  void validate() const {
    for (const auto& [sid, row] : takes) {
      if (!originals.count(sid)) throw Error(Errc::malformed_file, "take for unknown sentence '" + sid + "'");
      if (row.empty()) throw Error(Errc::malformed_file, "sentence '" + sid + "' lists no takes");
    }
  }

  std::size_t take_count() const {
    std::size_t n = 0;
    for (const auto& [sid, row] : takes) n += row.size();
    return n;
  }
};

// CSV `kind,sentence_id,take_id,path`; relative paths resolve against base_dir.
inline TakeCorpus parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  const auto table = csv::parse(text);
  const auto c_kind = table.column("kind");
  const auto c_sid = table.column("sentence_id");
  const auto c_tid = table.column("take_id");
  const auto c_path = table.column("path");
  TakeCorpus corpus;
  for (const auto& row : table.rows) {
    const auto& sid = row[c_sid];
    if (sid.empty()) throw Error(Errc::malformed_file, "manifest row without sentence_id");
    std::filesystem::path p(row[c_path]);
    if (p.is_relative()) p = base_dir / p;
    if (row[c_kind] == "original") {
      if (!corpus.originals.emplace(sid, p).second) {
        throw Error(Errc::malformed_file, "duplicate original for '" + sid + "'");
      }
    } else if (row[c_kind] == "take") {
      if (row[c_tid].empty()) throw Error(Errc::malformed_file, "take row without take_id");
      if (!corpus.takes[sid].emplace(row[c_tid], p).second) {
        throw Error(Errc::malformed_file, "duplicate take '" + row[c_tid] + "' for '" + sid + "'");
      }
    } else {
      throw Error(Errc::malformed_file, "unknown manifest kind '" + row[c_kind] + "'");
    }
  }
  corpus.validate();
  return corpus;
}

inline TakeCorpus read_manifest(const std::filesystem::path& path) {
  return parse_manifest(csv::read_text(path), path.parent_path());
}

struct EntryError {
  std::string sentence_id;
  std::string take_id;  // empty for an original
  Errc code = Errc::io_error;
  std::string message;
};

struct FeatureSet {
  MelParams params;
  int sample_rate = 0;
  std::map<std::string, MelSpectrogram> originals;
  std::map<std::string, std::map<std::string, MelSpectrogram>> takes;
  std::vector<EntryError> errors;
};

namespace detail {

struct FeatureJob {
  std::string sentence_id;
  std::string take_id;
  std::optional<std::filesystem::path> path;
  const AudioBuffer* audio = nullptr;
};

// Multichannel files contribute their first channel.
inline FeatureSet extract_features(std::vector<FeatureJob> jobs, const MelParams& params, unsigned threads) {
  std::vector<std::optional<AudioBuffer>> loaded(jobs.size());
  std::vector<std::optional<EntryError>> failed(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    try {
      const AudioBuffer& a = jobs[k].audio ? *jobs[k].audio : loaded[k].emplace(read_wav_file(*jobs[k].path));
      if (a.channel_count() != 1) {
        loaded[k] = extract_channel(a, 0);
      } else if (jobs[k].audio) {
        loaded[k] = a;
      }
    } catch (const Error& e) {
      failed[k] = EntryError{jobs[k].sentence_id, jobs[k].take_id, e.code(), e.what()};
    }
  });
  FeatureSet fs;
  fs.params = params;
  // Reference rate: first readable original in sentence order.
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (jobs[k].take_id.empty() && loaded[k]) {
      fs.sample_rate = loaded[k]->sample_rate();
      break;
    }
  }
  std::vector<std::optional<MelSpectrogram>> mels(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    if (!loaded[k]) return;
    try {
      if (loaded[k]->sample_rate() != fs.sample_rate) {
        throw Error(Errc::unsupported_format, "sample rate " + std::to_string(loaded[k]->sample_rate()) +
                                                  " differs from corpus rate " + std::to_string(fs.sample_rate));
      }
      mels[k] = compute_mel_spectrogram(*loaded[k], params);
      if (mels[k]->empty()) throw Error(Errc::degenerate_input, "audio shorter than one analysis window");
    } catch (const Error& e) {
      mels[k].reset();
      failed[k] = EntryError{jobs[k].sentence_id, jobs[k].take_id, e.code(), e.what()};
    }
  });
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (failed[k]) {
      fs.errors.push_back(*failed[k]);
    } else if (jobs[k].take_id.empty()) {
      fs.originals.emplace(jobs[k].sentence_id, std::move(*mels[k]));
    } else {
      fs.takes[jobs[k].sentence_id].emplace(jobs[k].take_id, std::move(*mels[k]));
    }
  }
  return fs;
}

}  // namespace detail

// Unreadable or mismatched files become EntryErrors; the rest is processed.
inline FeatureSet load_features(const TakeCorpus& corpus, const MelParams& params = {}, unsigned threads = 1) {
  std::vector<detail::FeatureJob> jobs;
  for (const auto& [sid, p] : corpus.originals) jobs.push_back({sid, "", p, nullptr});
  for (const auto& [sid, row] : corpus.takes) {
    for (const auto& [tid, p] : row) jobs.push_back({sid, tid, p, nullptr});
  }
  return detail::extract_features(std::move(jobs), params, threads);
}

inline FeatureSet features_from_audio(const std::map<std::string, AudioBuffer>& originals,
                                      const std::map<std::string, std::map<std::string, AudioBuffer>>& takes,
                                      const MelParams& params = {}, unsigned threads = 1) {
  std::vector<detail::FeatureJob> jobs;
  for (const auto& [sid, a] : originals) jobs.push_back({sid, "", std::nullopt, &a});
  for (const auto& [sid, row] : takes) {
    if (!originals.count(sid)) throw Error(Errc::argument_error, "take for unknown sentence '" + sid + "'");
    for (const auto& [tid, a] : row) jobs.push_back({sid, tid, std::nullopt, &a});
  }
  return detail::extract_features(std::move(jobs), params, threads);
}

struct TakeScore {
  std::string take_id;
  double seconds = 0.0;
  double frames = 0.0;
};

// rows[i] holds the scored takes of sentence_ids[i], ordered by take_id.
struct ScoreMatrix {
  std::vector<std::string> sentence_ids;
  std::vector<std::vector<TakeScore>> rows;
  double hop_seconds = 0.0;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.size();
    return n;
  }
};

// Every sentence with an original or a take gets a row; takes whose original
// failed to load are left unscored.
inline ScoreMatrix scan_corpus(const FeatureSet& fs, const AlignOptions& opts = {}, unsigned threads = 1) {
  ScoreMatrix m;
  std::map<std::string, bool> ids;
  for (const auto& [sid, mel] : fs.originals) ids[sid] = true;
  for (const auto& [sid, row] : fs.takes) ids[sid] = true;
  for (const auto& e : fs.errors) ids[e.sentence_id] = true;
  struct Pair {
    std::size_t row;
    const MelSpectrogram* original;
    const MelSpectrogram* take;
    std::string take_id;
  };
  std::vector<Pair> pairs;
  for (const auto& [sid, unused] : ids) {
    m.sentence_ids.push_back(sid);
    m.rows.emplace_back();
    auto o = fs.originals.find(sid);
    auto t = fs.takes.find(sid);
    if (o == fs.originals.end() || t == fs.takes.end()) continue;
    if (m.hop_seconds == 0.0) m.hop_seconds = o->second.hop_seconds();
    for (const auto& [tid, mel] : t->second) pairs.push_back({m.rows.size() - 1, &o->second, &mel, tid});
  }
  std::vector<TakeScore> scores(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) {
    const auto r = align(*pairs[k].original, *pairs[k].take, opts);
    scores[k] = {pairs[k].take_id, r.async_seconds, r.async_frames};
  });
  for (std::size_t k = 0; k < pairs.size(); ++k) m.rows[pairs[k].row].push_back(std::move(scores[k]));
  return m;
}

struct SentenceSelection {
  std::string sentence_id;
  std::string take_id;
  double raw_seconds = 0.0;
  double corrected_seconds = 0.0;
  long offset_hops = 0;
  double offset_seconds = 0.0;
  bool flagged = false;  // raw score above threshold, offset search run
  bool outlier = false;  // corrected score still above threshold
};

struct Selection {
  std::vector<SentenceSelection> sentences;
  std::vector<std::string> unselectable;
};

// Argmin per row; rows are ordered by take_id so the first minimum wins ties.
inline Selection select_best(const ScoreMatrix& m) {
  Selection sel;
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    const auto& row = m.rows[i];
    if (row.empty()) {
      sel.unselectable.push_back(m.sentence_ids[i]);
      continue;
    }
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j) {
      if (row[j].seconds < row[best].seconds) best = j;
    }
    SentenceSelection s;
    s.sentence_id = m.sentence_ids[i];
    s.take_id = row[best].take_id;
    s.raw_seconds = row[best].seconds;
    s.corrected_seconds = s.raw_seconds;
    sel.sentences.push_back(std::move(s));
  }
  return sel;
}

inline constexpr double kDefaultOutlierThreshold = 0.060;

// Runs the offset search on every selected take whose score exceeds the
// threshold. The zero offset is a candidate, so correction never worsens a score.
inline std::size_t flag_outliers(Selection& sel, const FeatureSet& fs,
                                 double threshold = kDefaultOutlierThreshold, const OffsetSearch& search = {}) {
  if (!(threshold >= 0.0)) throw Error(Errc::argument_error, "threshold must be >= 0");
  std::vector<std::size_t> todo;
  for (std::size_t k = 0; k < sel.sentences.size(); ++k) {
    auto& s = sel.sentences[k];
    s.flagged = s.raw_seconds > threshold;
    s.outlier = s.flagged;
    if (s.flagged) todo.push_back(k);
  }
  for (std::size_t k : todo) {
    auto& s = sel.sentences[k];
    const auto r = find_best_offset(fs.originals.at(s.sentence_id), fs.takes.at(s.sentence_id).at(s.take_id), search);
    s.offset_hops = r.offset_hops;
    s.offset_seconds = r.offset_seconds;
    s.corrected_seconds = std::min(r.corrected.async_seconds, s.raw_seconds);
    s.outlier = s.corrected_seconds > threshold;
  }
  return todo.size();
}

struct MismatchMode {
  enum Kind { off, exact, sample } kind = exact;
  double fraction = 1.0;
  std::uint64_t seed = 0;
};

// "off", "exact" or "sample:<p>" with 0 < p <= 1.
inline MismatchMode parse_mismatch_mode(std::string_view text, std::uint64_t seed = 0) {
  MismatchMode m;
  m.seed = seed;
  if (text == "off") {
    m.kind = MismatchMode::off;
  } else if (text == "exact") {
    m.kind = MismatchMode::exact;
  } else if (text.rfind("sample:", 0) == 0) {
    m.kind = MismatchMode::sample;
    const std::string num(text.substr(7));
    char* end = nullptr;
    m.fraction = std::strtod(num.c_str(), &end);
    if (num.empty() || *end != '\0' || !(m.fraction > 0.0 && m.fraction <= 1.0)) {
      throw Error(Errc::argument_error, "sample fraction must be in (0, 1]");
    }
  } else {
    throw Error(Errc::argument_error, "mismatch mode must be off, exact or sample:<p>");
  }
  return m;
}

struct MismatchScore {
  std::string original_id;  // sentence whose original was used
  std::string sentence_id;  // sentence the take belongs to
  std::string take_id;
  double seconds = 0.0;
};

inline constexpr std::uint64_t kMismatchPurpose = 0x4d49;

// Each take against every other sentence's original.
inline std::vector<MismatchScore> mismatched_scores(const FeatureSet& fs, const MismatchMode& mode,
                                                    const AlignOptions& opts = {}, unsigned threads = 1) {
  std::vector<MismatchScore> jobs;
  if (mode.kind == MismatchMode::off) return jobs;
  std::uint64_t counter = 0;
  for (const auto& [oid, omel] : fs.originals) {
    for (const auto& [sid, row] : fs.takes) {
      if (sid == oid) continue;
      for (const auto& [tid, tmel] : row) {
        const std::uint64_t k = counter++;
        if (mode.kind == MismatchMode::sample) {
          Rng rng = make_stream(mode.seed, k, kMismatchPurpose);
          if (!(uniform01(rng) < mode.fraction)) continue;
        }
        jobs.push_back({oid, sid, tid, 0.0});
      }
    }
  }
  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    auto& j = jobs[k];
    j.seconds = align(fs.originals.at(j.original_id), fs.takes.at(j.sentence_id).at(j.take_id), opts).async_seconds;
  });
  return jobs;
}

struct Distribution {
  std::size_t n = 0;
  double min = std::numeric_limits<double>::quiet_NaN();
  double median = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
};

inline Distribution distribution_of(std::vector<double> x) {
  Distribution d;
  d.n = x.size();
  if (x.empty()) return d;
  std::sort(x.begin(), x.end());
  d.min = x.front();
  d.max = x.back();
  d.median = stats::median(x);
  return d;
}

struct SensitivityReport {
  Distribution matched_best;
  Distribution matched_all;
  Distribution mismatched;
  bool mismatched_sampled = false;
};

inline SensitivityReport sensitivity_report(const ScoreMatrix& m, const std::vector<MismatchScore>& mismatched,
                                            bool sampled = false) {
  std::size_t scored_rows = 0;
  std::vector<double> best, all, mis;
  for (const auto& row : m.rows) {
    if (row.empty()) continue;
    ++scored_rows;
    double b = std::numeric_limits<double>::infinity();
    for (const auto& s : row) {
      all.push_back(s.seconds);
      b = std::min(b, s.seconds);
    }
    best.push_back(b);
  }
  if (scored_rows < 2) throw Error(Errc::argument_error, "sensitivity report needs >= 2 scored sentences");
  for (const auto& s : mismatched) mis.push_back(s.seconds);
  return {distribution_of(best), distribution_of(all), distribution_of(mis), sampled};
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline nlohmann::ordered_json num_or_null(double x) {
  return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json distribution_json(const Distribution& d) {
  return {{"n", d.n}, {"min", num_or_null(d.min)}, {"median", num_or_null(d.median)}, {"max", num_or_null(d.max)}};
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const SensitivityReport& r) {
  return {{"matched_best", detail::distribution_json(r.matched_best)},
          {"matched_all", detail::distribution_json(r.matched_all)},
          {"mismatched", detail::distribution_json(r.mismatched)},
          {"mismatched_sampled", r.mismatched_sampled}};
}

inline nlohmann::ordered_json selection_report_json(const FeatureSet& fs, const ScoreMatrix& m, const Selection& sel,
                                                    double threshold,
                                                    const std::optional<SensitivityReport>& sensitivity) {
  nlohmann::ordered_json j;
  j["format"] = "avsync-sync-report/1";
  j["threshold_seconds"] = threshold;
  j["mel"] = {{"window", fs.params.window}, {"hop", fs.params.hop},   {"n_bands", fs.params.n_bands},
              {"f_min", fs.params.f_min},   {"f_max", fs.params.f_max}, {"sample_rate", fs.sample_rate}};
  std::map<std::string, const SentenceSelection*> by_id;
  for (const auto& s : sel.sentences) by_id[s.sentence_id] = &s;
  auto& sentences = j["sentences"] = nlohmann::ordered_json::array();
  std::vector<double> best;
  std::size_t flagged = 0, outliers = 0;
  for (std::size_t i = 0; i < m.sentence_ids.size(); ++i) {
    nlohmann::ordered_json o;
    o["sentence_id"] = m.sentence_ids[i];
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    for (const auto& t : m.rows[i]) scores[t.take_id] = t.seconds;
    auto it = by_id.find(m.sentence_ids[i]);
    if (it != by_id.end()) {
      const auto& s = *it->second;
      o["best_take"] = s.take_id;
      o["raw_score_s"] = s.raw_seconds;
      o["corrected_score_s"] = s.corrected_seconds;
      o["offset_s"] = s.offset_seconds;
      o["offset_hops"] = s.offset_hops;
      o["flagged"] = s.flagged;
      o["outlier"] = s.outlier;
      best.push_back(s.raw_seconds);
      flagged += s.flagged;
      outliers += s.outlier;
    } else {
      o["best_take"] = nullptr;
    }
    o["scores_s"] = scores;
    sentences.push_back(std::move(o));
  }
  j["unselectable"] = sel.unselectable;
  auto& errors = j["errors"] = nlohmann::ordered_json::array();
  for (const auto& e : fs.errors) {
    errors.push_back({{"sentence_id", e.sentence_id},
                      {"take_id", e.take_id},
                      {"error", to_string(e.code)},
                      {"message", e.message}});
  }
  nlohmann::ordered_json summary;
  summary["sentences"] = m.sentence_ids.size();
  summary["scored_pairs"] = m.size();
  summary["flagged"] = flagged;
  summary["outliers"] = outliers;
  if (!best.empty()) {
    std::sort(best.begin(), best.end());
    summary["best_score_quantiles_s"] = {{"min", best.front()},
                                         {"q25", stats::quantile(best, 0.25)},
                                         {"median", stats::quantile(best, 0.5)},
                                         {"q75", stats::quantile(best, 0.75)},
                                         {"max", best.back()}};
  }
  j["summary"] = summary;
  if (sensitivity) j["sensitivity"] = to_json(*sensitivity);
  return j;
}

// CSV `sentence_id,take_id,async_s,async_frames,best,flagged,outlier,corrected_s,offset_s`.
inline std::string format_scores_csv(const ScoreMatrix& m, const Selection& sel) {
  std::map<std::string, const SentenceSelection*> by_id;
  for (const auto& s : sel.sentences) by_id[s.sentence_id] = &s;
  std::string out = "sentence_id,take_id,async_s,async_frames,best,flagged,outlier,corrected_s,offset_s\n";
  char buf[160];
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    const auto it = by_id.find(m.sentence_ids[i]);
    for (const auto& t : m.rows[i]) {
      const bool best = it != by_id.end() && it->second->take_id == t.take_id;
      if (best) {
        const auto& s = *it->second;
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f,1,%d,%d,%.6f,%.6f\n", t.seconds, t.frames, s.flagged ? 1 : 0,
                      s.outlier ? 1 : 0, s.corrected_seconds, s.offset_seconds);
      } else {
        std::snprintf(buf, sizeof buf, ",%.6f,%.6f,0,0,0,NA,NA\n", t.seconds, t.frames);
      }
      out += csv::quote(m.sentence_ids[i]) + "," + csv::quote(t.take_id) + buf;
    }
  }
  return out;
}

// CSV `sentence_id,take_id,raw_s,corrected_s,offset_s,flagged,outlier`.
inline std::string format_selection_csv(const Selection& sel) {
  std::string out = "sentence_id,take_id,raw_s,corrected_s,offset_s,flagged,outlier\n";
  char buf[128];
  for (const auto& s : sel.sentences) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%.6f,%d,%d\n", s.raw_seconds, s.corrected_seconds, s.offset_seconds,
                  s.flagged ? 1 : 0, s.outlier ? 1 : 0);
    out += csv::quote(s.sentence_id) + "," + csv::quote(s.take_id) + buf;
  }
  return out;
}

}  // namespace avsync

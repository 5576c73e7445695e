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

// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "avsync/avsync.hpp"

namespace fs = std::filesystem;
using namespace avsync;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(csv::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_file, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  csv::write_text(path, j.dump(2) + "\n");
}

ExperimentConfig load_config(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : experiment_config_from_json(read_json(path));
}

AudioBuffer read_channel(const fs::path& wav, std::size_t channel) {
  const auto audio = read_wav_file(wav);
  if (channel < 1 || channel > audio.channel_count()) {
    throw Error(Errc::argument_error, "channel " + std::to_string(channel) + " not in 1.." +
                                          std::to_string(audio.channel_count()));
  }
  return extract_channel(audio, channel - 1);
}

struct SyncArgs {
  std::string manifest;
  int mel_bands = 64;
  double threshold_ms = 60.0;
  double search_s = 2.0;
  unsigned threads = 0;
};

void add_sync_args(CLI::App* cmd, SyncArgs& a) {
  cmd->add_option("--manifest", a.manifest, "CSV kind,sentence_id,take_id,path")->required();
  cmd->add_option("--mel-bands", a.mel_bands, "mel bands")->capture_default_str();
  cmd->add_option("--threshold-ms", a.threshold_ms, "outlier threshold")->capture_default_str();
  cmd->add_option("--search-s", a.search_s, "offset search range in seconds")->capture_default_str();
  cmd->add_option("--threads", a.threads, "worker threads, 0 = all cores")->capture_default_str();
}

struct SyncRun {
  FeatureSet features;
  ScoreMatrix scores;
  Selection selection;
};

SyncRun run_sync(const SyncArgs& a) {
  MelParams mp;
  mp.n_bands = a.mel_bands;
  SyncRun r;
  r.features = load_features(read_manifest(a.manifest), mp, a.threads);
  for (const auto& e : r.features.errors) {
    std::cerr << "warning: " << e.sentence_id << (e.take_id.empty() ? "" : "/" + e.take_id) << ": " << e.message
              << "\n";
  }
  r.scores = scan_corpus(r.features, {}, a.threads);
  r.selection = select_best(r.scores);
  OffsetSearch search;
  search.range_seconds = a.search_s;
  search.threads = a.threads;
  flag_outliers(r.selection, r.features, a.threshold_ms / 1000.0, search);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audiovisual matrix sentence test toolkit: recording synchronization and listener simulation"};
  app.require_subcommand(1);

  // sim ----------------------------------------------------------------------
  auto* sim = app.add_subcommand("sim", "simulate the audiovisual test");
  sim->require_subcommand(1);

  std::string config_path, out_path, in_path, csv_path;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  auto* sim_run = sim->add_subcommand("run", "simulate every listener's sessions");
  sim_run->add_option("--config", config_path, "experiment config JSON (defaults if omitted)");
  sim_run->add_option("--seed", seed, "master seed")->capture_default_str();
  sim_run->add_option("--out", out_path, "raw results JSON")->required();
  sim_run->add_option("--threads", threads, "worker threads, 0 = all cores")->capture_default_str();

  auto* sim_report = sim->add_subcommand("report", "summary statistics of a raw results file");
  sim_report->add_option("--in", in_path, "raw results JSON")->required();
  sim_report->add_option("--out", out_path, "report JSON")->required();
  sim_report->add_option("--csv", csv_path, "per-condition CSV");

  int listener = 0, track_order = 0;
  auto* sim_track = sim->add_subcommand("track", "dump one adaptive track");
  sim_track->add_option("--in", in_path, "raw results JSON")->required();
  sim_track->add_option("--listener", listener)->required();
  sim_track->add_option("--order", track_order, "0-based position in the listener's schedule")->required();
  sim_track->add_option("--out", out_path, "CSV sentence_idx,level,words_correct,reversals")->required();

  auto* sim_pop = sim->add_subcommand("population", "sample listener profiles");
  sim_pop->add_option("--config", config_path, "experiment config JSON");
  sim_pop->add_option("--seed", seed)->capture_default_str();
  sim_pop->add_option("--out", out_path, "population CSV")->required();

  std::size_t n_lists = 45;
  std::string matrix_path;
  auto* sim_lists = sim->add_subcommand("lists", "generate balanced test lists");
  sim_lists->add_option("--n", n_lists)->capture_default_str();
  sim_lists->add_option("--seed", seed)->capture_default_str();
  sim_lists->add_option("--matrix", matrix_path, "word matrix JSON (German female matrix if omitted)");
  sim_lists->add_option("--out", out_path, "lists CSV")->required();

  auto* sim_config = sim->add_subcommand("config", "write the default configuration");
  sim_config->add_option("--out", out_path, "config JSON")->required();

  auto* sim_matrix = sim->add_subcommand("matrix", "write the German female-speaker word matrix");
  sim_matrix->add_option("--out", out_path, "word matrix JSON")->required();

  // sync ---------------------------------------------------------------------
  auto* sync = app.add_subcommand("sync", "score and select recordings against original sentences");
  sync->require_subcommand(1);
  SyncArgs sa;
  std::string mismatched = "off";

  auto* sync_scan = sync->add_subcommand("scan", "score every take, select the best, correct outliers");
  add_sync_args(sync_scan, sa);
  sync_scan->add_option("--out", out_path, "report JSON")->required();
  sync_scan->add_option("--csv", csv_path, "per-take CSV");
  sync_scan->add_option("--mismatched", mismatched, "off, exact or sample:<p>")->capture_default_str();
  sync_scan->add_option("--seed", seed, "seed for sampled mismatch scoring")->capture_default_str();

  auto* sync_select = sync->add_subcommand("select", "write the selected take per sentence");
  add_sync_args(sync_select, sa);
  sync_select->add_option("--out", out_path, "selection CSV")->required();

  auto* sync_sens = sync->add_subcommand("sensitivity", "matched versus mismatched score distributions");
  add_sync_args(sync_sens, sa);
  sync_sens->add_option("--out", out_path, "sensitivity JSON")->required();
  sync_sens->add_option("--mismatched", mismatched, "exact (default) or sample:<p>");
  sync_sens->add_option("--seed", seed)->capture_default_str();

  synth::CorpusParams cp;
  std::string out_dir;
  auto* sync_synth = sync->add_subcommand("synth", "write a synthetic corpus with known offsets");
  sync_synth->add_option("--out-dir", out_dir)->required();
  sync_synth->add_option("--seed", cp.seed)->capture_default_str();
  sync_synth->add_option("--sentences", cp.sentences)->capture_default_str();
  sync_synth->add_option("--takes", cp.takes)->capture_default_str();
  sync_synth->add_option("--outliers", cp.outliers)->capture_default_str();
  sync_synth->add_option("--outlier-delay", cp.outlier_delay, "seconds")->capture_default_str();

  // ltc ----------------------------------------------------------------------
  auto* ltc_cmd = app.add_subcommand("ltc", "linear timecode tools");
  ltc_cmd->require_subcommand(1);
  std::string wav_path, schedule_path, start_tc = "00:00:00:00";
  std::size_t channel = 1, n_frames = 250;
  int rate = 48000;

  auto* ltc_decode = ltc_cmd->add_subcommand("decode", "decode LTC frames from a WAV channel");
  ltc_decode->add_option("--wav", wav_path)->required();
  ltc_decode->add_option("--channel", channel, "1-based channel")->capture_default_str();
  ltc_decode->add_option("--out", out_path, "CSV timecode,start_sample,user_bits")->required();

  auto* ltc_encode = ltc_cmd->add_subcommand("encode", "write an LTC signal");
  ltc_encode->add_option("--start", start_tc, "HH:MM:SS:FF")->capture_default_str();
  ltc_encode->add_option("--frames", n_frames)->capture_default_str();
  ltc_encode->add_option("--rate", rate)->capture_default_str();
  ltc_encode->add_option("--out", out_path, "WAV")->required();

  auto* ltc_align = ltc_cmd->add_subcommand("align", "locate scheduled sentences in a recording");
  ltc_align->add_option("--wav", wav_path)->required();
  ltc_align->add_option("--channel", channel, "1-based channel")->capture_default_str();
  ltc_align->add_option("--schedule", schedule_path, "CSV sentence_id,timecode")->required();
  ltc_align->add_option("--out", out_path, "CSV sentence_id,start_sample")->required();

  // mel ----------------------------------------------------------------------
  auto* mel_cmd = app.add_subcommand("mel", "mel spectrogram tools");
  mel_cmd->require_subcommand(1);
  int mel_bands = 64;
  auto* mel_dump = mel_cmd->add_subcommand("dump", "write a mel spectrogram as CSV");
  mel_dump->add_option("--wav", wav_path)->required();
  mel_dump->add_option("--channel", channel, "1-based channel")->capture_default_str();
  mel_dump->add_option("--mel-bands", mel_bands)->capture_default_str();
  mel_dump->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*sim_run) {
      const auto raw = simulate(load_config(config_path), seed, threads);
      write_json(out_path, to_json(raw));
    } else if (*sim_report) {
      const auto raw = raw_results_from_json(read_json(in_path));
      const auto rep = summarize(raw);
      write_json(out_path, to_json(rep, raw));
      if (!csv_path.empty()) csv::write_text(csv_path, format_report_csv(rep));
    } else if (*sim_track) {
      const auto raw = raw_results_from_json(read_json(in_path));
      const TrackRecord* found = nullptr;
      for (const auto& t : raw.tracks) {
        if (t.listener == listener && t.order == track_order) found = &t;
      }
      if (!found) throw Error(Errc::argument_error, "no such track");
      AdaptiveTrack t = init_track(found->condition, raw.config.adaptive);
      t.words_correct = found->words_correct;
      t.reversals_after = found->reversals;
      if (found->condition.adaptive()) t.levels = found->levels;
      csv::write_text(out_path, format_track_csv(t));
    } else if (*sim_pop) {
      const auto cfg = load_config(config_path);
      csv::write_text(out_path, format_population_csv(sample_population(cfg.population, seed)));
    } else if (*sim_lists) {
      const auto matrix =
          matrix_path.empty() ? mst::WordMatrix::olsa() : mst::parse_word_matrix_json(csv::read_text(matrix_path));
      csv::write_text(out_path, mst::format_lists_csv(matrix, mst::generate_lists(matrix, n_lists, seed)));
    } else if (*sim_config) {
      write_json(out_path, to_json(ExperimentConfig{}));
    } else if (*sim_matrix) {
      csv::write_text(out_path, mst::word_matrix_json(mst::WordMatrix::olsa()));
    } else if (*sync_scan) {
      const auto mode = parse_mismatch_mode(mismatched, seed);
      const auto r = run_sync(sa);
      std::optional<SensitivityReport> sens;
      if (mode.kind != MismatchMode::off) {
        sens = sensitivity_report(r.scores, mismatched_scores(r.features, mode, {}, sa.threads),
                                  mode.kind == MismatchMode::sample);
      }
      write_json(out_path, selection_report_json(r.features, r.scores, r.selection, sa.threshold_ms / 1000.0, sens));
      if (!csv_path.empty()) csv::write_text(csv_path, format_scores_csv(r.scores, r.selection));
    } else if (*sync_select) {
      csv::write_text(out_path, format_selection_csv(run_sync(sa).selection));
    } else if (*sync_sens) {
      const auto mode = parse_mismatch_mode(mismatched == "off" ? "exact" : mismatched, seed);
      if (mode.kind == MismatchMode::off) throw Error(Errc::usage_error, "sensitivity needs mismatched scores");
      MelParams mp;
      mp.n_bands = sa.mel_bands;
      const auto features = load_features(read_manifest(sa.manifest), mp, sa.threads);
      const auto scores = scan_corpus(features, {}, sa.threads);
      const auto rep = sensitivity_report(scores, mismatched_scores(features, mode, {}, sa.threads),
                                          mode.kind == MismatchMode::sample);
      write_json(out_path, to_json(rep));
    } else if (*sync_synth) {
      const auto manifest = synth::write_corpus(out_dir, synth::make_corpus(cp));
      std::cout << manifest.string() << "\n";
    } else if (*ltc_decode) {
      const auto result = ltc::decode_ltc(read_channel(wav_path, channel));
      csv::write_text(out_path, ltc::format_frames_csv(result.frames));
    } else if (*ltc_encode) {
      const auto start = ltc::parse_timecode(start_tc).timecode;
      write_wav_file(out_path, ltc::encode_ltc(start, n_frames, rate));
    } else if (*ltc_align) {
      const auto frames = ltc::decode_ltc(read_channel(wav_path, channel)).frames;
      const auto schedule = ltc::parse_schedule_csv(csv::read_text(schedule_path));
      csv::write_text(out_path, ltc::format_alignment_csv(schedule, ltc::align_session(frames, schedule)));
    } else if (*mel_dump) {
      MelParams mp;
      mp.n_bands = mel_bands;
      csv::write_text(out_path, format_mel_csv(compute_mel_spectrogram(read_channel(wav_path, channel), mp)));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_data_error(e.code()) ? kData : kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return 0;
}

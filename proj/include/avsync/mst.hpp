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


// Matrix sentence test structure: the 5 x 10 word matrix, balanced test
// lists, and word scoring.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "avsync/csv.hpp"
#include "avsync/error.hpp"
#include "avsync/random.hpp"

namespace avsync::mst {

inline constexpr std::size_t kCategories = 5;
inline constexpr std::size_t kWordsPerCategory = 10;
inline constexpr std::size_t kListLength = 20;
inline constexpr std::array<std::string_view, kCategories> kCategoryNames = {
    "name", "verb", "numeral", "adjective", "object"};

struct WordMatrix {
  std::array<std::array<std::string, kWordsPerCategory>, kCategories> words;

  void validate() const {
    std::set<std::string> seen;
    for (const auto& cat : words) {
      for (const auto& w : cat) {
        if (w.empty()) throw Error(Errc::malformed_file, "empty word in matrix");
        if (!seen.insert(w).second) throw Error(Errc::malformed_file, "duplicate word '" + w + "'");
      }
    }
  }

  // Word matrix of the German female-speaker matrix test.
  static WordMatrix olsa() {
    return WordMatrix{{{
        {"Peter", "Kerstin", "Tanja", "Ulrich", "Britta", "Wolfgang", "Stefan", "Thomas", "Doris", "Nina"},
        {"bekommt", "sieht", "kauft", "gibt", "schenkt", "verleiht", "hat", "gewann", "nahm", "malt"},
        {"drei", "neun", "sieben", "acht", "vier", "fünf", "zwei", "achtzehn", "zwölf", "elf"},
        {"kleine", "schwere", "alte", "nasse", "grüne", "teure", "schöne", "rote", "große", "weiße"},
        {"Autos", "Bilder", "Blumen", "Dosen", "Messer", "Ringe", "Schuhe", "Sessel", "Steine", "Tassen"},
    }}};
  }

  int index_of(std::size_t category, std::string_view word) const {
    for (std::size_t i = 0; i < kWordsPerCategory; ++i) {
      if (words[category][i] == word) return static_cast<int>(i);
    }
    throw Error(Errc::malformed_file, "'" + std::string(word) + "' is not a " +
                                          std::string(kCategoryNames[category]));
  }
};

// JSON object with the five category names, each an array of 10 strings.
inline WordMatrix parse_word_matrix_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::malformed_file, std::string("word matrix JSON: ") + e.what());
  }
  WordMatrix m;
  for (std::size_t c = 0; c < kCategories; ++c) {
    const std::string key(kCategoryNames[c]);
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != kWordsPerCategory) {
      throw Error(Errc::malformed_file, "word matrix needs 10 words under '" + key + "'");
    }
    for (std::size_t i = 0; i < kWordsPerCategory; ++i) {
      if (!j[key][i].is_string()) throw Error(Errc::malformed_file, "non-string word");
      m.words[c][i] = j[key][i].get<std::string>();
    }
  }
  m.validate();
  return m;
}

inline std::string word_matrix_json(const WordMatrix& m) {
  nlohmann::ordered_json j;
  for (std::size_t c = 0; c < kCategories; ++c) {
    j[std::string(kCategoryNames[c])] = m.words[c];
  }
  return j.dump(2) + "\n";
}

// Word indices in canonical name-verb-numeral-adjective-object order.
struct MatrixSentence {
  int sentence_id = 0;
  std::array<int, kCategories> words{};

  bool operator==(const MatrixSentence&) const = default;
};

struct TestList {
  int list_id = 0;
  std::vector<MatrixSentence> sentences;

  bool operator==(const TestList&) const = default;
};

// One slot per category; nullopt is the no-answer option.
struct Response {
  std::array<std::optional<int>, kCategories> words{};

  static Response from(const MatrixSentence& s) {
    Response r;
    for (std::size_t c = 0; c < kCategories; ++c) r.words[c] = s.words[c];
    return r;
  }
};

inline int score_response(const MatrixSentence& target, const Response& response) {
  int correct = 0;
  for (std::size_t c = 0; c < kCategories; ++c) {
    if (response.words[c] && *response.words[c] == target.words[c]) ++correct;
  }
  return correct;
}

inline double word_percentage(std::span<const int> words_correct) {
  if (words_correct.empty()) throw Error(Errc::argument_error, "no scored sentences");
  long total = 0;
  for (int w : words_correct) total += w;
  return 100.0 * static_cast<double>(total) /
         (static_cast<double>(kCategories) * static_cast<double>(words_correct.size()));
}

inline bool is_balanced(const TestList& list) {
  if (list.sentences.size() != kListLength) return false;
  for (std::size_t c = 0; c < kCategories; ++c) {
    std::array<int, kWordsPerCategory> hist{};
    for (const auto& s : list.sentences) {
      if (s.words[c] < 0 || s.words[c] >= static_cast<int>(kWordsPerCategory)) return false;
      ++hist[static_cast<std::size_t>(s.words[c])];
    }
    for (int h : hist) {
      if (h != 2) return false;
    }
  }
  return true;
}

// n_lists lists of 20 sentences; in every list each word of each category
// occurs exactly twice (two shuffled passes per category) and no sentence
// repeats. Output depends only on (matrix, n_lists, seed).
inline std::vector<TestList> generate_lists(const WordMatrix& matrix, std::size_t n_lists,
                                            std::uint64_t seed) {
  matrix.validate();
  if (n_lists < 1) throw Error(Errc::argument_error, "n_lists must be >= 1");
  Rng rng(stream_seed(seed, 0, 0x11575));
  std::vector<TestList> lists;
  lists.reserve(n_lists);
  for (std::size_t l = 0; l < n_lists; ++l) {
    TestList list;
    list.list_id = static_cast<int>(l + 1);
    for (;;) {
      std::array<std::array<int, kListLength>, kCategories> columns{};
      for (auto& col : columns) {
        for (std::size_t pass = 0; pass < 2; ++pass) {
          std::array<int, kWordsPerCategory> perm{};
          for (std::size_t i = 0; i < kWordsPerCategory; ++i) perm[i] = static_cast<int>(i);
          // Fisher-Yates with an explicit draw so lists do not depend on the
          // standard library's shuffle.
          for (std::size_t i = kWordsPerCategory - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(rng() % (i + 1));
            std::swap(perm[i], perm[j]);
          }
          std::copy(perm.begin(), perm.end(), col.begin() + static_cast<std::ptrdiff_t>(pass * kWordsPerCategory));
        }
      }
      list.sentences.clear();
      std::set<std::array<int, kCategories>> seen;
      bool unique = true;
      for (std::size_t s = 0; s < kListLength; ++s) {
        MatrixSentence ms;
        ms.sentence_id = static_cast<int>(l * kListLength + s + 1);
        for (std::size_t c = 0; c < kCategories; ++c) ms.words[c] = columns[c][s];
        unique = unique && seen.insert(ms.words).second;
        list.sentences.push_back(ms);
      }
      if (unique) break;
    }
    lists.push_back(std::move(list));
  }
  return lists;
}

// CSV `list_id,position,name,verb,numeral,adjective,object` (positions 1-based).
inline std::string format_lists_csv(const WordMatrix& matrix, std::span<const TestList> lists) {
  std::string out = "list_id,position,name,verb,numeral,adjective,object\n";
  for (const auto& l : lists) {
    for (std::size_t p = 0; p < l.sentences.size(); ++p) {
      out += std::to_string(l.list_id) + "," + std::to_string(p + 1);
      for (std::size_t c = 0; c < kCategories; ++c) {
        out += "," + csv::quote(matrix.words[c][static_cast<std::size_t>(l.sentences[p].words[c])]);
      }
      out += "\n";
    }
  }
  return out;
}

inline std::vector<TestList> parse_lists_csv(const WordMatrix& matrix, std::string_view text) {
  const auto table = csv::parse(text);
  const std::size_t id_col = table.column("list_id");
  const std::size_t pos_col = table.column("position");
  std::array<std::size_t, kCategories> cols{};
  for (std::size_t c = 0; c < kCategories; ++c) cols[c] = table.column(kCategoryNames[c]);
  std::vector<TestList> lists;
  for (const auto& row : table.rows) {
    const int id = std::stoi(row[id_col]);
    const int pos = std::stoi(row[pos_col]);
    if (lists.empty() || lists.back().list_id != id) lists.push_back(TestList{id, {}});
    auto& l = lists.back();
    if (pos != static_cast<int>(l.sentences.size()) + 1) {
      throw Error(Errc::malformed_file, "list " + std::to_string(id) + " positions out of order");
    }
    MatrixSentence s;
    s.sentence_id = static_cast<int>((id - 1) * static_cast<int>(kListLength) + pos);
    for (std::size_t c = 0; c < kCategories; ++c) s.words[c] = matrix.index_of(c, row[cols[c]]);
    l.sentences.push_back(s);
  }
  return lists;
}

}  // namespace avsync::mst

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

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "avsync/error.hpp"
#include "avsync/mst.hpp"
#include "avsync/random.hpp"

namespace avsync {
namespace {

using mst::kCategories;
using mst::kWordsPerCategory;

TEST(WordMatrix, OlsaIsFiftyDistinctWords) {
  const auto m = mst::WordMatrix::olsa();
  std::set<std::string> words;
  for (const auto& cat : m.words) {
    EXPECT_EQ(cat.size(), kWordsPerCategory);
    words.insert(cat.begin(), cat.end());
  }
  EXPECT_EQ(words.size(), 50u);
  EXPECT_NO_THROW(m.validate());
}

TEST(WordMatrix, JsonRoundTripAndErrors) {
  const auto m = mst::WordMatrix::olsa();
  const auto back = mst::parse_word_matrix_json(mst::word_matrix_json(m));
  EXPECT_EQ(back.words, m.words);
  EXPECT_THROW(mst::parse_word_matrix_json("{"), Error);
  EXPECT_THROW(mst::parse_word_matrix_json(R"({"name": ["a"]})"), Error);
  auto dup = m;
  dup.words[1][0] = dup.words[0][0];
  EXPECT_THROW(dup.validate(), Error);
}

TEST(ScoreResponse, Examples) {
  const mst::MatrixSentence s{1, {0, 1, 2, 3, 4}};
  EXPECT_EQ(mst::score_response(s, mst::Response::from(s)), 5);
  EXPECT_EQ(mst::score_response(s, mst::Response{}), 0);
  auto r = mst::Response::from(s);
  r.words[3] = 9;
  EXPECT_EQ(mst::score_response(s, r), 4);
  EXPECT_GE(4.0 / 5.0, 0.8);
}

TEST(ScoreResponse, SymmetricUnderJointCategoryPermutation) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    mst::MatrixSentence s;
    mst::Response r;
    for (std::size_t c = 0; c < kCategories; ++c) {
      s.words[c] = static_cast<int>(rng() % kWordsPerCategory);
      const auto pick = rng() % 3;
      if (pick == 0) r.words[c] = s.words[c];
      else if (pick == 1) r.words[c] = static_cast<int>(rng() % kWordsPerCategory);
    }
    std::array<std::size_t, kCategories> perm{0, 1, 2, 3, 4};
    for (std::size_t i = kCategories - 1; i > 0; --i) std::swap(perm[i], perm[rng() % (i + 1)]);
    mst::MatrixSentence sp;
    mst::Response rp;
    for (std::size_t c = 0; c < kCategories; ++c) {
      sp.words[c] = s.words[perm[c]];
      rp.words[c] = r.words[perm[c]];
    }
    EXPECT_EQ(mst::score_response(s, r), mst::score_response(sp, rp));
  }
}

TEST(WordPercentage, Examples) {
  EXPECT_DOUBLE_EQ(mst::word_percentage(std::vector<int>(20, 5)), 100.0);
  EXPECT_DOUBLE_EQ(mst::word_percentage(std::vector<int>(20, 0)), 0.0);
  EXPECT_DOUBLE_EQ(mst::word_percentage(std::vector<int>(20, 4)), 80.0);
  EXPECT_THROW(mst::word_percentage(std::vector<int>{}), Error);
}

TEST(GenerateLists, FortyFiveBalancedLists) {
  const auto m = mst::WordMatrix::olsa();
  const auto lists = mst::generate_lists(m, 45, 45);
  ASSERT_EQ(lists.size(), 45u);
  std::array<std::array<int, kWordsPerCategory>, kCategories> total{};
  for (const auto& l : lists) {
    ASSERT_EQ(l.sentences.size(), 20u);
    EXPECT_TRUE(mst::is_balanced(l));
    std::set<std::array<int, kCategories>> unique;
    int occurrences = 0;
    for (std::size_t c = 0; c < kCategories; ++c) {
      std::array<int, kWordsPerCategory> hist{};
      for (const auto& s : l.sentences) {
        ++hist[static_cast<std::size_t>(s.words[c])];
        ++total[c][static_cast<std::size_t>(s.words[c])];
        ++occurrences;
      }
      for (int h : hist) EXPECT_EQ(h, 2);
    }
    for (const auto& s : l.sentences) unique.insert(s.words);
    EXPECT_EQ(unique.size(), 20u);
    EXPECT_EQ(occurrences, 100);
  }
  for (const auto& cat : total) {
    for (int n : cat) EXPECT_EQ(n, 90);
  }
}

TEST(GenerateLists, Deterministic) {
  const auto m = mst::WordMatrix::olsa();
  EXPECT_EQ(mst::generate_lists(m, 5, 11), mst::generate_lists(m, 5, 11));
  EXPECT_NE(mst::generate_lists(m, 5, 11), mst::generate_lists(m, 5, 12));
  // A prefix of a longer run is the shorter run.
  const auto longer = mst::generate_lists(m, 8, 11);
  const auto shorter = mst::generate_lists(m, 5, 11);
  EXPECT_TRUE(std::equal(shorter.begin(), shorter.end(), longer.begin()));
  EXPECT_THROW(mst::generate_lists(m, 0, 1), Error);
}

TEST(GenerateLists, CsvRoundTrip) {
  const auto m = mst::WordMatrix::olsa();
  const auto lists = mst::generate_lists(m, 3, 2);
  const auto csv = mst::format_lists_csv(m, lists);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "list_id,position,name,verb,numeral,adjective,object");
  EXPECT_EQ(mst::parse_lists_csv(m, csv), lists);
}

TEST(IsBalanced, RejectsUnbalanced) {
  auto l = mst::generate_lists(mst::WordMatrix::olsa(), 1, 9)[0];
  l.sentences[0].words[2] = (l.sentences[0].words[2] + 1) % 10;
  EXPECT_FALSE(mst::is_balanced(l));
  l.sentences.pop_back();
  EXPECT_FALSE(mst::is_balanced(l));
}

}  // namespace
}  // namespace avsync

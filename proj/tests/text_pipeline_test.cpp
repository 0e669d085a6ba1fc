// text_pipeline_test.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pgforge/text_pipeline.hpp"

#include <gtest/gtest.h>
#include <unicode/uchar.h>
#include <unicode/uscript.h>

#include <random>

#include "pgforge/utf8.hpp"
#include "test_support.hpp"

namespace pgforge {
namespace {

using Texts = std::vector<std::string>;

Texts run_dehyphenate(const Texts& in, ProvenanceLog* log = nullptr) {
  return line_texts(dehyphenate(make_lines(in), log));
}

Texts run_filter(const Texts& in, double threshold = 0.5,
                 ProvenanceLog* log = nullptr) {
  return line_texts(filter_latin(make_lines(in), log, {threshold}));
}

std::size_t token_count(const Texts& lines) {
  std::size_t n = 0;
  for (const auto& l : lines) n += split_on_whitespace(std::string_view(l)).size();
  return n;
}

// Independent of the code under test: ICU's own alphabetic property and
// script lookup.
std::u32string letters_only(const Texts& lines, bool greek_only) {
  std::u32string out;
  for (const auto& l : lines) {
    for (char32_t c : decode_utf8(l)) {
      if (!u_isalpha(static_cast<UChar32>(c))) continue;
      if (u_getCombiningClass(static_cast<UChar32>(c)) != 0) continue;
      if (greek_only) {
        UErrorCode status = U_ZERO_ERROR;
        if (uscript_getScript(static_cast<UChar32>(c), &status) != USCRIPT_GREEK)
          continue;
      }
      out.push_back(c);
    }
  }
  return out;
}

// Random line material: Greek and Latin words, mixed tokens, numbers,
// punctuation, hyphen-broken fragments and blank lines.
Texts random_lines(std::mt19937& rng) {
  static const std::vector<std::string> pieces = {
      "\xE1\xBD\x81",                      // ὁ
      "\xCE\xBB\xCF\x8C\xCE\xB3\xCE\xBF\xCF\x82",  // λόγος
      "\xCE\xB8\xCE\xB5\xCE\xBF\xCE\xBB\xCE\xBF-",  // θεολο-
      "\xCE\xB3\xCE\xAF\xCE\xB1",          // γία
      "\xCE\xBA\xCE\xB1\xCE\xAF,",         // καί,
      "\xCE\xBB\xCE\xBF\xCC\x81-",         // λο + combining acute + hyphen
      "est", "Sancti", "Patris", "(Matth.", "12", "-", "--", "\xE2\x80\x94",
      "ab-", "\xCE\xB1\xCE\xB2\xE2\x80\x90",  // αβ‐ (U+2010)
      "x\xCE\xB1", "\xCE\xB1x-", ";", "\xCE\x87",
  };
  std::uniform_int_distribution<int> n_lines(0, 7), n_tokens(0, 5), space(0, 6);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  Texts lines(n_lines(rng));
  for (auto& line : lines) {
    const int t = n_tokens(rng);
    for (int k = 0; k < t; ++k) {
      const int s = space(rng);
      if (k > 0 || s == 0) line += s == 1 ? "  " : (s == 2 ? "\t" : " ");
      line += pieces[pick(rng)];
    }
    if (space(rng) == 0) line += " ";
  }
  return lines;
}

//===----------------------------------------------------------------------===//
// dehyphenate
//===----------------------------------------------------------------------===//

TEST(Dehyphenate, JoinsBrokenWord) {
  const Texts in = {encode_utf8(U"θεολο-"), encode_utf8(U"γία καί")};
  const Texts out = run_dehyphenate(in);
  EXPECT_EQ(out, (Texts{encode_utf8(U"θεολογία"), encode_utf8(U"καί")}));
  EXPECT_EQ(token_count(in), 3u);
  EXPECT_EQ(token_count(out), 2u);
}

TEST(Dehyphenate, NoHyphenUnchanged) {
  EXPECT_EQ(run_dehyphenate({"abc", "def"}), (Texts{"abc", "def"}));
}

TEST(Dehyphenate, TrailingHyphenOnLastLineIsFlagged) {
  ProvenanceLog log;
  EXPECT_EQ(run_dehyphenate({"abc-"}, &log), (Texts{"abc-"}));
  ASSERT_EQ(log.flags().size(), 1u);
  EXPECT_EQ(log.flags()[0].kind, "hyphen_at_end");
  EXPECT_EQ(log.flags()[0].line_id, "l1");
  EXPECT_TRUE(log.entries().empty());
}

TEST(Dehyphenate, ProvenanceNamesBothLines) {
  ProvenanceLog log;
  run_dehyphenate({"ab-", "cd ef"}, &log);
  ASSERT_EQ(log.entries().size(), 1u);
  EXPECT_EQ(log.entries()[0].op, "dehyphenate");
  EXPECT_EQ(log.entries()[0].line_ids, (std::vector<std::string>{"l1", "l2"}));
  EXPECT_EQ(log.entries()[0].removed, "-");
}

TEST(Dehyphenate, ConsumedLineDisappears) {
  ProvenanceLog log;
  const auto out = dehyphenate(make_lines({"ab-", "cd", "ef"}), &log);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], (SourceLine{"l1", "abcd"}));
  EXPECT_EQ(out[1], (SourceLine{"l3", "ef"}));
  EXPECT_EQ(log.entries().back().op, "drop_consumed_line");
}

TEST(Dehyphenate, ChainsThroughHyphenatedFragments) {
  EXPECT_EQ(run_dehyphenate({"ab-", "cd-", "ef gh"}), (Texts{"abcdef", "gh"}));
}

TEST(Dehyphenate, OnlyAfterALetter) {
  // Dashes and hyphens after punctuation or digits are not line breaks.
  EXPECT_EQ(run_dehyphenate({"a -", "b"}), (Texts{"a -", "b"}));
  EXPECT_EQ(run_dehyphenate({"12-", "b"}), (Texts{"12-", "b"}));
  EXPECT_EQ(run_dehyphenate({"a.-", "b"}), (Texts{"a.-", "b"}));
  // Combining marks on the letter are looked through.
  EXPECT_EQ(run_dehyphenate({encode_utf8(U"\u03BB\u03BF\u0301-"),
                             encode_utf8(U"\u03B3\u03BF\u03C2")}),
            (Texts{encode_utf8(U"\u03BB\u03BF\u0301\u03B3\u03BF\u03C2")}));
}

TEST(Dehyphenate, HyphenVariantsAndTrailingSpace) {
  EXPECT_EQ(run_dehyphenate({"ab\xE2\x80\x90  ", "cd"}), (Texts{"abcd"}));
  EXPECT_EQ(run_dehyphenate({"ab\xE2\x80\x91", "cd"}), (Texts{"abcd"}));
  // Soft hyphen only when configured.
  const Texts soft = {"ab\xC2\xAD", "cd"};
  EXPECT_EQ(run_dehyphenate(soft), soft);
  EXPECT_EQ(line_texts(dehyphenate(make_lines(soft), nullptr, {U"\u00AD"})),
            (Texts{"abcd"}));
}

TEST(Dehyphenate, BlankNextLineBlocksAndFlags) {
  ProvenanceLog log;
  EXPECT_EQ(run_dehyphenate({"ab-", "  ", "cd"}, &log), (Texts{"ab-", "  ", "cd"}));
  ASSERT_EQ(log.flags().size(), 1u);
  EXPECT_EQ(log.flags()[0].kind, "hyphen_before_empty_line");
}

TEST(Dehyphenate, KeepsLettersInOrder) {
  std::mt19937 rng(71);
  for (int k = 0; k < 500; ++k) {
    const Texts in = random_lines(rng);
    EXPECT_EQ(letters_only(run_dehyphenate(in), false), letters_only(in, false));
  }
}

TEST(Dehyphenate, Idempotent) {
  std::mt19937 rng(72);
  for (int k = 0; k < 500; ++k) {
    const auto once = dehyphenate(make_lines(random_lines(rng)));
    EXPECT_EQ(dehyphenate(once), once);
  }
}

//===----------------------------------------------------------------------===//
// drop_empty_lines
//===----------------------------------------------------------------------===//

TEST(DropEmptyLines, Examples) {
  auto run = [](const Texts& in) { return line_texts(drop_empty_lines(make_lines(in))); };
  EXPECT_EQ(run({"\xCE\xB1", "", "\xCE\xB2"}), (Texts{"\xCE\xB1", "\xCE\xB2"}));
  EXPECT_TRUE(run({"", " ", "\t\xE2\x80\x83"}).empty());
  EXPECT_EQ(run({"a", "b"}), (Texts{"a", "b"}));
}

TEST(DropEmptyLines, KeepsIdsAndLogs) {
  ProvenanceLog log;
  const auto out = drop_empty_lines(make_lines({"a", "", "b"}), &log);
  EXPECT_EQ(out[1].line_id, "l3");
  ASSERT_EQ(log.entries().size(), 1u);
  EXPECT_EQ(log.entries()[0].line_ids, (std::vector<std::string>{"l2"}));
}

TEST(DropEmptyLines, Idempotent) {
  std::mt19937 rng(73);
  for (int k = 0; k < 500; ++k) {
    const auto once = drop_empty_lines(make_lines(random_lines(rng)));
    EXPECT_EQ(drop_empty_lines(once), once);
  }
}

//===----------------------------------------------------------------------===//
// filter_latin
//===----------------------------------------------------------------------===//

TEST(FilterLatin, DropsLatinLine) {
  ProvenanceLog log;
  EXPECT_TRUE(run_filter({"Sancti Patris"}, 0.5, &log).empty());
  EXPECT_EQ(log.entries()[0].op, "drop_latin_line");
  EXPECT_EQ(log.entries()[0].removed, "Sancti Patris");
}

TEST(FilterLatin, RemovesLatinToken) {
  ProvenanceLog log;
  EXPECT_EQ(run_filter({encode_utf8(U"ὁ λόγος est μέγας")}, 0.5, &log),
            (Texts{encode_utf8(U"ὁ λόγος μέγας")}));
  ASSERT_EQ(log.entries().size(), 1u);
  EXPECT_EQ(log.entries()[0].removed, "est");
}

TEST(FilterLatin, PureGreekUnchanged) {
  const Texts in = {encode_utf8(U"ἐν  ἀρχῇ ἦν ὁ λόγος,")};
  EXPECT_EQ(run_filter(in), in);  // spacing untouched as well
}

TEST(FilterLatin, MixedTokensKeptAndFlagged) {
  ProvenanceLog log;
  const Texts in = {encode_utf8(U"λόγοςx καί")};
  EXPECT_EQ(run_filter(in, 0.5, &log), in);
  ASSERT_EQ(log.flags().size(), 1u);
  EXPECT_EQ(log.flags()[0].kind, "mixed_script_token");
}

TEST(FilterLatin, LatinMajorityLineWithGreekIsKept) {
  ProvenanceLog log;
  EXPECT_EQ(run_filter({encode_utf8(U"Sancti Patris nostri λόγος")}, 0.5, &log),
            (Texts{encode_utf8(U"λόγος")}));
  EXPECT_EQ(log.flags()[0].kind, "latin_majority_line_kept");
}

TEST(FilterLatin, ThresholdControlsLineDrop) {
  // Latin against Cyrillic letters: 4 of 7 are Latin.
  const Texts in = {"abcd \xD0\xB0\xD0\xB1\xD0\xB2"};
  EXPECT_TRUE(run_filter(in, 0.5).empty());
  EXPECT_EQ(run_filter(in, 0.6), (Texts{"\xD0\xB0\xD0\xB1\xD0\xB2"}));
  // With threshold 1 nothing is dropped by share; an all-Latin line then
  // empties through the token rule and goes.
  EXPECT_TRUE(run_filter({"est"}, 1.0).empty());
  EXPECT_EQ(run_filter({"12 est"}, 1.0), (Texts{"12"}));
  EXPECT_THROW(run_filter({"a"}, 1.5), std::invalid_argument);
  EXPECT_THROW(run_filter({"a"}, -0.1), std::invalid_argument);
}

TEST(FilterLatin, NoLettersNoChange) {
  EXPECT_EQ(run_filter({"12 ; 34"}), (Texts{"12 ; 34"}));
}

TEST(FilterLatin, NeverRemovesGreekLetters) {
  std::mt19937 rng(74);
  for (int k = 0; k < 500; ++k) {
    const Texts in = random_lines(rng);
    for (double t : {0.0, 0.5, 1.0})
      EXPECT_EQ(letters_only(run_filter(in, t), true), letters_only(in, true));
  }
}

TEST(FilterLatin, Idempotent) {
  std::mt19937 rng(75);
  for (int k = 0; k < 500; ++k) {
    const auto once = filter_latin(make_lines(random_lines(rng)));
    EXPECT_EQ(filter_latin(once), once);
  }
}

//===----------------------------------------------------------------------===//
// clean_lines
//===----------------------------------------------------------------------===//

TEST(CleanLines, RemovalCanExposeAHyphen) {
  ProvenanceLog log;
  const auto out = clean_lines(
      make_lines({encode_utf8(U"λό- est"), "", encode_utf8(U"γος")}), &log);
  EXPECT_EQ(line_texts(out), (Texts{encode_utf8(U"λόγος")}));
  std::vector<std::string> ops;
  for (const auto& e : log.entries()) ops.push_back(e.op);
  EXPECT_EQ(ops, (std::vector<std::string>{"drop_empty", "remove_latin_token",
                                           "dehyphenate", "drop_consumed_line"}));
}

TEST(CleanLines, Idempotent) {
  std::mt19937 rng(76);
  for (int k = 0; k < 500; ++k) {
    const auto once = clean_lines(make_lines(random_lines(rng)));
    ProvenanceLog log;
    EXPECT_EQ(clean_lines(once, &log), once);
    EXPECT_TRUE(log.entries().empty());
  }
}

TEST(CleanLines, FlagsDescribeFinalState) {
  ProvenanceLog log;
  clean_lines(make_lines({"\xCE\xB1\xCE\xB2-"}), &log);
  EXPECT_EQ(log.flags().size(), 1u);  // not repeated per pass
}

TEST(CleanPages, JobsDoNotChangeResult) {
  std::mt19937 rng(77);
  std::vector<std::vector<SourceLine>> pages;
  for (int k = 0; k < 30; ++k) pages.push_back(make_lines(random_lines(rng)));
  const auto one = clean_pages(pages, {}, 1);
  const auto four = clean_pages(pages, {}, 4);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t k = 0; k < one.size(); ++k) {
    EXPECT_EQ(one[k].lines, four[k].lines);
    EXPECT_EQ(one[k].log.to_json(), four[k].log.to_json());
  }
}

TEST(ProvenanceLog, JsonShape) {
  ProvenanceLog log;
  clean_lines(make_lines({"ab-", "cd est"}), &log);
  const auto j = log.to_json();
  ASSERT_TRUE(j.contains("entries"));
  ASSERT_TRUE(j.contains("review_flags"));
  EXPECT_EQ(j["entries"][0]["op"], "dehyphenate");
  EXPECT_EQ(j["entries"][0]["line_ids"], nlohmann::json::array({"l1", "l2"}));
}

}  // namespace
}  // namespace pgforge

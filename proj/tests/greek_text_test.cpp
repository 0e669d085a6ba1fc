// greek_text_test.cpp
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

#include "pgforge/greek_text.hpp"

#include <gtest/gtest.h>
#include <unicode/uchar.h>

#include <random>
#include <sstream>

#include "pgforge/errors.hpp"
#include "pgforge/utf8.hpp"
#include "test_support.hpp"

namespace {

using namespace pgforge;

// The seven monotonic/polytonic duplicates singled out in the OCR error
// analysis, as (tonos, oxia).
constexpr std::pair<char32_t, char32_t> kSevenPairs[] = {
    {0x03AF, 0x1F77}, {0x03AC, 0x1F71}, {0x03AD, 0x1F73}, {0x03CC, 0x1F79},
    {0x03CD, 0x1F7B}, {0x03AE, 0x1F75}, {0x03CE, 0x1F7D}};

std::u32string base_letters(std::u32string_view s) {
  std::u32string out;
  for (char32_t cp : s) {
    if (is_greek_letter(cp)) out.push_back(decompose_profile(cp).base_letter);
  }
  return out;
}

//===----------------------------------------------------------------------===//
// canonicalize
//===----------------------------------------------------------------------===//

TEST(Canonicalize, OxiaAlphaBecomesTonos) {
  EXPECT_EQ(canonicalize(U"\u1F71"), U"\u03AC");
}

TEST(Canonicalize, NonGreekPassesThrough) {
  EXPECT_EQ(canonicalize(std::string_view("abc")), "abc");
}

TEST(Canonicalize, SevenPairsCollapse) {
  for (auto [tonos, oxia] : kSevenPairs) {
    const std::u32string a(1, tonos), b(1, oxia);
    EXPECT_EQ(canonicalize(a), canonicalize(b)) << codepoint_hex(oxia);
    EXPECT_EQ(canonicalize(b), a);
  }
}

TEST(Canonicalize, ComposesDecomposedInput) {
  // alpha + psili + oxia -> U+1F04
  EXPECT_EQ(canonicalize(U"\u03B1\u0313\u0301"), U"\u1F04");
}

TEST(Canonicalize, KeepsGreekPunctuation) {
  EXPECT_EQ(canonicalize(U"\u03C4\u03AF\u037E"), U"\u03C4\u03AF\u037E");
  EXPECT_EQ(canonicalize(U"\u03BB\u0387"), U"\u03BB\u0387");
}

TEST(Canonicalize, IdempotentOnRandomGreek) {
  std::mt19937 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto s = testutil::random_polytonic(rng, 24);
    const auto once = canonicalize(s);
    ASSERT_EQ(canonicalize(once), once) << encode_utf8(s);
  }
}

TEST(Canonicalize, PreservesBaseLetters) {
  std::mt19937 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto s = testutil::random_polytonic(rng, 24);
    ASSERT_EQ(base_letters(canonicalize(s)), base_letters(s)) << encode_utf8(s);
  }
}

TEST(Canonicalize, NeverChangesIntuitiveForm) {
  std::mt19937 rng(13);
  for (int i = 0; i < 1000; ++i) {
    const auto s = testutil::random_polytonic(rng, 24);
    ASSERT_EQ(intuitive_form(canonicalize(s)), intuitive_form(s))
        << encode_utf8(s);
  }
}

TEST(Canonicalize, CustomTableApplies) {
  std::istringstream tsv("# micro sign to mu\nU+00B5\t03BC\n");
  const auto table = CanonicalizationTable::from_tsv(tsv);
  EXPECT_EQ(canonicalize(U"\u00B5", table), U"\u03BC");
}

//===----------------------------------------------------------------------===//
// CanonicalizationTable
//===----------------------------------------------------------------------===//

TEST(CanonicalizationTable, BuiltinCoversSevenPairs) {
  const auto& table = CanonicalizationTable::builtin();
  for (auto [tonos, oxia] : kSevenPairs) {
    ASSERT_TRUE(table.lookup(oxia).has_value());
    EXPECT_EQ(*table.lookup(oxia), tonos);
  }
  EXPECT_GE(table.size(), 16u);
}

TEST(CanonicalizationTable, BuiltinHasNoChains) {
  const auto& table = CanonicalizationTable::builtin();
  for (const auto& [variant, canonical] : table.pairs()) {
    EXPECT_FALSE(table.lookup(canonical).has_value()) << codepoint_hex(canonical);
  }
}

TEST(CanonicalizationTable, RejectsChainAndConflict) {
  CanonicalizationTable table;
  table.add(0x00B5, 0x03BC);
  table.add(0x00B5, 0x03BC);  // repeat is fine
  EXPECT_THROW(table.add(0x00B5, 0x03BD), std::invalid_argument);
  EXPECT_THROW(table.add(0x03BC, 0x03BD), std::invalid_argument);
  EXPECT_THROW(table.add(0x2126, 0x00B5), std::invalid_argument);
  EXPECT_THROW(table.add(0x03B1, 0x03B1), std::invalid_argument);
  // U+1F71 decomposes, so it cannot be a canonical target.
  EXPECT_THROW(table.add(0x03AC, 0x1F71), std::invalid_argument);
}

TEST(CanonicalizationTable, TsvErrorsCarryLineNumber) {
  std::istringstream bad("# ok\n1F71\t03AC\nzzz\t03AC\n");
  try {
    CanonicalizationTable::from_tsv(bad);
    FAIL() << "expected TableError";
  } catch (const TableError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::istringstream one_field("1F71\n");
  EXPECT_THROW(CanonicalizationTable::from_tsv(one_field), TableError);
}

TEST(CanonicalizationTable, MissingFileIsIoError) {
  EXPECT_THROW(CanonicalizationTable::from_file("/nonexistent/table.tsv"),
               IoError);
}

//===----------------------------------------------------------------------===//
// decompose_profile / recompose
//===----------------------------------------------------------------------===//

TEST(DecomposeProfile, IotaWithOxia) {
  const auto p = decompose_profile(U'\u1F77');
  EXPECT_EQ(p.base_letter, U'\u03B9');
  EXPECT_EQ(p.breathing, Breathing::None);
  EXPECT_EQ(p.accent, Accent::Acute);
  EXPECT_EQ(p.letter_case, LetterCase::Lower);
}

TEST(DecomposeProfile, BareAlpha) {
  const auto p = decompose_profile(U'\u03B1');
  EXPECT_EQ(p.base_letter, U'\u03B1');
  EXPECT_FALSE(p.has_marks());
  EXPECT_EQ(p.letter_case, LetterCase::Lower);
}

TEST(DecomposeProfile, AlphaRoughYpogegrammeni) {
  // UnicodeData: 1F81 -> 1F01 0345 -> 03B1 0314 0345
  const auto p = decompose_profile(U'\u1F81');
  EXPECT_EQ(p.base_letter, U'\u03B1');
  EXPECT_EQ(p.breathing, Breathing::Rough);
  EXPECT_EQ(p.accent, Accent::None);
  EXPECT_TRUE(p.iota_subscript);
  EXPECT_FALSE(p.diaeresis);
}

TEST(DecomposeProfile, UppercaseAndTitlecase) {
  const auto upper = decompose_profile(U'\u1F0C');  // capital alpha psili oxia
  EXPECT_EQ(upper.base_letter, U'\u03B1');
  EXPECT_EQ(upper.letter_case, LetterCase::Upper);
  EXPECT_EQ(upper.breathing, Breathing::Smooth);
  EXPECT_EQ(upper.accent, Accent::Acute);

  const auto title = decompose_profile(U'\u1F88');  // 0391 0313 0345
  EXPECT_EQ(title.letter_case, LetterCase::Upper);
  EXPECT_TRUE(title.iota_subscript);
}

TEST(DecomposeProfile, DiaeresisAndLength) {
  const auto p = decompose_profile(U'\u0390');  // 03B9 0308 0301
  EXPECT_TRUE(p.diaeresis);
  EXPECT_EQ(p.accent, Accent::Acute);
  EXPECT_EQ(decompose_profile(U'\u1FB1').length_mark, LengthMark::Macron);
  EXPECT_EQ(decompose_profile(U'\u1FB0').length_mark, LengthMark::Breve);
}

TEST(DecomposeProfile, RejectsNonLetters) {
  for (char32_t cp : {U',', U'a', U'7', U'\u0301', U'\u037E', U'\u0387'}) {
    EXPECT_THROW(decompose_profile(cp), NotGreekLetter) << codepoint_hex(cp);
  }
}

TEST(DecomposeProfile, ClusterOverload) {
  const auto p = decompose_profile(U"\u03B9\u0314\u0342");
  EXPECT_EQ(p, decompose_profile(U'\u1F37'));
  EXPECT_THROW(decompose_profile(std::u32string_view(U"\u03B9x")), NotGreekLetter);
}

TEST(DecomposeProfile, RoundTripsEveryGreekLetter) {
  std::size_t checked = 0;
  for (char32_t cp = 0x0370; cp < 0x2000; ++cp) {
    if (cp == 0x0400) cp = 0x1F00;
    if (!is_greek_letter(cp)) continue;
    const auto p = decompose_profile(cp);
    const auto again = decompose_profile(std::u32string_view(recompose(p)));
    ASSERT_EQ(again, p) << codepoint_hex(cp);
    // Base letters carry nothing further to decompose.
    const auto base = decompose_profile(p.base_letter);
    ASSERT_EQ(base.base_letter, p.base_letter) << codepoint_hex(cp);
    ASSERT_FALSE(base.has_marks()) << codepoint_hex(cp);
    ++checked;
  }
  EXPECT_GT(checked, 300u);
}

//===----------------------------------------------------------------------===//
// intuitive_form
//===----------------------------------------------------------------------===//

TEST(IntuitiveForm, StripsTonos) {
  EXPECT_EQ(intuitive_form(U"\u03AC"), U"\u03B1");
  EXPECT_EQ(intuitive_form(U"\u1F71"), U"\u03B1");
}

TEST(IntuitiveForm, Logos) {
  EXPECT_EQ(intuitive_form(std::string_view("Λόγος")), "λογοσ");
}

TEST(IntuitiveForm, FinalSigmaFoldingIsOptional) {
  EXPECT_EQ(intuitive_form(std::string_view("Λόγος"), {.fold_final_sigma = false}),
            "λογος");
}

TEST(IntuitiveForm, StripsEveryPolytonicMark) {
  EXPECT_EQ(intuitive_form(std::string_view("ᾅ ᾯ ΐ ᾱ ᾰ Ἤ")), "α ω ι α α η");
}

TEST(IntuitiveForm, KeepsNonLetters) {
  EXPECT_EQ(intuitive_form(std::string_view("τί; 12, ὁ·")), "τι; 12, ο·");
  EXPECT_EQ(intuitive_form(U"\u03C4\u037E\u0387"), U"\u03C4\u037E\u0387");
}

TEST(IntuitiveForm, OutputHasNoMarkedOrUppercaseGreek) {
  std::mt19937 rng(17);
  for (int i = 0; i < 500; ++i) {
    const auto out = intuitive_form(testutil::random_polytonic(rng, 24));
    for (char32_t cp : out) {
      if (!is_greek_letter(cp)) continue;
      const auto p = decompose_profile(cp);
      ASSERT_FALSE(p.has_marks()) << codepoint_hex(cp);
      if (u_tolower(static_cast<UChar32>(cp)) != static_cast<UChar32>(cp)) {
        FAIL() << "uppercase survived: " << codepoint_hex(cp);
      }
    }
  }
}

TEST(IntuitiveForm, Idempotent) {
  std::mt19937 rng(19);
  for (int i = 0; i < 1000; ++i) {
    const auto once = intuitive_form(testutil::random_polytonic(rng, 24));
    ASSERT_EQ(intuitive_form(once), once) << encode_utf8(once);
  }
}

//===----------------------------------------------------------------------===//
// script classification
//===----------------------------------------------------------------------===//

TEST(Script, Examples) {
  EXPECT_TRUE(is_greek_letter(U'\u03B1'));
  EXPECT_FALSE(is_latin_letter(U'\u03B1'));
  EXPECT_FALSE(is_greek_letter(U'q'));
  EXPECT_TRUE(is_latin_letter(U'q'));
  EXPECT_FALSE(is_greek_letter(U'7'));
  EXPECT_FALSE(is_latin_letter(U'7'));
  EXPECT_TRUE(is_greek_letter(U'\u1F81'));
  EXPECT_FALSE(is_greek_letter(U'\u0301'));
  EXPECT_FALSE(is_greek_letter(U'\u037E'));
  EXPECT_TRUE(is_latin_letter(U'\u00E9'));
}

TEST(Utf8, RejectsMalformed) {
  EXPECT_THROW(decode_utf8("\xC3"), InvalidUtf8);
  EXPECT_THROW(decode_utf8("\xED\xA0\x80"), InvalidUtf8);  // surrogate
  EXPECT_EQ(encode_utf8(decode_utf8("ὁ λόγος")), "ὁ λόγος");
}

}  // namespace

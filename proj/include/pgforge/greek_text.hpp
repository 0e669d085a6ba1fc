// greek_text.hpp
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
//
// Polytonic Greek at the codepoint level: encoding canonicalization,
// diacritic decomposition, and the lowercase unmarked "intuitive" form used
// for naive lexical search.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pgforge {

enum class Breathing { None, Smooth, Rough };
enum class Accent { None, Acute, Grave, Circumflex };
enum class LengthMark { None, Macron, Breve };
enum class LetterCase { Lower, Upper };

/// A Greek letter split into its unmarked lowercase base and the marks that
/// sit on it. Two characters with equal base_letter are "the same letter".
struct DiacriticProfile {
  char32_t base_letter = 0;
  Breathing breathing = Breathing::None;
  Accent accent = Accent::None;
  bool iota_subscript = false;
  bool diaeresis = false;
  LengthMark length_mark = LengthMark::None;
  LetterCase letter_case = LetterCase::Lower;

  bool has_marks() const;
  /// Equal marks, ignoring base letter and case.
  bool same_marks(const DiacriticProfile& other) const;

  bool operator==(const DiacriticProfile&) const = default;
};

/// Throws NotGreekLetter for anything that is not a Greek letter, including
/// standalone combining marks.
DiacriticProfile decompose_profile(char32_t ch);

/// Same as above for a base letter followed by combining marks, e.g. a
/// decomposed sequence that has no precomposed form. Marks outside the
/// polytonic inventory are ignored.
DiacriticProfile decompose_profile(std::u32string_view cluster);

/// Composed (NFC) rendering of a profile.
std::u32string recompose(const DiacriticProfile& profile);

/// Variant -> canonical codepoint mapping for visually identical Greek
/// characters with different encodings. Always a function without chains,
/// so applying it twice is the same as applying it once.
class CanonicalizationTable {
 public:
  using Pair = std::pair<char32_t, char32_t>;

  CanonicalizationTable() = default;

  /// Every oxia/tonos duplicate in Greek Extended, mapped onto the
  /// Greek-and-Coptic tonos forms.
  static const CanonicalizationTable& builtin();

  /// TSV: `variant_hex <TAB> canonical_hex`, '#' starts a comment. Hex may
  /// carry a "U+" or "0x" prefix. Throws TableError.
  static CanonicalizationTable from_tsv(std::istream& in);
  static CanonicalizationTable from_file(const std::filesystem::path& path);

  /// Throws std::invalid_argument if the pair would break the function or
  /// no-chain property, or if `canonical` is not stable under NFC.
  void add(char32_t variant, char32_t canonical);

  std::optional<char32_t> lookup(char32_t cp) const;
  std::span<const Pair> pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

 private:
  std::vector<Pair> pairs_;  // sorted by variant
};

/// NFC plus the table, with Greek punctuation (ano teleia U+0387, question
/// mark U+037E) kept verbatim rather than folded to their Latin singletons.
std::u32string canonicalize(
    std::u32string_view text,
    const CanonicalizationTable& table = CanonicalizationTable::builtin());
std::string canonicalize(
    std::string_view utf8_text,
    const CanonicalizationTable& table = CanonicalizationTable::builtin());

struct IntuitiveOptions {
  bool fold_final_sigma = true;
};

/// Lowercases letters, strips every combining mark that sits on a letter,
/// folds final sigma (unless disabled). Non-letters are preserved.
std::u32string intuitive_form(std::u32string_view text,
                              IntuitiveOptions options = {});
std::string intuitive_form(std::string_view utf8_text,
                           IntuitiveOptions options = {});

bool is_greek_letter(char32_t cp);
bool is_latin_letter(char32_t cp);
bool is_letter(char32_t cp);
bool is_combining_mark(char32_t cp);

}  // namespace pgforge

// ocr_eval.hpp
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
// Recognition accuracy: edit-distance alignment, CER/WER, and a taxonomy of
// character substitutions aimed at polytonic Greek.

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pgforge/greek_text.hpp"

namespace pgforge {

enum class EditKind { Match, Substitute, Insert, Delete };

std::string_view to_string(EditKind kind);

template <typename Symbol>
struct EditOp {
  EditKind kind = EditKind::Match;
  std::optional<Symbol> ref;  // absent for Insert
  std::optional<Symbol> hyp;  // absent for Delete

  bool operator==(const EditOp&) const = default;
};

struct EditCounts {
  std::size_t matches = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;

  std::size_t errors() const { return substitutions + insertions + deletions; }
  EditCounts& operator+=(const EditCounts& o);
  bool operator==(const EditCounts&) const = default;
};

struct Alignment {
  std::vector<EditOp<char32_t>> ops;

  EditCounts counts() const;
  std::size_t cost() const { return counts().errors(); }
  /// Concatenated ref side (match, substitute, delete).
  std::u32string reference() const;
  /// Concatenated hyp side (match, substitute, insert).
  std::u32string hypothesis() const;
};

struct WordAlignment {
  std::vector<EditOp<std::u32string>> ops;
  EditCounts counts() const;
  std::size_t cost() const { return counts().errors(); }
};

/// Minimal unit-cost alignment. Ties in the backtrace (walked from the end)
/// prefer the diagonal, then deletion, then insertion.
///
/// The dynamic program runs in a diagonal band that starts at
/// `initial_band` (widened to the length difference) and doubles until the
/// distance fits inside it, which makes the result identical to the full
/// table at a fraction of the cost for similar strings.
Alignment align_chars(std::u32string_view ref, std::u32string_view hyp,
                      std::size_t initial_band = 64);
Alignment align_chars(std::string_view ref_utf8, std::string_view hyp_utf8);
WordAlignment align_words(const std::vector<std::u32string>& ref,
                          const std::vector<std::u32string>& hyp,
                          std::size_t initial_band = 64);

/// Throws EmptyReference when `ref` is empty.
double cer(std::string_view ref_utf8, std::string_view hyp_utf8);
/// Tokens are maximal runs of non-whitespace. Throws EmptyReference when
/// `ref` has no tokens.
double wer(std::string_view ref_utf8, std::string_view hyp_utf8);

enum class ErrorClass {
  EncodingDuplicate,
  DiacriticVariation,
  CaseConfusion,
  LetterConfusion,
  PunctuationOrSpacing,
};

inline constexpr std::array<ErrorClass, 5> kAllErrorClasses = {
    ErrorClass::EncodingDuplicate, ErrorClass::DiacriticVariation,
    ErrorClass::CaseConfusion, ErrorClass::LetterConfusion,
    ErrorClass::PunctuationOrSpacing};

std::string_view to_string(ErrorClass cls);

/// Classes are tried in declaration order; the first that applies wins.
ErrorClass classify_substitution(
    char32_t ref, char32_t hyp,
    const CanonicalizationTable& table = CanonicalizationTable::builtin());
/// Same for clusters (a base plus marks that do not compose).
ErrorClass classify_substitution(
    std::u32string_view ref, std::u32string_view hyp,
    const CanonicalizationTable& table = CanonicalizationTable::builtin());

struct ConfusionPattern {
  char32_t ref = 0;
  char32_t hyp = 0;
  std::size_t count = 0;
  ErrorClass error_class = ErrorClass::PunctuationOrSpacing;
  bool operator==(const ConfusionPattern&) const = default;
};

/// Substitution counts only; insertions and deletions are not confusions.
class ConfusionMatrix {
 public:
  void add(char32_t ref, char32_t hyp, ErrorClass cls, std::size_t count = 1);
  void add_alignment(
      const Alignment& alignment,
      const CanonicalizationTable& table = CanonicalizationTable::builtin());
  void merge(const ConfusionMatrix& other);

  std::size_t count(char32_t ref, char32_t hyp) const;
  std::size_t class_total(ErrorClass cls) const;
  std::size_t total_errors() const { return total_; }
  std::size_t distinct_patterns() const { return cells_.size(); }
  /// 0 for an empty matrix.
  double class_share(ErrorClass cls) const;
  /// EncodingDuplicate plus DiacriticVariation over all substitutions.
  double diacritic_share() const;

  /// All patterns, most frequent first, ties by (ref, hyp).
  std::vector<ConfusionPattern> patterns() const;
  std::vector<ConfusionPattern> top_k(std::size_t k) const;

  /// Totals per reference base letter. Greek letters group by their
  /// unmarked lowercase base; anything else groups under itself.
  std::map<char32_t, std::size_t> by_base_letter() const;
  std::vector<ConfusionPattern> patterns_for_base(char32_t base) const;

  /// `ref_char_hex,hyp_char_hex,count,error_class`, rows as in patterns().
  std::string to_csv() const;
  nlohmann::json to_json(std::size_t top = 20) const;

 private:
  struct Cell {
    std::size_t count = 0;
    ErrorClass cls = ErrorClass::PunctuationOrSpacing;
  };
  std::map<std::pair<char32_t, char32_t>, Cell> cells_;
  std::array<std::size_t, kAllErrorClasses.size()> class_totals_{};
  std::size_t total_ = 0;
};

ConfusionMatrix build_confusion(
    std::span<const Alignment> alignments,
    const CanonicalizationTable& table = CanonicalizationTable::builtin());

struct ErrorRates {
  std::size_t ref_chars = 0;
  EditCounts char_edits;
  std::size_t ref_words = 0;
  EditCounts word_edits;

  /// NaN when the denominator is zero.
  double cer() const;
  double wer() const;
  ErrorRates& operator+=(const ErrorRates& o);
  nlohmann::json to_json() const;
};

struct TextPair {
  std::string id;
  std::string ref;  // UTF-8
  std::string hyp;  // UTF-8
};

struct DocumentResult {
  std::string id;
  ErrorRates raw;
  std::optional<ErrorRates> normalized;
};

struct EvalOptions {
  bool normalize_first = false;
  std::size_t jobs = 1;
  const CanonicalizationTable* table = nullptr;  // null means builtin
};

struct EvalReport {
  bool normalized_mode = false;
  ErrorRates raw;
  std::optional<ErrorRates> normalized;
  /// Built from the alignments of the reporting mode.
  ConfusionMatrix confusion;
  std::vector<DocumentResult> documents;

  /// Numbers of the mode that was requested.
  const ErrorRates& primary() const {
    return normalized ? *normalized : raw;
  }
  double cer() const { return primary().cer(); }
  double wer() const { return primary().wer(); }
  nlohmann::json to_json() const;
};

/// Micro-averaged over the whole corpus. Throws EmptyCorpus if no pair has
/// a nonempty reference, InvalidUtf8 on undecodable text.
EvalReport evaluate_corpus(std::span<const TextPair> pairs,
                           const EvalOptions& options = {});

/// Pairs every regular file of `ref_dir` with the same name in `hyp_dir`,
/// sorted by name. A missing hypothesis is an IoError.
std::vector<TextPair> load_pairs_from_dirs(const std::filesystem::path& ref_dir,
                                           const std::filesystem::path& hyp_dir);
/// Two tab-separated columns, reference path then hypothesis path; relative
/// paths resolve against the manifest's directory. `#` starts a comment.
std::vector<TextPair> load_pairs_from_manifest(
    const std::filesystem::path& manifest);

}  // namespace pgforge

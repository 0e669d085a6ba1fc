// corpus_vert.hpp
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
// Tokenization, dictionary annotation and the five-layer vertical corpus
// format. Every token keeps the ids of its word, line, page and document.
//
// Wire format, UTF-8 with LF line endings and no BOM:
//
//   <doc id="...">
//   <page n="..." pdf="...">
//   <line id="...">
//   <w id="...">
//   wordform TAB intuitive TAB lemma TAB intuitive_lemma TAB pos
//   </w>
//   </line>
//   </page>
//   </doc>

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "pgforge/greek_text.hpp"
#include "pgforge/layout_model.hpp"
#include "pgforge/text_pipeline.hpp"

namespace pgforge {

/// Splits on whitespace, then peels punctuation off both ends of each chunk,
/// one character (with any marks on it) per token. An elision mark right
/// after a letter stays with its word.
std::vector<std::string> tokenize(std::string_view line);

/// True when the token has no letter and no digit.
bool is_punctuation_token(std::string_view token);

struct LexiconCandidate {
  std::string lemma;
  std::string pos;
  bool operator==(const LexiconCandidate&) const = default;
};

/// Wordform -> ordered (lemma, pos) candidates. Keys are canonicalized but
/// stay case-sensitive; the first candidate wins.
class Lexicon {
 public:
  explicit Lexicon(
      CanonicalizationTable table = CanonicalizationTable::builtin());

  /// TSV `wordform <TAB> lemma <TAB> pos`; a repeated wordform adds a
  /// candidate. '#' starts a comment line. Throws LexiconError.
  static Lexicon from_tsv(
      std::istream& in,
      CanonicalizationTable table = CanonicalizationTable::builtin());
  static Lexicon from_file(
      const std::filesystem::path& path,
      CanonicalizationTable table = CanonicalizationTable::builtin());

  /// Throws std::invalid_argument for empty fields or tabs/newlines.
  void add(std::string_view wordform, std::string lemma, std::string pos);

  /// Empty when unknown.
  std::span<const LexiconCandidate> lookup(std::string_view wordform) const;

  std::size_t size() const { return entries_.size(); }
  const CanonicalizationTable& table() const { return table_; }

 private:
  CanonicalizationTable table_;
  std::unordered_map<std::string, std::vector<LexiconCandidate>> entries_;
};

inline constexpr std::string_view kUnknownPos = "UNK";

struct Token {
  std::string wordform;
  std::string intuitive_form;
  std::string lemma;
  std::string intuitive_lemma;
  std::string pos;
  std::string word_id;
  std::string line_id;
  std::string page_ref;
  std::string doc_id;

  bool operator==(const Token&) const = default;
};

struct Annotation {
  Token token;  // ids left empty
  bool known = false;
  std::vector<LexiconCandidate> candidates;
};

/// Throws std::invalid_argument for an empty wordform.
Annotation annotate(std::string_view wordform, const Lexicon& lexicon);

struct VertLine {
  std::string id;
  std::vector<Token> tokens;
  bool operator==(const VertLine&) const = default;
};

struct VertPage {
  std::string n;    // page reference carried by every token
  std::string pdf;  // source image / PDF page
  std::vector<VertLine> lines;
  bool operator==(const VertPage&) const = default;
};

struct VertDocument {
  std::string doc_id;
  std::vector<VertPage> pages;
  bool operator==(const VertDocument&) const = default;
};

/// Checks the token invariants and id scoping: page refs unique in the
/// document, line ids unique in their page, word ids unique in the document,
/// each token's ids matching its place. Throws InvalidDocument.
void validate_document(const VertDocument& doc);

/// Validates, then writes. Deterministic byte for byte.
void emit_vert(const VertDocument& doc, std::ostream& out);
std::string emit_vert(const VertDocument& doc);

/// Strict reader for one document. Throws MalformedVert.
VertDocument parse_vert(std::string_view text);
/// Any number of documents back to back.
std::vector<VertDocument> parse_vert_documents(std::string_view text);
std::vector<VertDocument> read_vert_file(const std::filesystem::path& path);

struct LayerMismatch {
  std::size_t line_no = 0;
  std::string reason;
};

struct LayerCheck {
  std::size_t token_lines = 0;
  std::vector<LayerMismatch> mismatches;
  bool ok() const { return mismatches.empty(); }
};

/// Re-derives the two intuitive layers on every token line of raw vert text.
/// Structure is not checked beyond finding token lines.
LayerCheck validate_vert_layers(std::string_view text);

struct DocStats {
  std::string doc_id;
  std::string date_label;
  std::size_t word_count = 0;
};

struct CorpusStats {
  std::vector<DocStats> documents;
  std::size_t total_words = 0;

  /// `doc_id,date_label,word_count`, one row per document, then TOTAL.
  std::string to_csv() const;
};

using DateLabels = std::map<std::string, std::string>;

/// TSV `doc_id <TAB> date_label`. Throws ManifestError.
DateLabels read_date_labels(std::istream& in);
DateLabels read_date_labels(const std::filesystem::path& path);

/// Word counts leave out punctuation-only tokens.
std::size_t word_count(const VertDocument& doc);
CorpusStats corpus_stats(std::span<const VertDocument> docs,
                         const DateLabels& dates = {});

struct PageSource {
  std::string n;
  Page page;
};

struct BuildOptions {
  CleanOptions clean;
  bool canonicalize_text = true;
  std::size_t jobs = 1;
};

struct BuildResult {
  VertDocument document;
  std::vector<ProvenanceLog> page_logs;  // parallel to the input pages
  std::size_t unknown_tokens = 0;
  /// Tokens with more than one lexicon candidate, for later disambiguation.
  nlohmann::json candidates = nlohmann::json::array();
};

/// filter_relevant -> linearize -> canonicalize -> clean -> tokenize ->
/// annotate, pages in the given order, word ids w1.. across the document.
BuildResult build_document(std::string doc_id, std::span<const PageSource> pages,
                           const Lexicon& lexicon,
                           const BuildOptions& options = {});

}  // namespace pgforge

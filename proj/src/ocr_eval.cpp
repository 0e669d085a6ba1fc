// ocr_eval.cpp
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

#include "pgforge/ocr_eval.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

#include "pgforge/errors.hpp"
#include "pgforge/parallel.hpp"
#include "pgforge/utf8.hpp"

namespace pgforge {
namespace {

constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max() / 2;

// Diagonal band of half-width w around the main diagonal: row i keeps the
// columns j with |i - j| <= w at offset j - i + w.
class BandTable {
 public:
  BandTable(std::size_t rows, std::size_t w)
      : w_(w), stride_(2 * w + 1), cells_(rows * stride_, kInf) {}

  std::uint32_t get(std::size_t i, std::size_t j) const {
    if (j + w_ < i || j > i + w_) return kInf;
    return cells_[i * stride_ + (j + w_ - i)];
  }
  void set(std::size_t i, std::size_t j, std::uint32_t v) {
    cells_[i * stride_ + (j + w_ - i)] = v;
  }

 private:
  std::size_t w_;
  std::size_t stride_;
  std::vector<std::uint32_t> cells_;
};

template <typename T>
BandTable fill_band(std::span<const T> ref, std::span<const T> hyp,
                    std::size_t w) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  BandTable d(n + 1, w);
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t lo = i > w ? i - w : 0;
    const std::size_t hi = std::min(m, i + w);
    for (std::size_t j = lo; j <= hi; ++j) {
      std::uint32_t best;
      if (i == 0) {
        best = static_cast<std::uint32_t>(j);
      } else if (j == 0) {
        best = static_cast<std::uint32_t>(i);
      } else {
        best = d.get(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
        best = std::min(best, d.get(i - 1, j) + 1);
        best = std::min(best, d.get(i, j - 1) + 1);
      }
      d.set(i, j, best);
    }
  }
  return d;
}

template <typename T>
std::vector<EditOp<T>> align_generic(std::span<const T> ref,
                                     std::span<const T> hyp,
                                     std::size_t initial_band) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t diff = n > m ? n - m : m - n;
  const std::size_t longest = std::max(n, m);
  std::size_t w = std::min(longest, std::max({initial_band, diff, std::size_t{1}}));

  // Any path leaving a band of width w costs more than w, so a distance
  // that fits inside the band is the true one.
  BandTable d = fill_band(ref, hyp, w);
  while (d.get(n, m) > w && w < longest) {
    w = std::min(longest, w * 2);
    d = fill_band(ref, hyp, w);
  }

  std::vector<EditOp<T>> ops;
  ops.reserve(std::max(n, m));
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t here = d.get(i, j);
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (d.get(i - 1, j - 1) + (same ? 0 : 1) == here) {
        ops.push_back({same ? EditKind::Match : EditKind::Substitute,
                       ref[i - 1], hyp[j - 1]});
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && d.get(i - 1, j) + 1 == here) {
      ops.push_back({EditKind::Delete, ref[i - 1], std::nullopt});
      --i;
      continue;
    }
    ops.push_back({EditKind::Insert, std::nullopt, hyp[j - 1]});
    --j;
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

template <typename T>
EditCounts count_ops(const std::vector<EditOp<T>>& ops) {
  EditCounts c;
  for (const auto& op : ops) {
    switch (op.kind) {
      case EditKind::Match: ++c.matches; break;
      case EditKind::Substitute: ++c.substitutions; break;
      case EditKind::Insert: ++c.insertions; break;
      case EditKind::Delete: ++c.deletions; break;
    }
  }
  return c;
}

const icu::Normalizer2& nfd() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFD unavailable");
  return *n;
}

std::u32string to_nfd(std::u32string_view s) {
  icu::UnicodeString us;
  for (char32_t c : s) us.append(static_cast<UChar32>(c));
  UErrorCode status = U_ZERO_ERROR;
  const icu::UnicodeString out = nfd().normalize(us, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFD failed");
  std::u32string result;
  for (int32_t k = 0; k < out.length();) {
    const UChar32 c = out.char32At(k);
    result.push_back(static_cast<char32_t>(c));
    k += U16_LENGTH(c);
  }
  return result;
}

bool is_letter_cluster(std::u32string_view s, bool (*head)(char32_t)) {
  if (s.empty() || !head(s.front())) return false;
  return std::all_of(s.begin() + 1, s.end(), is_combining_mark);
}

bool all_marks(std::u32string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_combining_mark);
}

char32_t base_of(char32_t ref) {
  if (is_greek_letter(ref)) return decompose_profile(ref).base_letter;
  return ref;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  std::erase(text, '\r');
  while (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

ErrorRates rates_for(std::u32string_view ref, std::u32string_view hyp,
                     Alignment* alignment_out) {
  ErrorRates r;
  Alignment a = align_chars(ref, hyp);
  r.ref_chars = ref.size();
  r.char_edits = a.counts();
  const auto ref_words = split_on_whitespace(ref);
  const auto hyp_words = split_on_whitespace(hyp);
  r.ref_words = ref_words.size();
  r.word_edits = align_words(ref_words, hyp_words).counts();
  if (alignment_out) *alignment_out = std::move(a);
  return r;
}

nlohmann::json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::string_view to_string(EditKind kind) {
  switch (kind) {
    case EditKind::Match: return "match";
    case EditKind::Substitute: return "substitute";
    case EditKind::Insert: return "insert";
    case EditKind::Delete: return "delete";
  }
  return "?";
}

EditCounts& EditCounts::operator+=(const EditCounts& o) {
  matches += o.matches;
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  return *this;
}

EditCounts Alignment::counts() const { return count_ops(ops); }
EditCounts WordAlignment::counts() const { return count_ops(ops); }

std::u32string Alignment::reference() const {
  std::u32string s;
  for (const auto& op : ops)
    if (op.ref) s.push_back(*op.ref);
  return s;
}

std::u32string Alignment::hypothesis() const {
  std::u32string s;
  for (const auto& op : ops)
    if (op.hyp) s.push_back(*op.hyp);
  return s;
}

Alignment align_chars(std::u32string_view ref, std::u32string_view hyp,
                      std::size_t initial_band) {
  return {align_generic<char32_t>(ref, hyp, initial_band)};
}

Alignment align_chars(std::string_view ref_utf8, std::string_view hyp_utf8) {
  return align_chars(decode_utf8(ref_utf8), decode_utf8(hyp_utf8));
}

WordAlignment align_words(const std::vector<std::u32string>& ref,
                          const std::vector<std::u32string>& hyp,
                          std::size_t initial_band) {
  return {align_generic<std::u32string>(ref, hyp, initial_band)};
}

double cer(std::string_view ref_utf8, std::string_view hyp_utf8) {
  const auto ref = decode_utf8(ref_utf8);
  if (ref.empty()) throw EmptyReference();
  return ratio(align_chars(ref, decode_utf8(hyp_utf8)).cost(), ref.size());
}

double wer(std::string_view ref_utf8, std::string_view hyp_utf8) {
  const auto ref = split_on_whitespace(decode_utf8(ref_utf8));
  if (ref.empty()) throw EmptyReference();
  const auto hyp = split_on_whitespace(decode_utf8(hyp_utf8));
  return ratio(align_words(ref, hyp).cost(), ref.size());
}

std::string_view to_string(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::EncodingDuplicate: return "EncodingDuplicate";
    case ErrorClass::DiacriticVariation: return "DiacriticVariation";
    case ErrorClass::CaseConfusion: return "CaseConfusion";
    case ErrorClass::LetterConfusion: return "LetterConfusion";
    case ErrorClass::PunctuationOrSpacing: return "PunctuationOrSpacing";
  }
  return "?";
}

ErrorClass classify_substitution(char32_t ref, char32_t hyp,
                                 const CanonicalizationTable& table) {
  const char32_t r[1] = {ref};
  const char32_t h[1] = {hyp};
  return classify_substitution(std::u32string_view(r, 1),
                               std::u32string_view(h, 1), table);
}

ErrorClass classify_substitution(std::u32string_view ref,
                                 std::u32string_view hyp,
                                 const CanonicalizationTable& table) {
  const std::u32string cr = canonicalize(ref, table);
  const std::u32string ch = canonicalize(hyp, table);
  if (cr == ch) return ErrorClass::EncodingDuplicate;

  if (is_letter_cluster(cr, is_greek_letter) &&
      is_letter_cluster(ch, is_greek_letter)) {
    const DiacriticProfile pr = decompose_profile(cr);
    const DiacriticProfile ph = decompose_profile(ch);
    if (pr.base_letter != ph.base_letter) return ErrorClass::LetterConfusion;
    if (!pr.same_marks(ph)) return ErrorClass::DiacriticVariation;
    if (pr.letter_case != ph.letter_case) return ErrorClass::CaseConfusion;
    // Same letter, marks and case yet not canonically equal: only a custom
    // table can get here, and the difference is still one of marking.
    return ErrorClass::DiacriticVariation;
  }

  if (is_letter_cluster(cr, is_letter) && is_letter_cluster(ch, is_letter)) {
    // Other scripts, or Greek against Latin: compare decomposed bases.
    const std::u32string dr = to_nfd(cr);
    const std::u32string dh = to_nfd(ch);
    if (u_tolower(static_cast<UChar32>(dr.front())) !=
        u_tolower(static_cast<UChar32>(dh.front())))
      return ErrorClass::LetterConfusion;
    if (dr.substr(1) != dh.substr(1)) return ErrorClass::DiacriticVariation;
    return ErrorClass::CaseConfusion;
  }

  // A lone combining mark read as another one.
  if (all_marks(cr) && all_marks(ch)) return ErrorClass::DiacriticVariation;

  return ErrorClass::PunctuationOrSpacing;
}

void ConfusionMatrix::add(char32_t ref, char32_t hyp, ErrorClass cls,
                          std::size_t count) {
  if (count == 0) return;
  Cell& cell = cells_[{ref, hyp}];
  cell.count += count;
  cell.cls = cls;
  class_totals_[static_cast<std::size_t>(cls)] += count;
  total_ += count;
}

void ConfusionMatrix::add_alignment(const Alignment& alignment,
                                    const CanonicalizationTable& table) {
  for (const auto& op : alignment.ops) {
    if (op.kind != EditKind::Substitute) continue;
    const auto key = std::make_pair(*op.ref, *op.hyp);
    auto it = cells_.find(key);
    const ErrorClass cls = it != cells_.end()
                               ? it->second.cls
                               : classify_substitution(*op.ref, *op.hyp, table);
    add(*op.ref, *op.hyp, cls);
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  for (const auto& [key, cell] : other.cells_)
    add(key.first, key.second, cell.cls, cell.count);
}

std::size_t ConfusionMatrix::count(char32_t ref, char32_t hyp) const {
  auto it = cells_.find({ref, hyp});
  return it == cells_.end() ? 0 : it->second.count;
}

std::size_t ConfusionMatrix::class_total(ErrorClass cls) const {
  return class_totals_[static_cast<std::size_t>(cls)];
}

double ConfusionMatrix::class_share(ErrorClass cls) const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(class_total(cls)) / static_cast<double>(total_);
}

double ConfusionMatrix::diacritic_share() const {
  if (total_ == 0) return 0.0;
  return static_cast<double>(class_total(ErrorClass::EncodingDuplicate) +
                             class_total(ErrorClass::DiacriticVariation)) /
         static_cast<double>(total_);
}

std::vector<ConfusionPattern> ConfusionMatrix::patterns() const {
  std::vector<ConfusionPattern> out;
  out.reserve(cells_.size());
  for (const auto& [key, cell] : cells_)
    out.push_back({key.first, key.second, cell.count, cell.cls});
  // cells_ is already ordered by (ref, hyp), so a stable sort keeps that as
  // the tie-break.
  std::stable_sort(out.begin(), out.end(),
                   [](const ConfusionPattern& a, const ConfusionPattern& b) {
                     return a.count > b.count;
                   });
  return out;
}

std::vector<ConfusionPattern> ConfusionMatrix::top_k(std::size_t k) const {
  auto all = patterns();
  if (all.size() > k) all.resize(k);
  return all;
}

std::map<char32_t, std::size_t> ConfusionMatrix::by_base_letter() const {
  std::map<char32_t, std::size_t> out;
  for (const auto& [key, cell] : cells_) out[base_of(key.first)] += cell.count;
  return out;
}

std::vector<ConfusionPattern> ConfusionMatrix::patterns_for_base(
    char32_t base) const {
  std::vector<ConfusionPattern> out;
  for (const auto& p : patterns())
    if (base_of(p.ref) == base) out.push_back(p);
  return out;
}

std::string ConfusionMatrix::to_csv() const {
  std::string out = "ref_char_hex,hyp_char_hex,count,error_class\n";
  for (const auto& p : patterns()) {
    out += codepoint_hex(p.ref);
    out += ',';
    out += codepoint_hex(p.hyp);
    out += ',';
    out += std::to_string(p.count);
    out += ',';
    out += to_string(p.error_class);
    out += '\n';
  }
  return out;
}

nlohmann::json ConfusionMatrix::to_json(std::size_t top) const {
  nlohmann::json j;
  j["total_errors"] = total_;
  j["distinct_patterns"] = cells_.size();
  nlohmann::json totals = nlohmann::json::object();
  for (ErrorClass cls : kAllErrorClasses)
    totals[std::string(to_string(cls))] = class_total(cls);
  j["class_totals"] = std::move(totals);
  j["diacritic_share"] = diacritic_share();
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& p : top_k(top)) {
    rows.push_back({{"ref", encode_utf8(p.ref)},
                    {"ref_hex", codepoint_hex(p.ref)},
                    {"hyp", encode_utf8(p.hyp)},
                    {"hyp_hex", codepoint_hex(p.hyp)},
                    {"count", p.count},
                    {"class", to_string(p.error_class)}});
  }
  j["top_patterns"] = std::move(rows);
  return j;
}

ConfusionMatrix build_confusion(std::span<const Alignment> alignments,
                                const CanonicalizationTable& table) {
  ConfusionMatrix m;
  for (const auto& a : alignments) m.add_alignment(a, table);
  return m;
}

double ErrorRates::cer() const {
  return ratio(char_edits.errors(), ref_chars);
}

double ErrorRates::wer() const {
  return ratio(word_edits.errors(), ref_words);
}

ErrorRates& ErrorRates::operator+=(const ErrorRates& o) {
  ref_chars += o.ref_chars;
  char_edits += o.char_edits;
  ref_words += o.ref_words;
  word_edits += o.word_edits;
  return *this;
}

nlohmann::json ErrorRates::to_json() const {
  auto edits = [](const EditCounts& c) {
    return nlohmann::json{{"substitutions", c.substitutions},
                          {"insertions", c.insertions},
                          {"deletions", c.deletions}};
  };
  return {{"ref_chars", ref_chars},   {"char_edits", edits(char_edits)},
          {"cer", number_or_null(cer())},   {"ref_words", ref_words},
          {"word_edits", edits(word_edits)}, {"wer", number_or_null(wer())}};
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["mode"] = normalized_mode ? "normalized" : "raw";
  j["cer"] = number_or_null(cer());
  j["wer"] = number_or_null(wer());
  j["n_ref_chars"] = primary().ref_chars;
  j["n_ref_words"] = primary().ref_words;
  j["raw"] = raw.to_json();
  if (normalized) j["normalized"] = normalized->to_json();
  j["confusion"] = confusion.to_json();
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& d : documents) {
    nlohmann::json dj{{"id", d.id}, {"raw", d.raw.to_json()}};
    if (d.normalized) dj["normalized"] = d.normalized->to_json();
    docs.push_back(std::move(dj));
  }
  j["documents"] = std::move(docs);
  return j;
}

EvalReport evaluate_corpus(std::span<const TextPair> pairs,
                           const EvalOptions& options) {
  const CanonicalizationTable& table =
      options.table ? *options.table : CanonicalizationTable::builtin();

  struct PerDoc {
    DocumentResult result;
    Alignment alignment;  // of the reporting mode
  };
  auto per_doc = parallel_map(pairs.size(), options.jobs, [&](std::size_t k) {
    const TextPair& pair = pairs[k];
    const std::u32string ref = decode_utf8(pair.ref);
    const std::u32string hyp = decode_utf8(pair.hyp);
    PerDoc out;
    out.result.id = pair.id;
    if (options.normalize_first) {
      out.result.raw = rates_for(ref, hyp, nullptr);
      out.result.normalized = rates_for(canonicalize(ref, table),
                                        canonicalize(hyp, table),
                                        &out.alignment);
    } else {
      out.result.raw = rates_for(ref, hyp, &out.alignment);
    }
    return out;
  });

  EvalReport report;
  report.normalized_mode = options.normalize_first;
  if (options.normalize_first) report.normalized.emplace();
  for (auto& doc : per_doc) {
    report.raw += doc.result.raw;
    if (report.normalized) *report.normalized += *doc.result.normalized;
    report.confusion.add_alignment(doc.alignment, table);
    report.documents.push_back(std::move(doc.result));
  }
  if (report.raw.ref_chars == 0) throw EmptyCorpus();
  return report;
}

std::vector<TextPair> load_pairs_from_dirs(const std::filesystem::path& ref_dir,
                                           const std::filesystem::path& hyp_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(ref_dir))
    throw IoError("not a directory: " + ref_dir.string());
  if (!fs::is_directory(hyp_dir))
    throw IoError("not a directory: " + hyp_dir.string());
  std::vector<fs::path> names;
  for (const auto& entry : fs::directory_iterator(ref_dir))
    if (entry.is_regular_file()) names.push_back(entry.path().filename());
  std::sort(names.begin(), names.end());

  std::vector<TextPair> pairs;
  for (const auto& name : names) {
    const fs::path hyp = hyp_dir / name;
    if (!fs::is_regular_file(hyp))
      throw IoError("no hypothesis for " + name.string() + " in " +
                    hyp_dir.string());
    pairs.push_back({name.string(), read_text_file(ref_dir / name),
                     read_text_file(hyp)});
  }
  return pairs;
}

std::vector<TextPair> load_pairs_from_manifest(
    const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open " + manifest.string());
  const auto base = manifest.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  std::vector<TextPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw ManifestError(line_no, "expected two tab-separated paths");
    const auto ref = resolve(line.substr(0, tab));
    const auto hyp = resolve(line.substr(tab + 1));
    pairs.push_back({ref.filename().string(), read_text_file(ref),
                     read_text_file(hyp)});
  }
  return pairs;
}

}  // namespace pgforge

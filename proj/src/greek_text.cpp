// greek_text.cpp
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

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/uniset.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <memory>
#include <stdexcept>

#include "pgforge/errors.hpp"
#include "pgforge/utf8.hpp"

namespace pgforge {

NotGreekLetter::NotGreekLetter(char32_t cp)
    : Error(ErrorCategory::Validation,
            "U+" + codepoint_hex(cp) + " is not a Greek letter"),
      cp_(cp) {}

namespace {

constexpr char32_t kFinalSigma = 0x03C2;
constexpr char32_t kSigma = 0x03C3;

// Combining marks of the polytonic inventory, after full decomposition.
constexpr char32_t kPsili = 0x0313;
constexpr char32_t kDasia = 0x0314;
constexpr char32_t kAcute = 0x0301;
constexpr char32_t kGrave = 0x0300;
constexpr char32_t kPerispomeni = 0x0342;
constexpr char32_t kYpogegrammeni = 0x0345;
constexpr char32_t kDiaeresis = 0x0308;
constexpr char32_t kMacron = 0x0304;
constexpr char32_t kBreve = 0x0306;

// NFC/NFD everywhere except the two Greek punctuation marks, whose
// canonical decompositions are Latin ';' and U+00B7.
class Normalizers {
 public:
  Normalizers() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
    if (U_FAILURE(status)) {
      throw std::runtime_error("ICU normalizer data unavailable");
    }
    unprotected_.applyPattern(icu::UnicodeString(u"[^\\u037E\\u0387]"), status);
    unprotected_.freeze();
    if (U_FAILURE(status)) throw std::runtime_error("ICU set pattern failed");
    nfc_ = std::make_unique<icu::FilteredNormalizer2>(*nfc, unprotected_);
    nfd_ = std::make_unique<icu::FilteredNormalizer2>(*nfd, unprotected_);
    raw_nfd_ = nfd;
  }

  std::u32string nfc(std::u32string_view text) const { return run(*nfc_, text); }
  std::u32string nfd(std::u32string_view text) const { return run(*nfd_, text); }
  std::u32string full_nfd(std::u32string_view text) const {
    return run(*raw_nfd_, text);
  }

 private:
  static std::u32string run(const icu::Normalizer2& norm,
                            std::u32string_view text) {
    icu::UnicodeString src = icu::UnicodeString::fromUTF32(
        reinterpret_cast<const UChar32*>(text.data()),
        static_cast<int32_t>(text.size()));
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString dst = norm.normalize(src, status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
    std::u32string out(static_cast<std::size_t>(dst.countChar32()), U'\0');
    status = U_ZERO_ERROR;
    dst.toUTF32(reinterpret_cast<UChar32*>(out.data()),
                static_cast<int32_t>(out.size()), status);
    if (U_FAILURE(status)) throw std::runtime_error("UTF-32 conversion failed");
    return out;
  }

  icu::UnicodeSet unprotected_;
  std::unique_ptr<icu::FilteredNormalizer2> nfc_;
  std::unique_ptr<icu::FilteredNormalizer2> nfd_;
  const icu::Normalizer2* raw_nfd_ = nullptr;
};

const Normalizers& normalizers() {
  static const Normalizers instance;
  return instance;
}

CanonicalizationTable make_builtin() {
  CanonicalizationTable table;
  constexpr CanonicalizationTable::Pair kPairs[] = {
      // lowercase oxia -> tonos
      {0x1F71, 0x03AC}, {0x1F73, 0x03AD}, {0x1F75, 0x03AE}, {0x1F77, 0x03AF},
      {0x1F79, 0x03CC}, {0x1F7B, 0x03CD}, {0x1F7D, 0x03CE},
      // with dialytika
      {0x1FD3, 0x0390}, {0x1FE3, 0x03B0},
      // uppercase
      {0x1FBB, 0x0386}, {0x1FC9, 0x0388}, {0x1FCB, 0x0389}, {0x1FDB, 0x038A},
      {0x1FF9, 0x038C}, {0x1FEB, 0x038E}, {0x1FFB, 0x038F},
      // spacing dialytika with oxia
      {0x1FEE, 0x0385},
  };
  for (const auto& [variant, canonical] : kPairs) table.add(variant, canonical);
  return table;
}

std::optional<char32_t> parse_hex_codepoint(std::string_view field) {
  if (field.starts_with("U+") || field.starts_with("u+") ||
      field.starts_with("0x") || field.starts_with("0X")) {
    field.remove_prefix(2);
  }
  if (field.empty() || field.size() > 6) return std::nullopt;
  char32_t value = 0;
  for (char c : field) {
    int digit;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
    else return std::nullopt;
    value = value * 16 + static_cast<char32_t>(digit);
  }
  if (value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) {
    return std::nullopt;
  }
  return value;
}

std::string_view trim_ascii(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::u32string apply_table(std::u32string_view text,
                           const CanonicalizationTable& table) {
  std::u32string out(text);
  for (char32_t& cp : out) {
    if (auto canonical = table.lookup(cp)) cp = *canonical;
  }
  return out;
}

bool is_upper_like(char32_t cp) {
  const auto c = static_cast<UChar32>(cp);
  return u_isupper(c) || u_istitle(c);
}

void bucket_mark(char32_t mark, DiacriticProfile& profile) {
  switch (mark) {
    case kPsili: profile.breathing = Breathing::Smooth; break;
    case kDasia: profile.breathing = Breathing::Rough; break;
    case kAcute: profile.accent = Accent::Acute; break;
    case kGrave: profile.accent = Accent::Grave; break;
    case kPerispomeni: profile.accent = Accent::Circumflex; break;
    case kYpogegrammeni: profile.iota_subscript = true; break;
    case kDiaeresis: profile.diaeresis = true; break;
    case kMacron: profile.length_mark = LengthMark::Macron; break;
    case kBreve: profile.length_mark = LengthMark::Breve; break;
    default: break;
  }
}

DiacriticProfile profile_from_decomposed(std::u32string_view decomposed) {
  const char32_t base = decomposed.front();
  if (!is_greek_letter(base)) throw NotGreekLetter(base);
  DiacriticProfile profile;
  profile.letter_case = is_upper_like(base) ? LetterCase::Upper : LetterCase::Lower;
  profile.base_letter = static_cast<char32_t>(u_tolower(static_cast<UChar32>(base)));
  for (char32_t mark : decomposed.substr(1)) bucket_mark(mark, profile);
  return profile;
}

}  // namespace

bool DiacriticProfile::has_marks() const {
  return breathing != Breathing::None || accent != Accent::None ||
         iota_subscript || diaeresis || length_mark != LengthMark::None;
}

bool DiacriticProfile::same_marks(const DiacriticProfile& other) const {
  return breathing == other.breathing && accent == other.accent &&
         iota_subscript == other.iota_subscript &&
         diaeresis == other.diaeresis && length_mark == other.length_mark;
}

DiacriticProfile decompose_profile(char32_t ch) {
  if (!is_greek_letter(ch)) throw NotGreekLetter(ch);
  const std::u32string decomposed =
      normalizers().full_nfd(std::u32string_view(&ch, 1));
  return profile_from_decomposed(decomposed);
}

DiacriticProfile decompose_profile(std::u32string_view cluster) {
  if (cluster.empty()) throw NotGreekLetter(0);
  if (!is_greek_letter(cluster.front())) throw NotGreekLetter(cluster.front());
  const std::u32string decomposed = normalizers().full_nfd(cluster);
  for (char32_t cp : std::u32string_view(decomposed).substr(1)) {
    if (!is_combining_mark(cp)) throw NotGreekLetter(cp);
  }
  return profile_from_decomposed(decomposed);
}

std::u32string recompose(const DiacriticProfile& profile) {
  std::u32string seq;
  seq.push_back(profile.letter_case == LetterCase::Upper
                    ? static_cast<char32_t>(
                          u_toupper(static_cast<UChar32>(profile.base_letter)))
                    : profile.base_letter);
  // Canonical order among the ccc=230 marks as found in the Unicode
  // decompositions of precomposed polytonic letters.
  if (profile.length_mark == LengthMark::Macron) seq.push_back(kMacron);
  if (profile.length_mark == LengthMark::Breve) seq.push_back(kBreve);
  if (profile.breathing == Breathing::Smooth) seq.push_back(kPsili);
  if (profile.breathing == Breathing::Rough) seq.push_back(kDasia);
  if (profile.diaeresis) seq.push_back(kDiaeresis);
  switch (profile.accent) {
    case Accent::Acute: seq.push_back(kAcute); break;
    case Accent::Grave: seq.push_back(kGrave); break;
    case Accent::Circumflex: seq.push_back(kPerispomeni); break;
    case Accent::None: break;
  }
  if (profile.iota_subscript) seq.push_back(kYpogegrammeni);
  return normalizers().nfc(seq);
}

const CanonicalizationTable& CanonicalizationTable::builtin() {
  static const CanonicalizationTable table = make_builtin();
  return table;
}

void CanonicalizationTable::add(char32_t variant, char32_t canonical) {
  if (variant == canonical) {
    throw std::invalid_argument("variant maps to itself");
  }
  const char32_t one[] = {canonical};
  if (normalizers().nfc(std::u32string_view(one, 1)) !=
      std::u32string_view(one, 1)) {
    throw std::invalid_argument("canonical U+" + codepoint_hex(canonical) +
                                " is not NFC-stable");
  }
  if (auto existing = lookup(variant)) {
    if (*existing == canonical) return;
    throw std::invalid_argument("U+" + codepoint_hex(variant) +
                                " already maps to U+" + codepoint_hex(*existing));
  }
  if (lookup(canonical)) {
    throw std::invalid_argument("canonical U+" + codepoint_hex(canonical) +
                                " is itself a variant");
  }
  for (const auto& [v, c] : pairs_) {
    if (c == variant) {
      throw std::invalid_argument("variant U+" + codepoint_hex(variant) +
                                  " is already a canonical target");
    }
  }
  const auto pos = std::lower_bound(
      pairs_.begin(), pairs_.end(), variant,
      [](const Pair& p, char32_t key) { return p.first < key; });
  pairs_.insert(pos, {variant, canonical});
}

std::optional<char32_t> CanonicalizationTable::lookup(char32_t cp) const {
  const auto pos = std::lower_bound(
      pairs_.begin(), pairs_.end(), cp,
      [](const Pair& p, char32_t key) { return p.first < key; });
  if (pos == pairs_.end() || pos->first != cp) return std::nullopt;
  return pos->second;
}

CanonicalizationTable CanonicalizationTable::from_tsv(std::istream& in) {
  CanonicalizationTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view content = line;
    if (const auto hash = content.find('#'); hash != std::string_view::npos) {
      content = content.substr(0, hash);
    }
    content = trim_ascii(content);
    if (content.empty()) continue;
    const auto tab = content.find('\t');
    if (tab == std::string_view::npos) {
      throw TableError(line_no, "expected two tab-separated fields");
    }
    const auto variant = parse_hex_codepoint(trim_ascii(content.substr(0, tab)));
    const auto canonical = parse_hex_codepoint(trim_ascii(content.substr(tab + 1)));
    if (!variant || !canonical) throw TableError(line_no, "bad hex codepoint");
    try {
      table.add(*variant, *canonical);
    } catch (const std::invalid_argument& e) {
      throw TableError(line_no, e.what());
    }
  }
  return table;
}

CanonicalizationTable CanonicalizationTable::from_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open canonicalization table " + path.string());
  return from_tsv(in);
}

std::u32string canonicalize(std::u32string_view text,
                            const CanonicalizationTable& table) {
  const Normalizers& norm = normalizers();
  std::u32string current = norm.nfc(text);
  // A custom table may map onto a base that composes with a following mark,
  // so iterate to a fixed point. The builtin table converges in one round.
  for (int round = 0; round < 8; ++round) {
    std::u32string next = norm.nfc(apply_table(current, table));
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

std::string canonicalize(std::string_view utf8_text,
                         const CanonicalizationTable& table) {
  return encode_utf8(canonicalize(decode_utf8(utf8_text), table));
}

std::u32string intuitive_form(std::u32string_view text, IntuitiveOptions options) {
  std::u32string lowered(text);
  for (char32_t& cp : lowered) {
    cp = static_cast<char32_t>(u_tolower(static_cast<UChar32>(cp)));
  }
  const std::u32string decomposed = normalizers().nfd(lowered);

  std::u32string stripped;
  stripped.reserve(decomposed.size());
  bool on_letter = false;
  for (char32_t cp : decomposed) {
    if (is_combining_mark(cp)) {
      if (on_letter) continue;
      stripped.push_back(cp);
      continue;
    }
    on_letter = is_letter(cp);
    if (options.fold_final_sigma && cp == kFinalSigma) cp = kSigma;
    stripped.push_back(cp);
  }
  return normalizers().nfc(stripped);
}

std::string intuitive_form(std::string_view utf8_text, IntuitiveOptions options) {
  return encode_utf8(intuitive_form(decode_utf8(utf8_text), options));
}

bool is_letter(char32_t cp) { return u_isalpha(static_cast<UChar32>(cp)); }

bool is_greek_letter(char32_t cp) {
  UErrorCode status = U_ZERO_ERROR;
  const auto c = static_cast<UChar32>(cp);
  return u_isalpha(c) && uscript_getScript(c, &status) == USCRIPT_GREEK &&
         U_SUCCESS(status);
}

bool is_latin_letter(char32_t cp) {
  UErrorCode status = U_ZERO_ERROR;
  const auto c = static_cast<UChar32>(cp);
  return u_isalpha(c) && uscript_getScript(c, &status) == USCRIPT_LATIN &&
         U_SUCCESS(status);
}

bool is_combining_mark(char32_t cp) {
  const auto type = u_charType(static_cast<UChar32>(cp));
  return type == U_NON_SPACING_MARK || type == U_ENCLOSING_MARK ||
         type == U_COMBINING_SPACING_MARK;
}

}  // namespace pgforge

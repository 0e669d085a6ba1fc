// text_pipeline.cpp
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

#include <algorithm>
#include <stdexcept>

#include "pgforge/greek_text.hpp"
#include "pgforge/parallel.hpp"
#include "pgforge/utf8.hpp"

namespace pgforge {
namespace {

constexpr char32_t kBuiltinHyphens[] = {U'-', 0x2010, 0x2011};

bool is_hyphen(char32_t c, const DehyphenateOptions& options) {
  return std::find(std::begin(kBuiltinHyphens), std::end(kBuiltinHyphens), c) !=
             std::end(kBuiltinHyphens) ||
         options.extra_hyphens.find(c) != std::u32string::npos;
}

std::u32string_view rtrim(std::u32string_view s) {
  while (!s.empty() && is_unicode_space(s.back())) s.remove_suffix(1);
  return s;
}

std::u32string_view ltrim(std::u32string_view s) {
  while (!s.empty() && is_unicode_space(s.front())) s.remove_prefix(1);
  return s;
}

// A hyphen counts as a line break only right after a letter (marks on the
// letter are skipped), so dashes and lone hyphens are left alone.
bool ends_in_break_hyphen(std::u32string_view t,
                          const DehyphenateOptions& options) {
  if (t.size() < 2 || !is_hyphen(t.back(), options)) return false;
  std::size_t k = t.size() - 1;
  while (k > 0 && is_combining_mark(t[k - 1])) --k;
  return k > 0 && is_letter(t[k - 1]);
}

// Letters proper: combining marks are alphabetic to ICU but belong to the
// letter before them.
bool is_base_letter(char32_t c) { return is_letter(c) && !is_combining_mark(c); }

struct ScriptCounts {
  std::size_t letters = 0;
  std::size_t latin = 0;
  std::size_t greek = 0;
};

ScriptCounts count_scripts(std::u32string_view s) {
  ScriptCounts c;
  for (char32_t ch : s) {
    if (!is_base_letter(ch)) continue;
    ++c.letters;
    if (is_latin_letter(ch)) ++c.latin;
    else if (is_greek_letter(ch)) ++c.greek;
  }
  return c;
}

std::string join_texts(const std::vector<std::u32string>& tokens) {
  std::u32string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += U' ';
    out += t;
  }
  return encode_utf8(out);
}

}  // namespace

std::vector<SourceLine> make_lines(const std::vector<std::string>& texts) {
  std::vector<SourceLine> lines;
  lines.reserve(texts.size());
  for (std::size_t k = 0; k < texts.size(); ++k)
    lines.push_back({"l" + std::to_string(k + 1), texts[k]});
  return lines;
}

std::vector<std::string> line_texts(const std::vector<SourceLine>& lines) {
  std::vector<std::string> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(l.text);
  return out;
}

void ProvenanceLog::record(std::string op, std::vector<std::string> line_ids,
                           std::string removed, std::string detail) {
  entries_.push_back(
      {std::move(op), std::move(line_ids), std::move(removed), std::move(detail)});
}

void ProvenanceLog::flag(std::string kind, std::string line_id,
                         std::string detail) {
  flags_.push_back({std::move(kind), std::move(line_id), std::move(detail)});
}

void ProvenanceLog::append(const ProvenanceLog& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
  flags_.insert(flags_.end(), other.flags_.begin(), other.flags_.end());
}

nlohmann::json ProvenanceLog::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : entries_) {
    entries.push_back({{"op", e.op},
                       {"line_ids", e.line_ids},
                       {"removed", e.removed},
                       {"detail", e.detail}});
  }
  nlohmann::json flags = nlohmann::json::array();
  for (const auto& f : flags_)
    flags.push_back({{"kind", f.kind}, {"line_id", f.line_id}, {"detail", f.detail}});
  return {{"entries", std::move(entries)}, {"review_flags", std::move(flags)}};
}

std::vector<SourceLine> dehyphenate(std::vector<SourceLine> lines,
                                    ProvenanceLog* log,
                                    const DehyphenateOptions& options) {
  const std::size_t n = lines.size();
  std::vector<std::u32string> text(n);
  for (std::size_t k = 0; k < n; ++k) text[k] = decode_utf8(lines[k].text);
  std::vector<bool> gone(n, false);
  std::vector<bool> touched(n, false);

  for (std::size_t i = 0; i < n; ++i) {
    if (gone[i]) continue;
    // A glued-on token may itself end in a hyphen, hence the loop.
    while (true) {
      const std::u32string_view t = rtrim(text[i]);
      if (!ends_in_break_hyphen(t, options)) break;
      std::size_t j = i + 1;
      while (j < n && gone[j]) ++j;
      if (j == n) {
        if (log) log->flag("hyphen_at_end", lines[i].line_id, encode_utf8(t));
        break;
      }
      const std::u32string_view rest = ltrim(text[j]);
      if (rest.empty()) {
        if (log) log->flag("hyphen_before_empty_line", lines[i].line_id, encode_utf8(t));
        break;
      }
      std::size_t cut = 0;
      while (cut < rest.size() && !is_unicode_space(rest[cut])) ++cut;
      const std::u32string head(t.substr(0, t.size() - 1));
      const std::u32string token(rest.substr(0, cut));
      const char32_t hyphen = t.back();
      std::u32string remainder(ltrim(rest.substr(cut)));

      if (log) {
        log->record("dehyphenate", {lines[i].line_id, lines[j].line_id},
                    encode_utf8(hyphen),
                    encode_utf8(head) + "|" + encode_utf8(token));
      }
      text[i] = head + token;
      text[j] = std::move(remainder);
      touched[i] = touched[j] = true;
      if (text[j].empty()) {
        gone[j] = true;
        if (log) log->record("drop_consumed_line", {lines[j].line_id}, "");
      }
    }
  }

  std::vector<SourceLine> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (gone[k]) continue;
    // Untouched lines keep their bytes exactly.
    out.push_back({std::move(lines[k].line_id),
                   touched[k] ? encode_utf8(text[k]) : std::move(lines[k].text)});
  }
  return out;
}

std::vector<SourceLine> drop_empty_lines(std::vector<SourceLine> lines,
                                         ProvenanceLog* log) {
  std::vector<SourceLine> out;
  out.reserve(lines.size());
  for (auto& line : lines) {
    const auto text = decode_utf8(line.text);
    if (ltrim(text).empty()) {
      if (log) log->record("drop_empty", {line.line_id}, line.text);
      continue;
    }
    out.push_back(std::move(line));
  }
  return out;
}

std::vector<SourceLine> filter_latin(std::vector<SourceLine> lines,
                                     ProvenanceLog* log,
                                     const LatinFilterOptions& options) {
  const double threshold = options.line_threshold;
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("Latin line threshold must lie in [0, 1]");

  std::vector<SourceLine> out;
  out.reserve(lines.size());
  for (auto& line : lines) {
    const std::u32string text = decode_utf8(line.text);
    const ScriptCounts counts = count_scripts(text);
    if (counts.letters > 0) {
      const double share =
          static_cast<double>(counts.latin) / static_cast<double>(counts.letters);
      if (share > threshold) {
        if (counts.greek == 0) {
          if (log) log->record("drop_latin_line", {line.line_id}, line.text);
          continue;
        }
        if (log) log->flag("latin_majority_line_kept", line.line_id, line.text);
      }
    }

    std::vector<std::u32string> kept;
    bool removed_any = false;
    for (auto& token : split_on_whitespace(text)) {
      const ScriptCounts tc = count_scripts(token);
      if (tc.latin > 0 && tc.latin == tc.letters) {
        removed_any = true;
        if (log) log->record("remove_latin_token", {line.line_id}, encode_utf8(token));
        continue;
      }
      if (tc.latin > 0 && log)
        log->flag("mixed_script_token", line.line_id, encode_utf8(token));
      kept.push_back(std::move(token));
    }
    if (!removed_any) {
      out.push_back(std::move(line));
      continue;
    }
    if (kept.empty()) {
      if (log) log->record("drop_emptied_line", {line.line_id}, "");
      continue;
    }
    out.push_back({std::move(line.line_id), join_texts(kept)});
  }
  return out;
}

std::vector<SourceLine> clean_lines(std::vector<SourceLine> lines,
                                    ProvenanceLog* log,
                                    const CleanOptions& options) {
  // Every pass that changes something strictly shortens the text, so this
  // terminates. Edits from every pass are kept; flags only from the last,
  // which describe the returned lines.
  ProvenanceLog edits;
  while (true) {
    ProvenanceLog pass;
    auto next = drop_empty_lines(lines, &pass);
    next = dehyphenate(std::move(next), &pass, options.dehyphenate);
    next = filter_latin(std::move(next), &pass, options.latin);
    const bool stable = next == lines;
    for (const auto& e : pass.entries())
      edits.record(e.op, e.line_ids, e.removed, e.detail);
    lines = std::move(next);
    if (stable) {
      if (log) {
        log->append(edits);
        for (const auto& f : pass.flags()) log->flag(f.kind, f.line_id, f.detail);
      }
      return lines;
    }
  }
}

std::vector<CleanedPage> clean_pages(
    std::span<const std::vector<SourceLine>> pages, const CleanOptions& options,
    std::size_t jobs) {
  return parallel_map(pages.size(), jobs, [&](std::size_t k) {
    CleanedPage page;
    page.lines = clean_lines(pages[k], &page.log, options);
    return page;
  });
}

}  // namespace pgforge

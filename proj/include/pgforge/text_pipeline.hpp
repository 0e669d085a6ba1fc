// text_pipeline.hpp
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
// Line-level cleanup of recognized text ahead of annotation. Nothing is
// edited silently: every change lands in a provenance log, and anything a
// human should look at raises a review flag.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgforge/layout_model.hpp"

namespace pgforge {

/// A line of text with the id of the layout line it came from.
using SourceLine = LinearLine;

std::vector<SourceLine> make_lines(const std::vector<std::string>& texts);
std::vector<std::string> line_texts(const std::vector<SourceLine>& lines);

struct ProvenanceEntry {
  std::string op;
  std::vector<std::string> line_ids;
  std::string removed;
  std::string detail;
  bool operator==(const ProvenanceEntry&) const = default;
};

struct ReviewFlag {
  std::string kind;
  std::string line_id;
  std::string detail;
  bool operator==(const ReviewFlag&) const = default;
};

class ProvenanceLog {
 public:
  void record(std::string op, std::vector<std::string> line_ids,
              std::string removed, std::string detail = {});
  void flag(std::string kind, std::string line_id, std::string detail = {});
  void append(const ProvenanceLog& other);

  const std::vector<ProvenanceEntry>& entries() const { return entries_; }
  const std::vector<ReviewFlag>& flags() const { return flags_; }

  nlohmann::json to_json() const;

 private:
  std::vector<ProvenanceEntry> entries_;
  std::vector<ReviewFlag> flags_;
};

struct DehyphenateOptions {
  /// Treated as hyphens on top of U+002D, U+2010 and U+2011.
  std::u32string extra_hyphens;
};

/// Joins a word broken across lines: when a line ends in a hyphen right
/// after a letter, the hyphen goes and the next line's first token is glued
/// on. A next line left empty by this is removed. A hyphen-final line with
/// nothing to join stays as it is and is flagged.
std::vector<SourceLine> dehyphenate(std::vector<SourceLine> lines,
                                    ProvenanceLog* log = nullptr,
                                    const DehyphenateOptions& options = {});

/// Removes empty and whitespace-only lines.
std::vector<SourceLine> drop_empty_lines(std::vector<SourceLine> lines,
                                         ProvenanceLog* log = nullptr);

struct LatinFilterOptions {
  double line_threshold = 0.5;  // in [0, 1]
};

/// Drops lines whose Latin share of letters exceeds the threshold, then
/// removes all-Latin tokens from the rest. Greek letters are never removed:
/// a Latin-majority line that still holds Greek is kept, token-filtered and
/// flagged. Mixed-script tokens stay and are flagged. Throws
/// std::invalid_argument for a threshold outside [0, 1].
std::vector<SourceLine> filter_latin(std::vector<SourceLine> lines,
                                     ProvenanceLog* log = nullptr,
                                     const LatinFilterOptions& options = {});

struct CleanOptions {
  DehyphenateOptions dehyphenate;
  LatinFilterOptions latin;
};

/// drop_empty_lines, then dehyphenate, then filter_latin, repeated until
/// nothing changes (removing a Latin token can expose a trailing hyphen), so
/// the result is itself a fixed point.
std::vector<SourceLine> clean_lines(std::vector<SourceLine> lines,
                                    ProvenanceLog* log = nullptr,
                                    const CleanOptions& options = {});

struct CleanedPage {
  std::vector<SourceLine> lines;
  ProvenanceLog log;
};

/// clean_lines on each page, up to `jobs` pages at a time.
std::vector<CleanedPage> clean_pages(
    std::span<const std::vector<SourceLine>> pages,
    const CleanOptions& options = {}, std::size_t jobs = 1);

}  // namespace pgforge

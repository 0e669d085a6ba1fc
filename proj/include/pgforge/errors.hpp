// errors.hpp
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pgforge {

/// Broad failure families. The command-line tool maps each one to an exit
/// code, so every concrete error must pick exactly one.
enum class ErrorCategory {
  Parse,       // input could not be read as the expected format
  Validation,  // input parsed but violates a contract
  Io,          // filesystem trouble
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

class InvalidUtf8 : public Error {
 public:
  explicit InvalidUtf8(std::size_t byte_offset)
      : Error(ErrorCategory::Parse,
              "invalid UTF-8 at byte " + std::to_string(byte_offset)),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// greek_text

class NotGreekLetter : public Error {
 public:
  explicit NotGreekLetter(char32_t cp);
  char32_t codepoint() const noexcept { return cp_; }

 private:
  char32_t cp_;
};

class TableError : public Error {
 public:
  TableError(std::size_t line_no, const std::string& reason)
      : Error(ErrorCategory::Parse, "canonicalization table line " +
                                        std::to_string(line_no) + ": " +
                                        reason) {}
};

// layout_model

class MalformedXml : public Error {
 public:
  explicit MalformedXml(const std::string& reason)
      : Error(ErrorCategory::Parse, "malformed page XML: " + reason) {}
};

class MalformedPageJson : public Error {
 public:
  explicit MalformedPageJson(const std::string& reason)
      : Error(ErrorCategory::Parse, "malformed page JSON: " + reason) {}
};

class UnknownRegionClass : public Error {
 public:
  explicit UnknownRegionClass(const std::string& label)
      : Error(ErrorCategory::Parse, "unknown region class '" + label + "'"),
        label_(label) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

class MissingCoords : public Error {
 public:
  explicit MissingCoords(const std::string& element_id)
      : Error(ErrorCategory::Parse,
              "missing Coords on element '" + element_id + "'") {}
};

class InvalidPolygon : public Error {
 public:
  explicit InvalidPolygon(const std::string& reason)
      : Error(ErrorCategory::Validation, "invalid polygon: " + reason) {}
};

class DegeneratePolygon : public Error {
 public:
  DegeneratePolygon()
      : Error(ErrorCategory::Validation, "degenerate polygon (zero area)") {}
};

// ocr_eval

class EmptyReference : public Error {
 public:
  EmptyReference()
      : Error(ErrorCategory::Validation, "reference text is empty") {}
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus()
      : Error(ErrorCategory::Validation,
              "corpus has no pair with a nonempty reference") {}
};

class ManifestError : public Error {
 public:
  ManifestError(std::size_t line_no, const std::string& reason)
      : Error(ErrorCategory::Parse, "manifest line " + std::to_string(line_no) +
                                        ": " + reason) {}
};

// layout_eval

class MissingScores : public Error {
 public:
  MissingScores()
      : Error(ErrorCategory::Validation,
              "average precision requires a score on every prediction") {}
};

// corpus_vert

class MalformedVert : public Error {
 public:
  MalformedVert(std::size_t line_no, const std::string& reason)
      : Error(ErrorCategory::Parse, "vert line " + std::to_string(line_no) +
                                        ": " + reason),
        line_no_(line_no),
        reason_(reason) {}
  std::size_t line_no() const noexcept { return line_no_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_no_;
  std::string reason_;
};

class InvalidDocument : public Error {
 public:
  explicit InvalidDocument(const std::string& reason)
      : Error(ErrorCategory::Validation, "invalid vert document: " + reason) {}
};

class LexiconError : public Error {
 public:
  LexiconError(std::size_t line_no, const std::string& reason)
      : Error(ErrorCategory::Parse, "lexicon line " + std::to_string(line_no) +
                                        ": " + reason) {}
};

}  // namespace pgforge

// corpus_vert.cpp
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

#include "pgforge/corpus_vert.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "pgforge/errors.hpp"
#include "pgforge/parallel.hpp"
#include "pgforge/utf8.hpp"

namespace pgforge {
namespace {

bool is_digit(char32_t c) { return u_isdigit(static_cast<UChar32>(c)); }

bool is_elision_mark(char32_t c) {
  switch (c) {
    case U'\'':
    case 0x2019:  // right single quotation mark
    case 0x02BC:  // modifier letter apostrophe
    case 0x1FBD:  // koronis
    case 0x1FBF:  // psili
      return true;
    default:
      return false;
  }
}

// A base character with the combining marks that follow it. A chunk that
// opens with marks gets a cluster without a base.
struct Cluster {
  std::size_t begin = 0;
  std::size_t end = 0;
  char32_t base = 0;  // 0 when the cluster is marks only
};

std::vector<Cluster> clusters_of(std::u32string_view s) {
  std::vector<Cluster> out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (is_combining_mark(s[k]) && !out.empty()) {
      out.back().end = k + 1;
      continue;
    }
    out.push_back({k, k + 1, is_combining_mark(s[k]) ? char32_t{0} : s[k]});
  }
  return out;
}

bool is_punct_cluster(const Cluster& c) {
  return c.base != 0 && !is_letter(c.base) && !is_digit(c.base);
}

bool has_control_breaks(std::string_view s) {
  return s.find_first_of("\t\n\r") != std::string_view::npos;
}

std::string escape_attr(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\t': out += "&#9;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool valid_utf8(std::string_view s) {
  try {
    decode_utf8(s);
    return true;
  } catch (const InvalidUtf8&) {
    return false;
  }
}

std::string read_whole(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

// Structural tag reader. Attributes must appear exactly as listed.
class TagReader {
 public:
  TagReader(std::size_t line_no, std::string_view line)
      : line_no_(line_no), line_(line) {}

  std::vector<std::string> open(std::string_view name,
                                std::initializer_list<std::string_view> attrs) {
    std::size_t pos = 0;
    expect(pos, "<");
    expect(pos, name);
    std::vector<std::string> values;
    for (auto attr : attrs) {
      expect(pos, " ");
      expect(pos, attr);
      expect(pos, "=\"");
      const auto close = line_.find('"', pos);
      if (close == std::string_view::npos)
        throw MalformedVert(line_no_, "unterminated attribute '" + std::string(attr) + "'");
      values.push_back(unescape(line_.substr(pos, close - pos)));
      pos = close + 1;
    }
    expect(pos, ">");
    if (pos != line_.size())
      throw MalformedVert(line_no_, "trailing text after <" + std::string(name) + ">");
    return values;
  }

 private:
  void expect(std::size_t& pos, std::string_view lit) {
    if (line_.substr(pos, lit.size()) != lit)
      throw MalformedVert(line_no_, "expected '" + std::string(lit) + "'");
    pos += lit.size();
  }

  std::string unescape(std::string_view v) const {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (v[k] == '<' || v[k] == '>')
        throw MalformedVert(line_no_, "unescaped '" + std::string(1, v[k]) + "' in attribute");
      if (v[k] != '&') {
        out += v[k];
        continue;
      }
      const auto semi = v.find(';', k);
      if (semi == std::string_view::npos)
        throw MalformedVert(line_no_, "unterminated entity in attribute");
      const std::string_view ent = v.substr(k + 1, semi - k - 1);
      if (ent == "amp") out += '&';
      else if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (ent.size() > 1 && ent[0] == '#') out += numeric_entity(ent.substr(1));
      else throw MalformedVert(line_no_, "unknown entity '&" + std::string(ent) + ";'");
      k = semi;
    }
    return out;
  }

  std::string numeric_entity(std::string_view digits) const {
    int base = 10;
    if (!digits.empty() && (digits[0] == 'x' || digits[0] == 'X')) {
      base = 16;
      digits.remove_prefix(1);
    }
    if (digits.empty() || digits.size() > 8)
      throw MalformedVert(line_no_, "bad character reference");
    std::size_t used = 0;
    unsigned long cp = 0;
    try {
      cp = std::stoul(std::string(digits), &used, base);
    } catch (const std::exception&) {
      throw MalformedVert(line_no_, "bad character reference");
    }
    if (used != digits.size() || cp == 0 || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF))
      throw MalformedVert(line_no_, "bad character reference");
    return encode_utf8(static_cast<char32_t>(cp));
  }

  std::size_t line_no_;
  std::string_view line_;
};

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  for (const auto& chunk : split_on_whitespace(decode_utf8(line))) {
    const std::u32string_view s(chunk);
    const auto cl = clusters_of(s);
    auto piece = [&](std::size_t from, std::size_t to) {
      return encode_utf8(s.substr(cl[from].begin, cl[to - 1].end - cl[from].begin));
    };

    std::size_t lo = 0;
    while (lo < cl.size() && is_punct_cluster(cl[lo])) {
      tokens.push_back(piece(lo, lo + 1));
      ++lo;
    }
    std::size_t hi = cl.size();
    while (hi > lo && is_punct_cluster(cl[hi - 1])) {
      if (is_elision_mark(cl[hi - 1].base) && hi - 1 > lo &&
          is_letter(cl[hi - 2].base))
        break;
      --hi;
    }
    if (hi > lo) tokens.push_back(piece(lo, hi));
    for (std::size_t k = hi; k < cl.size(); ++k) tokens.push_back(piece(k, k + 1));
  }
  return tokens;
}

bool is_punctuation_token(std::string_view token) {
  for (char32_t c : decode_utf8(token)) {
    if (is_combining_mark(c)) continue;
    if (is_letter(c) || is_digit(c)) return false;
  }
  return true;
}

Lexicon::Lexicon(CanonicalizationTable table) : table_(std::move(table)) {}

void Lexicon::add(std::string_view wordform, std::string lemma, std::string pos) {
  if (wordform.empty() || lemma.empty() || pos.empty())
    throw std::invalid_argument("lexicon fields must be nonempty");
  if (has_control_breaks(wordform) || has_control_breaks(lemma) ||
      has_control_breaks(pos))
    throw std::invalid_argument("lexicon fields must not contain tabs or newlines");
  entries_[canonicalize(wordform, table_)].push_back({std::move(lemma), std::move(pos)});
}

Lexicon Lexicon::from_tsv(std::istream& in, CanonicalizationTable table) {
  Lexicon lexicon(std::move(table));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!valid_utf8(line)) throw LexiconError(line_no, "invalid UTF-8");
    const auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw LexiconError(line_no, "expected 3 tab-separated fields, got " +
                                      std::to_string(fields.size()));
    for (auto f : fields)
      if (f.empty()) throw LexiconError(line_no, "empty field");
    for (char32_t c : decode_utf8(fields[0]))
      if (is_unicode_space(c)) throw LexiconError(line_no, "wordform contains whitespace");
    lexicon.add(fields[0], std::string(fields[1]), std::string(fields[2]));
  }
  if (in.bad()) throw IoError("error reading lexicon");
  return lexicon;
}

Lexicon Lexicon::from_file(const std::filesystem::path& path,
                           CanonicalizationTable table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  return from_tsv(in, std::move(table));
}

std::span<const LexiconCandidate> Lexicon::lookup(std::string_view wordform) const {
  const auto it = entries_.find(canonicalize(wordform, table_));
  if (it == entries_.end()) return {};
  return it->second;
}

Annotation annotate(std::string_view wordform, const Lexicon& lexicon) {
  if (wordform.empty()) throw std::invalid_argument("cannot annotate an empty wordform");
  Annotation a;
  const auto candidates = lexicon.lookup(wordform);
  a.candidates.assign(candidates.begin(), candidates.end());
  a.known = !candidates.empty();
  a.token.wordform = std::string(wordform);
  a.token.lemma = a.known ? candidates.front().lemma : std::string(wordform);
  a.token.pos = a.known ? candidates.front().pos : std::string(kUnknownPos);
  a.token.intuitive_form = intuitive_form(a.token.wordform);
  a.token.intuitive_lemma = intuitive_form(a.token.lemma);
  return a;
}

void validate_document(const VertDocument& doc) {
  auto fail = [](const std::string& why) { throw InvalidDocument(why); };
  if (doc.doc_id.empty()) fail("empty document id");
  std::set<std::string> page_refs;
  std::set<std::string> word_ids;
  for (const auto& page : doc.pages) {
    if (page.n.empty()) fail("empty page reference");
    if (!page_refs.insert(page.n).second) fail("duplicate page '" + page.n + "'");
    std::set<std::string> line_ids;
    for (const auto& line : page.lines) {
      if (line.id.empty()) fail("empty line id on page '" + page.n + "'");
      if (!line_ids.insert(line.id).second)
        fail("duplicate line '" + line.id + "' on page '" + page.n + "'");
      for (const auto& t : line.tokens) {
        const std::string where = "token '" + t.word_id + "'";
        if (t.word_id.empty()) fail("empty word id in line '" + line.id + "'");
        if (!word_ids.insert(t.word_id).second) fail("duplicate word id '" + t.word_id + "'");
        if (t.doc_id != doc.doc_id || t.page_ref != page.n || t.line_id != line.id)
          fail(where + " carries ids that do not match its position");
        for (const auto* f : {&t.wordform, &t.intuitive_form, &t.lemma,
                              &t.intuitive_lemma, &t.pos}) {
          if (f->empty()) fail(where + " has an empty layer");
          if (has_control_breaks(*f)) fail(where + " has a tab or newline in a layer");
        }
        if (t.intuitive_form != intuitive_form(t.wordform))
          fail(where + ": intuitive form does not match wordform");
        if (t.intuitive_lemma != intuitive_form(t.lemma))
          fail(where + ": intuitive lemma does not match lemma");
      }
    }
  }
}

void emit_vert(const VertDocument& doc, std::ostream& out) {
  out << emit_vert(doc);
}

std::string emit_vert(const VertDocument& doc) {
  validate_document(doc);
  std::string out;
  out += "<doc id=\"" + escape_attr(doc.doc_id) + "\">\n";
  for (const auto& page : doc.pages) {
    out += "<page n=\"" + escape_attr(page.n) + "\" pdf=\"" + escape_attr(page.pdf) + "\">\n";
    for (const auto& line : page.lines) {
      out += "<line id=\"" + escape_attr(line.id) + "\">\n";
      for (const auto& t : line.tokens) {
        out += "<w id=\"" + escape_attr(t.word_id) + "\">\n";
        out += t.wordform + '\t' + t.intuitive_form + '\t' + t.lemma + '\t' +
               t.intuitive_lemma + '\t' + t.pos + '\n';
        out += "</w>\n";
      }
      out += "</line>\n";
    }
    out += "</page>\n";
  }
  out += "</doc>\n";
  return out;
}

std::vector<VertDocument> parse_vert_documents(std::string_view text) {
  std::vector<VertDocument> docs;
  if (text.empty()) return docs;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") throw MalformedVert(1, "byte order mark");

  enum class State { Top, Doc, Page, Line, WordOpen, WordClose };
  State state = State::Top;
  VertDocument* doc = nullptr;
  VertPage* page = nullptr;
  VertLine* line = nullptr;
  std::string word_id;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) throw MalformedVert(line_no, "missing final newline");
    const std::string_view l = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (l.find('\r') != std::string_view::npos)
      throw MalformedVert(line_no, "carriage return (LF line endings required)");
    if (!valid_utf8(l)) throw MalformedVert(line_no, "invalid UTF-8");
    TagReader tag(line_no, l);

    switch (state) {
      case State::Top: {
        auto v = tag.open("doc", {"id"});
        docs.push_back({std::move(v[0]), {}});
        doc = &docs.back();
        state = State::Doc;
        break;
      }
      case State::Doc:
        if (l == "</doc>") {
          state = State::Top;
        } else {
          auto v = tag.open("page", {"n", "pdf"});
          doc->pages.push_back({std::move(v[0]), std::move(v[1]), {}});
          page = &doc->pages.back();
          state = State::Page;
        }
        break;
      case State::Page:
        if (l == "</page>") {
          state = State::Doc;
        } else {
          auto v = tag.open("line", {"id"});
          page->lines.push_back({std::move(v[0]), {}});
          line = &page->lines.back();
          state = State::Line;
        }
        break;
      case State::Line:
        if (l == "</line>") {
          state = State::Page;
        } else {
          word_id = std::move(tag.open("w", {"id"})[0]);
          state = State::WordOpen;
        }
        break;
      case State::WordOpen: {
        const auto f = split_tabs(l);
        if (f.size() != 5)
          throw MalformedVert(line_no, "expected 5 tab-separated fields, got " +
                                           std::to_string(f.size()));
        for (auto field : f)
          if (field.empty()) throw MalformedVert(line_no, "empty field");
        line->tokens.push_back({std::string(f[0]), std::string(f[1]),
                                std::string(f[2]), std::string(f[3]),
                                std::string(f[4]), std::move(word_id), line->id,
                                page->n, doc->doc_id});
        state = State::WordClose;
        break;
      }
      case State::WordClose:
        if (l != "</w>") throw MalformedVert(line_no, "expected '</w>'");
        state = State::Line;
        break;
    }
  }
  if (state != State::Top) throw MalformedVert(line_no, "unexpected end of input");
  return docs;
}

VertDocument parse_vert(std::string_view text) {
  auto docs = parse_vert_documents(text);
  if (docs.size() != 1)
    throw MalformedVert(1, "expected exactly one document, found " +
                               std::to_string(docs.size()));
  return std::move(docs.front());
}

std::vector<VertDocument> read_vert_file(const std::filesystem::path& path) {
  return parse_vert_documents(read_whole(path));
}

LayerCheck validate_vert_layers(std::string_view text) {
  LayerCheck check;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view l = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (l.find('\t') == std::string_view::npos) continue;
    ++check.token_lines;
    const auto f = split_tabs(l);
    if (f.size() != 5) {
      check.mismatches.push_back({line_no, "field count " + std::to_string(f.size())});
      continue;
    }
    try {
      if (intuitive_form(f[0]) != f[1])
        check.mismatches.push_back({line_no, "field 2 is not the intuitive form of field 1"});
      if (intuitive_form(f[2]) != f[3])
        check.mismatches.push_back({line_no, "field 4 is not the intuitive form of field 3"});
    } catch (const InvalidUtf8&) {
      check.mismatches.push_back({line_no, "invalid UTF-8"});
    }
  }
  return check;
}

std::string CorpusStats::to_csv() const {
  std::string out = "doc_id,date_label,word_count\n";
  for (const auto& d : documents)
    out += csv_field(d.doc_id) + ',' + csv_field(d.date_label) + ',' +
           std::to_string(d.word_count) + '\n';
  out += "TOTAL,," + std::to_string(total_words) + '\n';
  return out;
}

DateLabels read_date_labels(std::istream& in) {
  DateLabels labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_tabs(line);
    if (f.size() != 2)
      throw ManifestError(line_no, "expected doc_id <TAB> date_label");
    if (f[0].empty()) throw ManifestError(line_no, "empty doc_id");
    if (!labels.emplace(std::string(f[0]), std::string(f[1])).second)
      throw ManifestError(line_no, "duplicate doc_id '" + std::string(f[0]) + "'");
  }
  if (in.bad()) throw IoError("error reading date labels");
  return labels;
}

DateLabels read_date_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_date_labels(in);
}

std::size_t word_count(const VertDocument& doc) {
  std::size_t n = 0;
  for (const auto& page : doc.pages)
    for (const auto& line : page.lines)
      for (const auto& t : line.tokens)
        if (!is_punctuation_token(t.wordform)) ++n;
  return n;
}

CorpusStats corpus_stats(std::span<const VertDocument> docs, const DateLabels& dates) {
  CorpusStats stats;
  for (const auto& doc : docs) {
    DocStats d{doc.doc_id, {}, word_count(doc)};
    if (auto it = dates.find(doc.doc_id); it != dates.end()) d.date_label = it->second;
    stats.total_words += d.word_count;
    stats.documents.push_back(std::move(d));
  }
  return stats;
}

BuildResult build_document(std::string doc_id, std::span<const PageSource> pages,
                           const Lexicon& lexicon, const BuildOptions& options) {
  struct PageWork {
    VertPage page;
    ProvenanceLog log;
    std::vector<std::vector<Annotation>> annotations;  // per line
  };

  auto work = parallel_map(pages.size(), options.jobs, [&](std::size_t k) {
    PageWork w;
    const Page& src = pages[k].page;
    w.page.n = pages[k].n;
    w.page.pdf = src.image_ref;
    auto lines = linearize(filter_relevant(src));
    if (options.canonicalize_text)
      for (auto& l : lines) l.text = canonicalize(l.text, lexicon.table());
    lines = clean_lines(std::move(lines), &w.log, options.clean);
    for (auto& l : lines) {
      std::vector<Annotation> anns;
      for (const auto& form : tokenize(l.text)) anns.push_back(annotate(form, lexicon));
      w.page.lines.push_back({std::move(l.line_id), {}});
      w.annotations.push_back(std::move(anns));
    }
    return w;
  });

  // Ids are handed out sequentially so the output is independent of jobs.
  BuildResult result;
  result.document.doc_id = std::move(doc_id);
  std::size_t next_word = 1;
  for (auto& w : work) {
    for (std::size_t li = 0; li < w.page.lines.size(); ++li) {
      auto& line = w.page.lines[li];
      for (auto& a : w.annotations[li]) {
        Token t = std::move(a.token);
        t.word_id = "w" + std::to_string(next_word++);
        t.line_id = line.id;
        t.page_ref = w.page.n;
        t.doc_id = result.document.doc_id;
        if (!a.known) ++result.unknown_tokens;
        if (a.candidates.size() > 1) {
          nlohmann::json cands = nlohmann::json::array();
          for (const auto& c : a.candidates)
            cands.push_back({{"lemma", c.lemma}, {"pos", c.pos}});
          result.candidates.push_back({{"word_id", t.word_id},
                                       {"wordform", t.wordform},
                                       {"page", t.page_ref},
                                       {"line_id", t.line_id},
                                       {"candidates", std::move(cands)}});
        }
        line.tokens.push_back(std::move(t));
      }
    }
    result.document.pages.push_back(std::move(w.page));
    result.page_logs.push_back(std::move(w.log));
  }
  validate_document(result.document);
  return result;
}

}  // namespace pgforge

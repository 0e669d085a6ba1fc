// cli.cpp
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

#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "pgforge/corpus_vert.hpp"
#include "pgforge/errors.hpp"
#include "pgforge/greek_text.hpp"
#include "pgforge/layout_eval.hpp"
#include "pgforge/layout_model.hpp"
#include "pgforge/ocr_eval.hpp"
#include "pgforge/text_pipeline.hpp"

namespace pgforge::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kTableEnv = "PG_FORGE_TABLE";

// "-" as an output path means the output stream.
class Outputs {
 public:
  explicit Outputs(std::ostream& out) : out_(out) {}

  void write(const std::string& path, const std::string& content) const {
    if (path == "-") {
      out_ << content;
      return;
    }
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path);
    f << content;
    f.close();
    if (!f) throw IoError("error writing " + path);
  }

 private:
  std::ostream& out_;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

bool is_page_file(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".xml" || ext == ".json";
}

// Regular files of a directory, sorted by name so runs are reproducible.
std::vector<fs::path> list_files(const fs::path& dir,
                                 const std::function<bool(const fs::path&)>& keep) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && keep(entry.path())) files.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

CanonicalizationTable load_table(const std::string& flag) {
  if (!flag.empty()) return CanonicalizationTable::from_file(flag);
  if (const char* env = std::getenv(kTableEnv); env != nullptr && *env != '\0')
    return CanonicalizationTable::from_file(env);
  return CanonicalizationTable::builtin();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string join_lines(const std::vector<SourceLine>& lines) {
  std::string out;
  for (const auto& l : lines) out += l.text + "\n";
  return out;
}

struct Globals {
  std::size_t jobs = 1;

  std::size_t effective_jobs() const {
    if (jobs != 0) return jobs;
    return std::max(1u, std::thread::hardware_concurrency());
  }
};

// normalize

struct NormalizeArgs {
  std::string input;
  std::string output;
  std::string table;
};

void run_normalize(const NormalizeArgs& a, const Globals&, const Outputs& outputs) {
  const CanonicalizationTable table = load_table(a.table);
  std::error_code ec;
  if (!fs::is_directory(a.input, ec)) {
    outputs.write(a.output, canonicalize(read_text(a.input), table));
    return;
  }
  if (a.output == "-")
    throw CLI::ValidationError("output", "a directory input needs an output directory");
  for (const auto& file : list_files(a.input, [](const fs::path&) { return true; }))
    outputs.write((fs::path(a.output) / file.filename()).string(),
                  canonicalize(read_text(file), table));
}

// clean

struct CleanArgs {
  std::string input;
  std::string output;
  std::string provenance;
  double latin_threshold = 0.5;
};

std::vector<SourceLine> lines_of(const fs::path& file) {
  if (is_page_file(file)) return linearize(filter_relevant(parse_page_file(file).page));
  return make_lines(split_lines(read_text(file)));
}

void run_clean(const CleanArgs& a, const Globals& g, const Outputs& outputs) {
  CleanOptions options;
  options.latin.line_threshold = a.latin_threshold;

  std::error_code ec;
  const bool dir_mode = fs::is_directory(a.input, ec);
  if (dir_mode && a.output == "-")
    throw CLI::ValidationError("output", "a directory input needs an output directory");
  const std::vector<fs::path> files =
      dir_mode ? list_files(a.input, [](const fs::path&) { return true; })
               : std::vector<fs::path>{a.input};

  std::vector<std::vector<SourceLine>> inputs;
  for (const auto& f : files) inputs.push_back(lines_of(f));
  const auto cleaned = clean_pages(inputs, options, g.effective_jobs());

  nlohmann::json prov = {{"files", nlohmann::json::array()}};
  for (std::size_t k = 0; k < files.size(); ++k) {
    std::string target = a.output;
    if (dir_mode) {
      fs::path name = files[k].filename();
      if (is_page_file(name)) name.replace_extension(".txt");
      target = (fs::path(a.output) / name).string();
    }
    outputs.write(target, join_lines(cleaned[k].lines));
    nlohmann::json entry = cleaned[k].log.to_json();
    entry["file"] = files[k].filename().string();
    prov["files"].push_back(std::move(entry));
  }
  std::string prov_path = a.provenance;
  if (prov_path.empty())
    prov_path = a.output == "-" ? std::string() : a.output + ".provenance.json";
  if (!prov_path.empty()) outputs.write(prov_path, dump(prov));
}

// eval-text

struct EvalTextArgs {
  std::string ref_dir;
  std::string hyp_dir;
  std::string manifest;
  bool normalize = false;
  std::string table;
  std::string report;
  std::string confusion;
};

void run_eval_text(const EvalTextArgs& a, const Globals& g, const Outputs& outputs) {
  std::vector<TextPair> pairs;
  if (!a.manifest.empty()) {
    if (!a.ref_dir.empty() || !a.hyp_dir.empty())
      throw CLI::ValidationError("--manifest", "cannot be combined with --ref/--hyp");
    pairs = load_pairs_from_manifest(a.manifest);
  } else {
    if (a.ref_dir.empty() || a.hyp_dir.empty())
      throw CLI::RequiredError("--ref and --hyp (or --manifest)");
    pairs = load_pairs_from_dirs(a.ref_dir, a.hyp_dir);
  }
  const CanonicalizationTable table = load_table(a.table);
  EvalOptions options;
  options.normalize_first = a.normalize;
  options.jobs = g.effective_jobs();
  options.table = &table;
  const EvalReport report = evaluate_corpus(pairs, options);

  outputs.write(a.report, dump(report.to_json()));
  std::string csv_path = a.confusion;
  if (csv_path.empty() && a.report != "-")
    csv_path = fs::path(a.report).replace_extension(".confusion.csv").string();
  if (!csv_path.empty()) outputs.write(csv_path, report.confusion.to_csv());
}

// eval-layout

struct EvalLayoutArgs {
  std::string gt_dir;
  std::string pred_dir;
  double iou = 0.5;
  bool no_map = false;
  std::string report;
  std::string csv;
};

PagePrediction load_prediction(const fs::path& file) {
  if (file.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text(file));
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedPageJson(file.string() + ": " + e.what());
    }
    return prediction_from_json(j);
  }
  return prediction_from_page(parse_page_file(file).page);
}

fs::path prediction_for(const fs::path& pred_dir, const fs::path& gt_file) {
  for (const char* ext : {".json", ".xml"}) {
    fs::path candidate = pred_dir / gt_file.stem();
    candidate += ext;
    std::error_code ec;
    if (fs::is_regular_file(candidate, ec)) return candidate;
  }
  throw IoError("no prediction for " + gt_file.filename().string() + " in " +
                pred_dir.string());
}

void run_eval_layout(const EvalLayoutArgs& a, const Globals& g,
                     const Outputs& outputs, std::ostream& err) {
  const auto gt_files = list_files(a.gt_dir, is_page_file);
  std::vector<LayoutPage> pages;
  for (const auto& f : gt_files) {
    pages.push_back({f.stem().string(), parse_page_file(f).page,
                     load_prediction(prediction_for(a.pred_dir, f))});
  }
  LayoutEvalOptions options;
  options.iou_threshold = a.iou;
  options.compute_ap = !a.no_map;
  options.jobs = g.effective_jobs();
  const DetectionReport report = evaluate_layout(pages, options);
  for (const auto& w : report.warnings) err << "pgforge: warning: " << w << "\n";

  outputs.write(a.report, dump(report.to_json()));
  if (!a.csv.empty()) outputs.write(a.csv, report.to_csv());
}

// build-vert

struct BuildVertArgs {
  std::string pages_dir;
  std::string lexicon;
  std::string doc_id;
  std::string out;
  std::string candidates;
  std::string provenance;
  std::string table;
  double latin_threshold = 0.5;
};

void run_build_vert(const BuildVertArgs& a, const Globals& g,
                    const Outputs& outputs, std::ostream& err) {
  const Lexicon lexicon = Lexicon::from_file(a.lexicon, load_table(a.table));
  const auto files = list_files(a.pages_dir, is_page_file);
  std::vector<PageSource> pages;
  for (std::size_t k = 0; k < files.size(); ++k)
    pages.push_back({std::to_string(k + 1), parse_page_file(files[k]).page});

  BuildOptions options;
  options.clean.latin.line_threshold = a.latin_threshold;
  options.jobs = g.effective_jobs();
  const BuildResult result = build_document(a.doc_id, pages, lexicon, options);

  outputs.write(a.out, emit_vert(result.document));
  if (!a.candidates.empty()) outputs.write(a.candidates, dump(result.candidates));
  if (!a.provenance.empty()) {
    nlohmann::json prov = {{"pages", nlohmann::json::array()}};
    for (std::size_t k = 0; k < files.size(); ++k) {
      nlohmann::json entry = result.page_logs[k].to_json();
      entry["page"] = pages[k].n;
      entry["file"] = files[k].filename().string();
      prov["pages"].push_back(std::move(entry));
    }
    outputs.write(a.provenance, dump(prov));
  }
  err << "pgforge: " << word_count(result.document) << " words, "
      << result.unknown_tokens << " tokens not in the lexicon\n";
}

// stats

struct StatsArgs {
  std::vector<std::string> files;
  std::string csv = "-";
  std::string dates;
};

void run_stats(const StatsArgs& a, const Globals&, const Outputs& outputs) {
  std::vector<VertDocument> docs;
  for (const auto& f : a.files) {
    auto found = read_vert_file(f);
    for (auto& d : found) docs.push_back(std::move(d));
  }
  const DateLabels dates = a.dates.empty() ? DateLabels{} : read_date_labels(fs::path(a.dates));
  outputs.write(a.csv, corpus_stats(docs, dates).to_csv());
}

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Parse: return kParseError;
    case ErrorCategory::Validation: return kValidationError;
    case ErrorCategory::Io: return kIoError;
  }
  return kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polytonic Greek OCR evaluation and corpus building", "pgforge"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML file supplying flag values; flags on the command line win");
  app.require_subcommand(1, 1);
  app.allow_config_extras(CLI::config_extras_mode::error);

  Globals globals;
  app.add_option("-j,--jobs", globals.jobs, "Worker threads (0 = one per core)")
      ->capture_default_str();

  NormalizeArgs normalize;
  auto* normalize_cmd = app.add_subcommand("normalize", "Canonicalize character encodings");
  normalize_cmd->add_option("input", normalize.input, "File or directory")->required();
  normalize_cmd->add_option("output", normalize.output, "File or directory ('-' for stdout)")->required();
  normalize_cmd->add_option("--table", normalize.table,
                            std::string("Canonicalization table TSV (default: $") + kTableEnv +
                                ", else builtin)");

  CleanArgs clean;
  auto* clean_cmd = app.add_subcommand("clean", "Dehyphenate and drop Latin lines");
  clean_cmd->add_option("input", clean.input, "Text file, page XML/JSON, or directory")->required();
  clean_cmd->add_option("output", clean.output, "File or directory ('-' for stdout)")->required();
  clean_cmd->add_option("--latin-threshold", clean.latin_threshold,
                        "Drop lines whose Latin letter share exceeds this")
      ->capture_default_str();
  clean_cmd->add_option("--provenance", clean.provenance,
                        "Provenance JSON (default: OUTPUT.provenance.json)");

  EvalTextArgs eval_text;
  auto* eval_text_cmd = app.add_subcommand("eval-text", "Character and word error rates");
  eval_text_cmd->add_option("--ref", eval_text.ref_dir, "Reference directory");
  eval_text_cmd->add_option("--hyp", eval_text.hyp_dir, "Hypothesis directory");
  eval_text_cmd->add_option("--manifest", eval_text.manifest, "TSV of reference/hypothesis paths");
  eval_text_cmd->add_flag("--normalize", eval_text.normalize, "Canonicalize both sides first");
  eval_text_cmd->add_option("--table", eval_text.table, "Canonicalization table TSV");
  eval_text_cmd->add_option("--report", eval_text.report, "Report JSON ('-' for stdout)")->required();
  eval_text_cmd->add_option("--confusion", eval_text.confusion,
                            "Confusion CSV (default: REPORT with .confusion.csv)");

  EvalLayoutArgs eval_layout;
  auto* eval_layout_cmd = app.add_subcommand("eval-layout", "Region/line detection and reading order");
  eval_layout_cmd->add_option("--gt", eval_layout.gt_dir, "Ground-truth page directory")->required();
  eval_layout_cmd->add_option("--pred", eval_layout.pred_dir, "Prediction directory")->required();
  eval_layout_cmd->add_option("--iou", eval_layout.iou, "IoU threshold in (0, 1]")->capture_default_str();
  eval_layout_cmd->add_flag("--no-map", eval_layout.no_map, "Skip average precision");
  eval_layout_cmd->add_option("--report", eval_layout.report, "Report JSON ('-' for stdout)")->required();
  eval_layout_cmd->add_option("--csv", eval_layout.csv, "Summary CSV");

  BuildVertArgs build;
  auto* build_cmd = app.add_subcommand("build-vert", "Build a vertical corpus file from pages");
  build_cmd->add_option("--pages", build.pages_dir, "Directory of page XML/JSON")->required();
  build_cmd->add_option("--lexicon", build.lexicon, "Lexicon TSV")->required();
  build_cmd->add_option("--doc-id", build.doc_id, "Document id")->required();
  build_cmd->add_option("--out", build.out, "Vert file ('-' for stdout)")->required();
  build_cmd->add_option("--candidates", build.candidates, "JSON of ambiguous lexicon lookups");
  build_cmd->add_option("--provenance", build.provenance, "Cleanup provenance JSON");
  build_cmd->add_option("--table", build.table, "Canonicalization table TSV");
  build_cmd->add_option("--latin-threshold", build.latin_threshold, "As for clean")
      ->capture_default_str();

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Per-document word counts");
  stats_cmd->add_option("files", stats.files, "Vert files")->required();
  stats_cmd->add_option("--csv", stats.csv, "CSV output ('-' for stdout)")->capture_default_str();
  stats_cmd->add_option("--dates", stats.dates, "TSV of doc_id and date label");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::FileError& e) {
    err << "pgforge: error: " << e.what() << "\n";
    return kIoError;
  } catch (const CLI::ParseError& e) {
    err << "pgforge: error: " << e.what() << "\n"
        << "Usage: pgforge [--config FILE] [--jobs N] SUBCOMMAND [OPTIONS]\n"
        << "Run with --help for more information.\n";
    return kParseError;
  }

  const Outputs outputs(out);
  try {
    if (*normalize_cmd) run_normalize(normalize, globals, outputs);
    else if (*clean_cmd) run_clean(clean, globals, outputs);
    else if (*eval_text_cmd) run_eval_text(eval_text, globals, outputs);
    else if (*eval_layout_cmd) run_eval_layout(eval_layout, globals, outputs, err);
    else if (*build_cmd) run_build_vert(build, globals, outputs, err);
    else if (*stats_cmd) run_stats(stats, globals, outputs);
  } catch (const CLI::ParseError& e) {
    err << "pgforge: error: " << e.what() << "\n";
    return kParseError;
  } catch (const Error& e) {
    err << "pgforge: error: " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const nlohmann::json::exception& e) {
    err << "pgforge: error: " << e.what() << "\n";
    return kParseError;
  } catch (const std::invalid_argument& e) {
    err << "pgforge: error: " << e.what() << "\n";
    return kValidationError;
  } catch (const fs::filesystem_error& e) {
    err << "pgforge: error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "pgforge: error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace pgforge::cli

// layout_eval.hpp
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
// Scoring predicted layout against ground truth: greedy IoU matching,
// precision/recall, AP at IoU 0.5, and pairwise reading-order accuracy.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pgforge/layout_model.hpp"

namespace pgforge {

struct Detection {
  RegionClass region_class = RegionClass::MainText_ColGreek;
  Polygon polygon;
  std::optional<double> score;  // matching treats a missing score as 1.0
  std::string id;
};

struct MatchPair {
  std::size_t gt_index = 0;
  std::size_t pred_index = 0;
  double iou = 0;
  bool operator==(const MatchPair&) const = default;
};

struct ClassCounts {
  std::size_t n_gt = 0;
  std::size_t n_pred = 0;
  std::size_t tp = 0;

  std::size_t fp() const { return n_pred - tp; }
  std::size_t fn() const { return n_gt - tp; }
  /// False when there were no predictions; precision() then reports 0.
  bool precision_defined() const { return n_pred > 0; }
  double precision() const;
  /// 0 when there is no ground truth.
  double recall() const;
  ClassCounts& operator+=(const ClassCounts& o);
};

struct MatchResult {
  std::vector<MatchPair> matches;          // in matching order
  std::vector<bool> pred_matched;          // by prediction index
  std::map<RegionClass, ClassCounts> per_class;  // classes seen on either side
};

/// Predictions are visited by descending score; ties go to the one with the
/// larger best IoU, then to input order. Each takes the unmatched
/// same-class ground truth of highest IoU, provided it reaches the
/// threshold. Throws std::invalid_argument unless 0 < threshold <= 1.
MatchResult match_detections(std::span<const TextRegion> gt,
                             std::span<const Detection> pred,
                             double iou_threshold = 0.5);

/// One page of ground truth with its predictions, for pooled metrics.
struct RegionSample {
  std::vector<TextRegion> gt;
  std::vector<Detection> pred;
};

/// All-points interpolated AP per class present in the ground truth,
/// pooled over the samples. Throws MissingScores if any prediction lacks a
/// score.
std::map<RegionClass, double> average_precision_50(
    std::span<const RegionSample> samples, double iou_threshold = 0.5);
std::map<RegionClass, double> average_precision_50(
    std::span<const TextRegion> gt, std::span<const Detection> pred,
    double iou_threshold = 0.5);

/// Mean of the values; NaN for an empty map.
double mean_ap(const std::map<RegionClass, double>& ap);

struct ReadingOrderResult {
  double score = 1.0;
  std::size_t compared_ids = 0;
  std::size_t pairs = 0;
  std::size_t inverted = 0;
  std::vector<std::string> missing_in_pred;  // gt ids the prediction lacks
  std::vector<std::string> missing_in_gt;    // predicted ids not in gt
  std::vector<std::string> duplicates;       // repeats, first one kept

  ReadingOrderResult& operator+=(const ReadingOrderResult& o);
};

/// Fraction of ground-truth-ordered id pairs that the prediction keeps in
/// the same relative order. Ids present on one side only are dropped and
/// listed. With fewer than two shared ids the score is 1.
ReadingOrderResult reading_order_score(std::span<const std::string> gt_order,
                                       std::span<const std::string> pred_order);

/// Predicted page: regions and lines with optional scores, plus the line
/// order implied by its reading order.
struct PagePrediction {
  std::vector<Detection> regions;
  std::vector<Detection> lines;  // class is the parent region's
  std::vector<std::string> line_order;
};

/// Reads the page JSON mirror with an optional "score" on regions and lines.
PagePrediction prediction_from_json(const nlohmann::json& j);
PagePrediction prediction_from_page(const Page& page);

struct LayoutPage {
  std::string id;
  Page gt;
  PagePrediction pred;
};

struct LayoutEvalOptions {
  double iou_threshold = 0.5;
  /// Needs a score on every region and line prediction.
  bool compute_ap = true;
  std::size_t jobs = 1;
};

struct ClassScores {
  ClassCounts counts;
  std::optional<double> ap50;  // present for classes with ground truth
};

struct DetectionReport {
  double iou_threshold = 0.5;
  std::map<RegionClass, ClassScores> per_class;
  std::optional<double> map50;
  ClassScores lines;
  ReadingOrderResult reading_order;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
  /// `task,precision,recall,map50`: one row per class, then line detection,
  /// then reading order (score in the precision column).
  std::string to_csv() const;
};

/// Pools counts, AP and reading-order pairs over all pages.
DetectionReport evaluate_layout(std::span<const LayoutPage> pages,
                                const LayoutEvalOptions& options = {});

}  // namespace pgforge

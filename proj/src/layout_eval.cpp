// layout_eval.cpp
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

#include "pgforge/layout_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "pgforge/errors.hpp"
#include "pgforge/parallel.hpp"

namespace pgforge {
namespace {

struct Box {
  double x0, y0, x1, y1;
};

Box bounds(const Polygon& p) {
  Box b{std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity(),
        -std::numeric_limits<double>::infinity(),
        -std::numeric_limits<double>::infinity()};
  for (const Point& v : p.vertices()) {
    b.x0 = std::min(b.x0, v.x);
    b.y0 = std::min(b.y0, v.y);
    b.x1 = std::max(b.x1, v.x);
    b.y1 = std::max(b.y1, v.y);
  }
  return b;
}

bool boxes_overlap(const Box& a, const Box& b) {
  return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

// What the matcher needs to know about one shape. `key` separates classes;
// a single key makes matching class-agnostic.
struct Shape {
  const Polygon* polygon;
  int key;
};

struct Candidate {
  std::size_t gt;
  double iou;
};

// Outcome for a single prediction.
struct PredOutcome {
  double score = 1.0;
  double best_iou = 0.0;
  std::optional<std::size_t> gt;
  double iou = 0.0;
};

bool visit_before(const PredOutcome& a, std::size_t ia, const PredOutcome& b,
                  std::size_t ib) {
  if (a.score != b.score) return a.score > b.score;
  if (a.best_iou != b.best_iou) return a.best_iou > b.best_iou;
  return ia < ib;
}

std::vector<PredOutcome> greedy_match(const std::vector<Shape>& gt,
                                      const std::vector<Shape>& pred,
                                      const std::vector<double>& scores,
                                      double threshold,
                                      std::vector<std::size_t>* order_out) {
  std::vector<Box> gt_boxes;
  gt_boxes.reserve(gt.size());
  for (const auto& g : gt) gt_boxes.push_back(bounds(*g.polygon));

  std::vector<std::vector<Candidate>> candidates(pred.size());
  std::vector<PredOutcome> out(pred.size());
  for (std::size_t p = 0; p < pred.size(); ++p) {
    out[p].score = scores[p];
    const Box pb = bounds(*pred[p].polygon);
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (gt[g].key != pred[p].key || !boxes_overlap(pb, gt_boxes[g])) continue;
      const double iou = polygon_iou(*gt[g].polygon, *pred[p].polygon);
      if (iou <= 0) continue;
      candidates[p].push_back({g, iou});
      out[p].best_iou = std::max(out[p].best_iou, iou);
    }
  }

  std::vector<std::size_t> order(pred.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return visit_before(out[a], a, out[b], b);
  });

  std::vector<bool> taken(gt.size(), false);
  for (std::size_t p : order) {
    const Candidate* best = nullptr;
    for (const auto& c : candidates[p]) {
      if (taken[c.gt] || c.iou < threshold) continue;
      if (!best || c.iou > best->iou) best = &c;
    }
    if (best) {
      taken[best->gt] = true;
      out[p].gt = best->gt;
      out[p].iou = best->iou;
    }
  }
  if (order_out) *order_out = std::move(order);
  return out;
}

void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0))
    throw std::invalid_argument("IoU threshold must lie in (0, 1]");
}

std::vector<Shape> region_shapes(std::span<const TextRegion> regions) {
  std::vector<Shape> s;
  s.reserve(regions.size());
  for (const auto& r : regions)
    s.push_back({&r.polygon, static_cast<int>(r.region_class)});
  return s;
}

std::vector<Shape> detection_shapes(std::span<const Detection> dets,
                                    bool by_class) {
  std::vector<Shape> s;
  s.reserve(dets.size());
  for (const auto& d : dets)
    s.push_back({&d.polygon, by_class ? static_cast<int>(d.region_class) : 0});
  return s;
}

std::vector<double> scores_of(std::span<const Detection> dets) {
  std::vector<double> s;
  s.reserve(dets.size());
  for (const auto& d : dets) s.push_back(d.score.value_or(1.0));
  return s;
}

// One prediction as seen by the pooled AP sweep.
struct Ranked {
  double score;
  double best_iou;
  std::size_t page;
  std::size_t index;
  bool tp;
};

double all_points_ap(std::vector<Ranked> ranked, std::size_t n_gt) {
  if (n_gt == 0) return std::numeric_limits<double>::quiet_NaN();
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.best_iou != b.best_iou) return a.best_iou > b.best_iou;
    if (a.page != b.page) return a.page < b.page;
    return a.index < b.index;
  });
  std::vector<double> recall{0.0};
  std::vector<double> precision{0.0};
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (ranked[k].tp) ++tp;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
  }
  recall.push_back(1.0);
  precision.push_back(0.0);
  // Interpolate: precision at recall r is the best precision at any
  // recall >= r.
  for (std::size_t k = precision.size() - 1; k-- > 0;)
    precision[k] = std::max(precision[k], precision[k + 1]);
  double ap = 0.0;
  for (std::size_t k = 1; k < recall.size(); ++k)
    ap += (recall[k] - recall[k - 1]) * precision[k];
  return ap;
}

std::size_t count_inversions(std::vector<std::size_t>& v,
                             std::vector<std::size_t>& scratch,
                             std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::size_t inv = count_inversions(v, scratch, lo, mid) +
                    count_inversions(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      inv += mid - i;
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + lo, scratch.begin() + hi, v.begin() + lo);
  return inv;
}

std::optional<double> read_score(const nlohmann::json& obj,
                                 const std::string& where) {
  auto it = obj.find("score");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number())
    throw MalformedPageJson(where + ": score must be a number");
  const double s = it->get<double>();
  if (!(s >= 0.0 && s <= 1.0))
    throw MalformedPageJson(where + ": score outside [0, 1]");
  return s;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

nlohmann::json scores_json(const ClassScores& s) {
  nlohmann::json j{{"n_gt", s.counts.n_gt},
                   {"n_pred", s.counts.n_pred},
                   {"tp", s.counts.tp},
                   {"precision", s.counts.precision()},
                   {"precision_defined", s.counts.precision_defined()},
                   {"recall", s.counts.recall()}};
  j["ap50"] = s.ap50 ? nlohmann::json(*s.ap50) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

double ClassCounts::precision() const {
  if (n_pred == 0) return 0.0;
  return static_cast<double>(tp) / static_cast<double>(n_pred);
}

double ClassCounts::recall() const {
  if (n_gt == 0) return 0.0;
  return static_cast<double>(tp) / static_cast<double>(n_gt);
}

ClassCounts& ClassCounts::operator+=(const ClassCounts& o) {
  n_gt += o.n_gt;
  n_pred += o.n_pred;
  tp += o.tp;
  return *this;
}

MatchResult match_detections(std::span<const TextRegion> gt,
                             std::span<const Detection> pred,
                             double iou_threshold) {
  check_threshold(iou_threshold);
  std::vector<std::size_t> order;
  const auto outcome =
      greedy_match(region_shapes(gt), detection_shapes(pred, true),
                   scores_of(pred), iou_threshold, &order);

  MatchResult result;
  result.pred_matched.assign(pred.size(), false);
  for (const auto& g : gt) ++result.per_class[g.region_class].n_gt;
  for (const auto& p : pred) ++result.per_class[p.region_class].n_pred;
  for (std::size_t p : order) {
    if (!outcome[p].gt) continue;
    result.matches.push_back({*outcome[p].gt, p, outcome[p].iou});
    result.pred_matched[p] = true;
    ++result.per_class[pred[p].region_class].tp;
  }
  return result;
}

std::map<RegionClass, double> average_precision_50(
    std::span<const RegionSample> samples, double iou_threshold) {
  check_threshold(iou_threshold);
  std::map<RegionClass, std::vector<Ranked>> ranked;
  std::map<RegionClass, std::size_t> n_gt;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& sample = samples[s];
    for (const auto& d : sample.pred)
      if (!d.score) throw MissingScores();
    for (const auto& g : sample.gt) ++n_gt[g.region_class];
    const auto outcome =
        greedy_match(region_shapes(sample.gt), detection_shapes(sample.pred, true),
                     scores_of(sample.pred), iou_threshold, nullptr);
    for (std::size_t p = 0; p < sample.pred.size(); ++p)
      ranked[sample.pred[p].region_class].push_back(
          {outcome[p].score, outcome[p].best_iou, s, p, outcome[p].gt.has_value()});
  }
  std::map<RegionClass, double> ap;
  for (const auto& [cls, count] : n_gt) ap[cls] = all_points_ap(ranked[cls], count);
  return ap;
}

std::map<RegionClass, double> average_precision_50(
    std::span<const TextRegion> gt, std::span<const Detection> pred,
    double iou_threshold) {
  const RegionSample sample{{gt.begin(), gt.end()}, {pred.begin(), pred.end()}};
  return average_precision_50(std::span(&sample, 1), iou_threshold);
}

double mean_ap(const std::map<RegionClass, double>& ap) {
  if (ap.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0;
  for (const auto& [cls, v] : ap) sum += v;
  return sum / static_cast<double>(ap.size());
}

ReadingOrderResult& ReadingOrderResult::operator+=(const ReadingOrderResult& o) {
  compared_ids += o.compared_ids;
  pairs += o.pairs;
  inverted += o.inverted;
  missing_in_pred.insert(missing_in_pred.end(), o.missing_in_pred.begin(),
                         o.missing_in_pred.end());
  missing_in_gt.insert(missing_in_gt.end(), o.missing_in_gt.begin(),
                       o.missing_in_gt.end());
  duplicates.insert(duplicates.end(), o.duplicates.begin(), o.duplicates.end());
  score = pairs == 0 ? 1.0
                     : 1.0 - static_cast<double>(inverted) /
                                 static_cast<double>(pairs);
  return *this;
}

ReadingOrderResult reading_order_score(std::span<const std::string> gt_order,
                                       std::span<const std::string> pred_order) {
  ReadingOrderResult r;
  std::unordered_map<std::string, std::size_t> gt_rank;
  for (const auto& id : gt_order) {
    if (!gt_rank.emplace(id, gt_rank.size()).second) r.duplicates.push_back(id);
  }
  std::unordered_map<std::string, bool> seen_pred;
  std::vector<std::size_t> ranks;
  for (const auto& id : pred_order) {
    if (!seen_pred.emplace(id, true).second) {
      r.duplicates.push_back(id);
      continue;
    }
    auto it = gt_rank.find(id);
    if (it == gt_rank.end()) {
      r.missing_in_gt.push_back(id);
      continue;
    }
    ranks.push_back(it->second);
  }
  for (const auto& id : gt_order) {
    if (!seen_pred.contains(id) &&
        std::find(r.missing_in_pred.begin(), r.missing_in_pred.end(), id) ==
            r.missing_in_pred.end())
      r.missing_in_pred.push_back(id);
  }

  const std::size_t k = ranks.size();
  r.compared_ids = k;
  r.pairs = k < 2 ? 0 : k * (k - 1) / 2;
  std::vector<std::size_t> scratch(k);
  r.inverted = count_inversions(ranks, scratch, 0, k);
  r.score = r.pairs == 0 ? 1.0
                         : 1.0 - static_cast<double>(r.inverted) /
                                     static_cast<double>(r.pairs);
  return r;
}

PagePrediction prediction_from_page(const Page& page) {
  PagePrediction p;
  for (const auto& region : page.regions) {
    p.regions.push_back({region.region_class, region.polygon, std::nullopt,
                         region.id});
    for (const auto& line : region.lines) {
      if (line.polygon)
        p.lines.push_back({region.region_class, *line.polygon, std::nullopt,
                           line.id});
    }
  }
  for (const auto& l : linearize(page)) p.line_order.push_back(l.line_id);
  return p;
}

PagePrediction prediction_from_json(const nlohmann::json& j) {
  const Page page = page_from_json(j);
  PagePrediction p = prediction_from_page(page);
  // page_from_json already validated the shape, so regions/lines line up
  // one-to-one with the array entries.
  std::size_t line_k = 0;
  const auto& regions = j.at("regions");
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const auto& rj = regions[r];
    p.regions[r].score = read_score(rj, "region " + page.regions[r].id);
    if (!rj.contains("lines")) continue;
    const auto& lines = rj.at("lines");
    for (std::size_t l = 0; l < lines.size(); ++l) {
      if (!page.regions[r].lines[l].polygon) continue;
      p.lines[line_k++].score =
          read_score(lines[l], "line " + page.regions[r].lines[l].id);
    }
  }
  return p;
}

nlohmann::json DetectionReport::to_json() const {
  nlohmann::json j;
  j["iou_threshold"] = iou_threshold;
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [cls, s] : per_class)
    classes[std::string(to_string(cls))] = scores_json(s);
  j["per_class"] = std::move(classes);
  j["map50"] = map50 ? nlohmann::json(*map50) : nlohmann::json(nullptr);
  j["lines"] = scores_json(lines);
  j["reading_order"] = {{"score", reading_order.score},
                        {"compared_ids", reading_order.compared_ids},
                        {"pairs", reading_order.pairs},
                        {"inverted", reading_order.inverted},
                        {"missing_in_pred", reading_order.missing_in_pred},
                        {"missing_in_gt", reading_order.missing_in_gt},
                        {"duplicates", reading_order.duplicates}};
  j["warnings"] = warnings;
  return j;
}

std::string DetectionReport::to_csv() const {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::string out = "task,precision,recall,map50\n";
  auto row = [&](std::string_view task, double p, double r, double ap) {
    out += task;
    out += ',' + fmt(p) + ',' + fmt(r) + ',' + fmt(ap) + '\n';
  };
  for (RegionClass cls : kAllRegionClasses) {
    auto it = per_class.find(cls);
    if (it == per_class.end()) continue;
    const auto& s = it->second;
    row(to_string(cls),
        s.counts.precision_defined() ? s.counts.precision() : nan,
        s.counts.n_gt ? s.counts.recall() : nan, s.ap50.value_or(nan));
  }
  row("Line detection", lines.counts.precision_defined() ? lines.counts.precision() : nan,
      lines.counts.n_gt ? lines.counts.recall() : nan, lines.ap50.value_or(nan));
  row("Reading order", reading_order.score, nan, nan);
  return out;
}

DetectionReport evaluate_layout(std::span<const LayoutPage> pages,
                                const LayoutEvalOptions& options) {
  check_threshold(options.iou_threshold);
  if (options.compute_ap) {
    for (const auto& page : pages) {
      for (const auto& d : page.pred.regions)
        if (!d.score) throw MissingScores();
      for (const auto& d : page.pred.lines)
        if (!d.score) throw MissingScores();
    }
  }

  struct PageOutcome {
    std::vector<TextRegion> gt_lines;  // line polygons dressed as regions
    std::vector<PredOutcome> regions;
    std::vector<PredOutcome> lines;
    ReadingOrderResult order;
  };
  auto outcomes = parallel_map(pages.size(), options.jobs, [&](std::size_t k) {
    const LayoutPage& page = pages[k];
    PageOutcome o;
    o.regions = greedy_match(region_shapes(page.gt.regions),
                             detection_shapes(page.pred.regions, true),
                             scores_of(page.pred.regions),
                             options.iou_threshold, nullptr);
    for (const auto& region : page.gt.regions)
      for (const auto& line : region.lines)
        if (line.polygon)
          o.gt_lines.push_back({line.id, region.region_class, *line.polygon, {}, 0});
    std::vector<Shape> gt_line_shapes;
    for (const auto& l : o.gt_lines) gt_line_shapes.push_back({&l.polygon, 0});
    o.lines = greedy_match(gt_line_shapes, detection_shapes(page.pred.lines, false),
                           scores_of(page.pred.lines), options.iou_threshold,
                           nullptr);
    std::vector<std::string> gt_order;
    for (const auto& l : linearize(page.gt)) gt_order.push_back(l.line_id);
    o.order = reading_order_score(gt_order, page.pred.line_order);
    return o;
  });

  DetectionReport report;
  report.iou_threshold = options.iou_threshold;
  std::map<RegionClass, std::vector<Ranked>> ranked;
  std::vector<Ranked> ranked_lines;
  for (std::size_t k = 0; k < pages.size(); ++k) {
    const LayoutPage& page = pages[k];
    const PageOutcome& o = outcomes[k];
    for (const auto& g : page.gt.regions) ++report.per_class[g.region_class].counts.n_gt;
    for (std::size_t p = 0; p < page.pred.regions.size(); ++p) {
      const auto cls = page.pred.regions[p].region_class;
      auto& counts = report.per_class[cls].counts;
      ++counts.n_pred;
      if (o.regions[p].gt) ++counts.tp;
      ranked[cls].push_back({o.regions[p].score, o.regions[p].best_iou, k, p,
                             o.regions[p].gt.has_value()});
    }
    report.lines.counts.n_gt += o.gt_lines.size();
    report.lines.counts.n_pred += page.pred.lines.size();
    for (std::size_t p = 0; p < o.lines.size(); ++p) {
      if (o.lines[p].gt) ++report.lines.counts.tp;
      ranked_lines.push_back({o.lines[p].score, o.lines[p].best_iou, k, p,
                              o.lines[p].gt.has_value()});
    }
    report.reading_order += o.order;
  }

  if (options.compute_ap) {
    std::map<RegionClass, double> ap;
    for (auto& [cls, scores] : report.per_class) {
      if (scores.counts.n_gt == 0) continue;
      scores.ap50 = all_points_ap(ranked[cls], scores.counts.n_gt);
      ap[cls] = *scores.ap50;
    }
    if (!ap.empty()) report.map50 = mean_ap(ap);
    if (report.lines.counts.n_gt > 0)
      report.lines.ap50 = all_points_ap(ranked_lines, report.lines.counts.n_gt);
  } else {
    report.warnings.push_back("AP not computed (disabled)");
  }
  return report;
}

}  // namespace pgforge

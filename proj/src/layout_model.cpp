// layout_model.cpp
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

#include "pgforge/layout_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <regex>
#include <sstream>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "pgforge/errors.hpp"

namespace pgforge {

namespace {

namespace bg = boost::geometry;
namespace pt = boost::property_tree;

using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint>;
using BgMultiPolygon = bg::model::multi_polygon<BgPolygon>;

struct ClassName {
  RegionClass cls;
  std::string_view name;
};

constexpr ClassName kClassNames[] = {
    {RegionClass::MainText_ColGreek, "MainText_ColGreek"},
    {RegionClass::MainText_ColLatin, "MainText_ColLatin"},
    {RegionClass::MainText_Title, "MainText_Title"},
    {RegionClass::Marginalia, "Marginalia"},
    {RegionClass::Marginalia_Footnote, "Marginalia_Footnote"},
    {RegionClass::Marginalia_PageNumber, "Marginalia_PageNumber"},
    {RegionClass::Marginalia_ParagraphNumber, "Marginalia_ParagraphNumber"},
    {RegionClass::Title_RunningTitle, "Title_RunningTitle"},
};

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Element names may carry a namespace prefix ("pc:TextRegion").
std::string_view local_name(std::string_view key) {
  const auto colon = key.find(':');
  return colon == std::string_view::npos ? key : key.substr(colon + 1);
}

const pt::ptree* find_child(const pt::ptree& node, std::string_view name) {
  for (const auto& [key, child] : node) {
    if (local_name(key) == name) return &child;
  }
  return nullptr;
}

std::optional<std::string> attribute(const pt::ptree& node, const char* name) {
  if (auto attrs = node.get_child_optional("<xmlattr>")) {
    if (auto value = attrs->get_optional<std::string>(name)) return *value;
  }
  return std::nullopt;
}

std::optional<std::string> custom_type(const std::string& custom) {
  static const std::regex re(R"(structure\s*\{[^}]*type\s*:\s*([^;}\s]+))");
  std::smatch m;
  if (std::regex_search(custom, m, re)) return m[1].str();
  return std::nullopt;
}

std::optional<long> custom_reading_index(const std::string& custom) {
  static const std::regex re(R"(readingOrder\s*\{[^}]*index\s*:\s*(-?\d+))");
  std::smatch m;
  if (std::regex_search(custom, m, re)) return std::stol(m[1].str());
  return std::nullopt;
}

std::string custom_attribute(std::optional<std::size_t> reading_index,
                             std::optional<RegionClass> cls) {
  std::string out;
  if (reading_index) {
    out += "readingOrder {index:" + std::to_string(*reading_index) + ";}";
  }
  if (cls) {
    if (!out.empty()) out += ' ';
    out += "structure {type:" + std::string(to_string(*cls)) + ";}";
  }
  return out;
}

// Turns possibly sparse or duplicated explicit indices into ranks 0..n-1.
// Ties keep document order.
std::vector<std::size_t> rank_indices(const std::vector<long>& given,
                                      bool& had_duplicates) {
  std::vector<std::size_t> order(given.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return given[a] < given[b]; });
  std::vector<std::size_t> rank(given.size());
  had_duplicates = false;
  for (std::size_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = r;
    if (r > 0 && given[order[r]] == given[order[r - 1]]) had_duplicates = true;
  }
  return rank;
}

Polygon read_coords(const pt::ptree& element, const std::string& id,
                    bool required, std::optional<Polygon>* out_optional) {
  const pt::ptree* coords = find_child(element, "Coords");
  if (!coords) {
    if (required) throw MissingCoords(id);
    return {};
  }
  const auto points = attribute(*coords, "points");
  if (!points) throw MissingCoords(id);
  try {
    Polygon poly = Polygon::from_points_attr(*points);
    if (out_optional) *out_optional = poly;
    return poly;
  } catch (const InvalidPolygon& e) {
    throw MalformedXml("element '" + id + "': " + e.what());
  }
}

std::string line_text(const pt::ptree& line) {
  const pt::ptree* equiv = find_child(line, "TextEquiv");
  if (!equiv) return {};
  const pt::ptree* unicode = find_child(*equiv, "Unicode");
  if (!unicode) return {};
  return unicode->data();
}

void check_bounds(const Polygon& poly, const Page& page, const std::string& id,
                  ParseReport& report) {
  for (const Point& p : poly.vertices()) {
    if (p.x < 0 || p.y < 0 || p.x > page.width || p.y > page.height) {
      report.warnings.push_back("element '" + id +
                                "' has coordinates outside the page");
      return;
    }
  }
}

BgPolygon to_boost(const Polygon& poly) {
  BgPolygon out;
  for (const Point& p : poly.vertices()) {
    bg::append(out.outer(), BgPoint(p.x, p.y));
  }
  bg::correct(out);
  return out;
}

nlohmann::json polygon_to_json(const Polygon& poly) {
  auto arr = nlohmann::json::array();
  for (const Point& p : poly.vertices()) arr.push_back({p.x, p.y});
  return arr;
}

Polygon polygon_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw MalformedPageJson("polygon must be an array");
  std::vector<Point> pts;
  for (const auto& v : j) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw MalformedPageJson("polygon vertex must be [x, y]");
    }
    pts.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  return Polygon(std::move(pts));
}

template <typename T>
T required(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw MalformedPageJson(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw MalformedPageJson(std::string("bad type for field '") + key + "'");
  }
}

}  // namespace

std::string_view to_string(RegionClass cls) {
  for (const auto& entry : kClassNames) {
    if (entry.cls == cls) return entry.name;
  }
  return "?";
}

RegionClass parse_region_class(std::string_view label) {
  for (const auto& entry : kClassNames) {
    if (entry.name == label) return entry.cls;
  }
  if (label == "Running") return RegionClass::Title_RunningTitle;
  throw UnknownRegionClass(std::string(label));
}

bool is_relevant(RegionClass cls) {
  return cls == RegionClass::MainText_ColGreek ||
         cls == RegionClass::MainText_Title;
}

Polygon::Polygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) {
    throw InvalidPolygon("needs at least 3 vertices, got " +
                         std::to_string(vertices_.size()));
  }
  for (const Point& p : vertices_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw InvalidPolygon("non-finite coordinate");
    }
  }
}

Polygon Polygon::from_points_attr(std::string_view points) {
  std::vector<Point> pts;
  std::size_t i = 0;
  while (i < points.size()) {
    while (i < points.size() && std::isspace(static_cast<unsigned char>(points[i]))) ++i;
    if (i == points.size()) break;
    std::size_t end = i;
    while (end < points.size() && !std::isspace(static_cast<unsigned char>(points[end]))) ++end;
    const std::string_view pair = points.substr(i, end - i);
    const auto comma = pair.find(',');
    if (comma == std::string_view::npos) {
      throw InvalidPolygon("point '" + std::string(pair) + "' is not x,y");
    }
    const auto x = parse_number(pair.substr(0, comma));
    const auto y = parse_number(pair.substr(comma + 1));
    if (!x || !y) throw InvalidPolygon("bad number in '" + std::string(pair) + "'");
    pts.push_back({*x, *y});
    i = end;
  }
  return Polygon(std::move(pts));
}

std::string Polygon::to_points_attr() const {
  std::string out;
  for (const Point& p : vertices_) {
    if (!out.empty()) out += ' ';
    out += format_number(p.x);
    out += ',';
    out += format_number(p.y);
  }
  return out;
}

Polygon Polygon::rectangle(double x0, double y0, double x1, double y1) {
  return Polygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
}

double Polygon::area() const {
  double twice = 0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    const Point& a = vertices_[i];
    const Point& b = vertices_[(i + 1) % vertices_.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) / 2;
}

double polygon_iou(const Polygon& a, const Polygon& b) {
  if (a.area() == 0 || b.area() == 0) throw DegeneratePolygon();
  const BgPolygon pa = to_boost(a);
  const BgPolygon pb = to_boost(b);
  std::string reason;
  if (!bg::is_valid(pa, reason) || !bg::is_valid(pb, reason)) {
    throw InvalidPolygon(reason);
  }
  BgMultiPolygon inter;
  try {
    bg::intersection(pa, pb, inter);
  } catch (const bg::exception& e) {
    throw InvalidPolygon(e.what());
  }
  const double inter_area = bg::area(inter);
  const double union_area = bg::area(pa) + bg::area(pb) - inter_area;
  if (union_area <= 0) return 0;
  return std::clamp(inter_area / union_area, 0.0, 1.0);
}

ParsedPage parse_page_xml(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw MalformedXml(e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  const pt::ptree* root = find_child(tree, "PcGts");
  if (!root) throw MalformedXml("no PcGts root element");
  const pt::ptree* page_node = find_child(*root, "Page");
  if (!page_node) throw MalformedXml("no Page element");

  ParsedPage result;
  Page& page = result.page;
  ParseReport& report = result.report;

  page.image_ref = attribute(*page_node, "imageFilename").value_or("");
  const auto width = attribute(*page_node, "imageWidth");
  const auto height = attribute(*page_node, "imageHeight");
  if (!width || !height) throw MalformedXml("Page lacks imageWidth/imageHeight");
  const auto w = parse_number(*width);
  const auto h = parse_number(*height);
  if (!w || !h || *w < 0 || *h < 0) throw MalformedXml("bad page dimensions");
  page.width = *w;
  page.height = *h;

  std::vector<long> region_custom_index;
  bool all_regions_have_custom_index = true;
  std::size_t regions_with_lines = 0;
  std::size_t regions_with_explicit_lines = 0;

  for (const auto& [key, node] : *page_node) {
    if (local_name(key) != "TextRegion") continue;
    TextRegion region;
    region.id = attribute(node, "id").value_or("");
    if (region.id.empty()) throw MalformedXml("TextRegion without id");
    const std::string custom = attribute(node, "custom").value_or("");
    const auto label = custom_type(custom);
    region.region_class = parse_region_class(label.value_or(""));
    region.polygon = read_coords(node, region.id, true, nullptr);
    check_bounds(region.polygon, page, region.id, report);

    if (auto idx = custom_reading_index(custom)) {
      region_custom_index.push_back(*idx);
    } else {
      all_regions_have_custom_index = false;
      region_custom_index.push_back(0);
    }

    std::vector<long> line_index;
    bool all_lines_explicit = true;
    for (const auto& [line_key, line_node] : node) {
      if (local_name(line_key) != "TextLine") continue;
      TextLine line;
      line.id = attribute(line_node, "id").value_or("");
      if (line.id.empty()) throw MalformedXml("TextLine without id in " + region.id);
      read_coords(line_node, line.id, false, &line.polygon);
      if (line.polygon) check_bounds(*line.polygon, page, line.id, report);
      line.text = line_text(line_node);
      const std::string line_custom = attribute(line_node, "custom").value_or("");
      if (auto idx = custom_reading_index(line_custom)) {
        line_index.push_back(*idx);
      } else {
        all_lines_explicit = false;
        line_index.push_back(static_cast<long>(line_index.size()));
      }
      region.lines.push_back(std::move(line));
    }

    if (!region.lines.empty()) {
      ++regions_with_lines;
      if (all_lines_explicit) {
        ++regions_with_explicit_lines;
      } else {
        std::iota(line_index.begin(), line_index.end(), 0L);
      }
      bool dup = false;
      const auto ranks = rank_indices(line_index, dup);
      if (dup) {
        report.warnings.push_back("duplicate line reading indices in region '" +
                                  region.id + "'");
      }
      for (std::size_t i = 0; i < region.lines.size(); ++i) {
        region.lines[i].reading_index = ranks[i];
      }
    }
    page.regions.push_back(std::move(region));
  }

  if (regions_with_lines > 0 && regions_with_explicit_lines == regions_with_lines) {
    report.line_order = OrderSource::Explicit;
  } else if (regions_with_explicit_lines > 0) {
    report.warnings.push_back(
        "some regions lack explicit line order; document order used there");
  }

  // Region order: a ReadingOrder block wins, then custom indices, then
  // document order.
  std::vector<long> region_index(page.regions.size());
  std::iota(region_index.begin(), region_index.end(), 0L);
  report.region_order = OrderSource::DocumentOrder;

  const pt::ptree* reading_order = find_child(*page_node, "ReadingOrder");
  const pt::ptree* group =
      reading_order ? find_child(*reading_order, "OrderedGroup") : nullptr;
  if (group) {
    std::map<std::string, long> by_id;
    for (const auto& [key, ref] : *group) {
      if (local_name(key) != "RegionRefIndexed") continue;
      const auto index = attribute(ref, "index");
      const auto target = attribute(ref, "regionRef");
      if (!index || !target) throw MalformedXml("incomplete RegionRefIndexed");
      const auto n = parse_number(*index);
      if (!n) throw MalformedXml("bad RegionRefIndexed index");
      by_id[*target] = static_cast<long>(*n);
    }
    const long after_all = static_cast<long>(by_id.size()) +
                           std::accumulate(by_id.begin(), by_id.end(), 0L,
                                           [](long m, const auto& kv) {
                                             return std::max(m, kv.second);
                                           });
    for (std::size_t i = 0; i < page.regions.size(); ++i) {
      auto it = by_id.find(page.regions[i].id);
      if (it == by_id.end()) {
        report.warnings.push_back("region '" + page.regions[i].id +
                                  "' missing from ReadingOrder");
        region_index[i] = after_all + static_cast<long>(i);
      } else {
        region_index[i] = it->second;
        by_id.erase(it);
      }
    }
    for (const auto& [id, idx] : by_id) {
      report.warnings.push_back("ReadingOrder references unknown region '" + id + "'");
    }
    report.region_order = OrderSource::Explicit;
  } else if (!page.regions.empty() && all_regions_have_custom_index) {
    region_index = region_custom_index;
    report.region_order = OrderSource::Explicit;
  }

  bool dup = false;
  const auto ranks = rank_indices(region_index, dup);
  if (dup) report.warnings.push_back("duplicate region reading indices");
  for (std::size_t i = 0; i < page.regions.size(); ++i) {
    page.regions[i].reading_index = ranks[i];
  }
  return result;
}

ParsedPage parse_page_xml(std::string_view xml) {
  std::istringstream in{std::string(xml)};
  return parse_page_xml(in);
}

ParsedPage parse_page_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open page file " + path.string());
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedPageJson(e.what());
    }
    ParsedPage parsed;
    parsed.page = page_from_json(j);
    parsed.report.region_order = OrderSource::Explicit;
    parsed.report.line_order = OrderSource::Explicit;
    return parsed;
  }
  return parse_page_xml(in);
}

std::string serialize_page_xml(const Page& page) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<PcGts xmlns=\"http://schema.primaresearch.org/PAGE/gts/pagecontent/"
         "2013-07-15\">\n"
      << "  <Page imageFilename=\"" << xml_escape(page.image_ref)
      << "\" imageWidth=\"" << format_number(page.width) << "\" imageHeight=\""
      << format_number(page.height) << "\">\n";

  std::vector<const TextRegion*> ordered;
  for (const auto& r : page.regions) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) {
    return a->reading_index < b->reading_index;
  });
  if (!page.regions.empty()) {
    out << "    <ReadingOrder>\n      <OrderedGroup id=\"ro\">\n";
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      out << "        <RegionRefIndexed index=\"" << ordered[i]->reading_index
          << "\" regionRef=\"" << xml_escape(ordered[i]->id) << "\"/>\n";
    }
    out << "      </OrderedGroup>\n    </ReadingOrder>\n";
  }

  for (const auto& region : page.regions) {
    out << "    <TextRegion id=\"" << xml_escape(region.id) << "\" custom=\""
        << xml_escape(custom_attribute(region.reading_index, region.region_class))
        << "\">\n"
        << "      <Coords points=\"" << region.polygon.to_points_attr() << "\"/>\n";
    for (const auto& line : region.lines) {
      out << "      <TextLine id=\"" << xml_escape(line.id) << "\" custom=\""
          << xml_escape(custom_attribute(line.reading_index, std::nullopt))
          << "\">\n";
      if (line.polygon) {
        out << "        <Coords points=\"" << line.polygon->to_points_attr()
            << "\"/>\n";
      }
      out << "        <TextEquiv><Unicode>" << xml_escape(line.text)
          << "</Unicode></TextEquiv>\n"
          << "      </TextLine>\n";
    }
    out << "    </TextRegion>\n";
  }
  out << "  </Page>\n</PcGts>\n";
  return out.str();
}

nlohmann::json page_to_json(const Page& page) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& region : page.regions) {
    nlohmann::json lines = nlohmann::json::array();
    for (const auto& line : region.lines) {
      nlohmann::json jl = {{"id", line.id},
                           {"reading_index", line.reading_index},
                           {"text", line.text}};
      if (line.polygon) jl["polygon"] = polygon_to_json(*line.polygon);
      lines.push_back(std::move(jl));
    }
    regions.push_back({{"id", region.id},
                       {"class", std::string(to_string(region.region_class))},
                       {"reading_index", region.reading_index},
                       {"polygon", polygon_to_json(region.polygon)},
                       {"lines", std::move(lines)}});
  }
  return {{"image", page.image_ref},
          {"width", page.width},
          {"height", page.height},
          {"regions", std::move(regions)}};
}

Page page_from_json(const nlohmann::json& j) {
  Page page;
  page.image_ref = required<std::string>(j, "image");
  page.width = required<double>(j, "width");
  page.height = required<double>(j, "height");
  const auto& regions = j.contains("regions") ? j.at("regions") : nlohmann::json::array();
  if (!regions.is_array()) throw MalformedPageJson("'regions' must be an array");
  for (const auto& jr : regions) {
    TextRegion region;
    region.id = required<std::string>(jr, "id");
    region.region_class = parse_region_class(required<std::string>(jr, "class"));
    region.reading_index = required<std::size_t>(jr, "reading_index");
    if (!jr.contains("polygon")) throw MissingCoords(region.id);
    region.polygon = polygon_from_json(jr.at("polygon"));
    if (jr.contains("lines")) {
      for (const auto& jl : jr.at("lines")) {
        TextLine line;
        line.id = required<std::string>(jl, "id");
        line.reading_index = required<std::size_t>(jl, "reading_index");
        line.text = jl.value("text", "");
        if (jl.contains("polygon")) line.polygon = polygon_from_json(jl.at("polygon"));
        region.lines.push_back(std::move(line));
      }
    }
    page.regions.push_back(std::move(region));
  }
  return page;
}

Page filter_relevant(const Page& page) {
  Page out;
  out.image_ref = page.image_ref;
  out.width = page.width;
  out.height = page.height;
  for (const auto& region : page.regions) {
    if (is_relevant(region.region_class)) out.regions.push_back(region);
  }
  return out;
}

std::vector<LinearLine> linearize(const Page& page) {
  std::vector<const TextRegion*> regions;
  for (const auto& r : page.regions) regions.push_back(&r);
  std::stable_sort(regions.begin(), regions.end(), [](auto* a, auto* b) {
    return a->reading_index < b->reading_index;
  });
  std::vector<LinearLine> out;
  for (const TextRegion* region : regions) {
    std::vector<const TextLine*> lines;
    for (const auto& l : region->lines) lines.push_back(&l);
    std::stable_sort(lines.begin(), lines.end(), [](auto* a, auto* b) {
      return a->reading_index < b->reading_index;
    });
    for (const TextLine* line : lines) out.push_back({line->id, line->text});
  }
  return out;
}

}  // namespace pgforge

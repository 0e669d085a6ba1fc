// layout_model.hpp
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
// Page layout ground truth: semantic regions, line polygons and reading
// order, read from a PAGE-style XML subset or its JSON mirror.

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace pgforge {

enum class RegionClass {
  MainText_ColGreek,
  MainText_ColLatin,
  MainText_Title,
  Marginalia,
  Marginalia_Footnote,
  Marginalia_PageNumber,
  Marginalia_ParagraphNumber,
  Title_RunningTitle,
};

inline constexpr std::array<RegionClass, 8> kAllRegionClasses = {
    RegionClass::MainText_ColGreek,     RegionClass::MainText_ColLatin,
    RegionClass::MainText_Title,        RegionClass::Marginalia,
    RegionClass::Marginalia_Footnote,   RegionClass::Marginalia_PageNumber,
    RegionClass::Marginalia_ParagraphNumber, RegionClass::Title_RunningTitle};

std::string_view to_string(RegionClass cls);
/// Accepts the eight canonical labels plus "Running" for Title_RunningTitle.
/// Throws UnknownRegionClass.
RegionClass parse_region_class(std::string_view label);

/// Greek columns and titles feed the text pipeline; everything else is
/// dropped.
bool is_relevant(RegionClass cls);

struct Point {
  double x = 0;
  double y = 0;
  bool operator==(const Point&) const = default;
};

class Polygon {
 public:
  Polygon() = default;
  /// Throws InvalidPolygon for fewer than three vertices or non-finite
  /// coordinates.
  explicit Polygon(std::vector<Point> vertices);

  /// Parses PAGE `points="x,y x,y ..."`.
  static Polygon from_points_attr(std::string_view points);
  std::string to_points_attr() const;

  static Polygon rectangle(double x0, double y0, double x1, double y1);

  const std::vector<Point>& vertices() const { return vertices_; }
  /// Shoelace area, orientation-independent.
  double area() const;

  bool operator==(const Polygon&) const = default;

 private:
  std::vector<Point> vertices_;
};

/// Intersection over union for arbitrary simple polygons, concave ones
/// included. Throws DegeneratePolygon if either area is zero, and
/// InvalidPolygon if a shape self-intersects.
double polygon_iou(const Polygon& a, const Polygon& b);

struct TextLine {
  std::string id;
  std::optional<Polygon> polygon;
  std::string text;
  std::size_t reading_index = 0;

  bool operator==(const TextLine&) const = default;
};

struct TextRegion {
  std::string id;
  RegionClass region_class = RegionClass::MainText_ColGreek;
  Polygon polygon;
  std::vector<TextLine> lines;  // storage order, not necessarily reading order
  std::size_t reading_index = 0;

  bool operator==(const TextRegion&) const = default;
};

struct Page {
  std::string image_ref;
  double width = 0;
  double height = 0;
  std::vector<TextRegion> regions;  // storage order

  bool operator==(const Page&) const = default;
};

enum class OrderSource { Explicit, DocumentOrder };

struct ParseReport {
  OrderSource region_order = OrderSource::DocumentOrder;
  OrderSource line_order = OrderSource::DocumentOrder;
  std::vector<std::string> warnings;
};

struct ParsedPage {
  Page page;
  ParseReport report;
};

/// Throws MalformedXml, UnknownRegionClass, MissingCoords.
ParsedPage parse_page_xml(std::istream& in);
ParsedPage parse_page_xml(std::string_view xml);
/// Dispatches on extension: `.json` reads the JSON mirror, anything else XML.
ParsedPage parse_page_file(const std::filesystem::path& path);

/// Writes explicit reading order so that parsing the result gives back an
/// equal Page.
std::string serialize_page_xml(const Page& page);

nlohmann::json page_to_json(const Page& page);
/// Throws MalformedPageJson, UnknownRegionClass, InvalidPolygon.
Page page_from_json(const nlohmann::json& j);

/// Keeps only regions for which is_relevant() holds, untouched and in order.
Page filter_relevant(const Page& page);

struct LinearLine {
  std::string line_id;
  std::string text;
  bool operator==(const LinearLine&) const = default;
};

/// Regions in reading order, then lines in reading order within each.
std::vector<LinearLine> linearize(const Page& page);

}  // namespace pgforge

// layout_model_test.cpp
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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pgforge/errors.hpp"
#include "test_support.hpp"

namespace {

using namespace pgforge;
using testutil::test_data;

Page parse_fixture(const std::string& name) {
  return parse_page_file(test_data(name)).page;
}

//===----------------------------------------------------------------------===//
// Parsing
//===----------------------------------------------------------------------===//

TEST(ParsePage, MinimalDocument) {
  const auto parsed = parse_page_file(test_data("minimal.xml"));
  const Page& page = parsed.page;
  EXPECT_EQ(page.image_ref, "min.png");
  EXPECT_EQ(page.width, 100);
  EXPECT_EQ(page.height, 50);
  ASSERT_EQ(page.regions.size(), 1u);
  ASSERT_EQ(page.regions[0].lines.size(), 1u);
  EXPECT_EQ(page.regions[0].lines[0].text, "ὁ λόγος");
  ASSERT_TRUE(page.regions[0].lines[0].polygon.has_value());
  EXPECT_EQ(page.regions[0].lines[0].polygon->vertices().size(), 4u);
  EXPECT_EQ(parsed.report.region_order, OrderSource::DocumentOrder);
  EXPECT_EQ(parsed.report.line_order, OrderSource::DocumentOrder);
  EXPECT_TRUE(parsed.report.warnings.empty());
}

TEST(ParsePage, AllEightClasses) {
  const auto parsed = parse_page_file(test_data("eight_classes.xml"));
  const Page& page = parsed.page;
  ASSERT_EQ(page.regions.size(), 8u);
  std::vector<RegionClass> seen;
  for (const auto& r : page.regions) seen.push_back(r.region_class);
  const std::vector<RegionClass> expected = {
      RegionClass::Title_RunningTitle,   RegionClass::MainText_Title,
      RegionClass::MainText_ColGreek,    RegionClass::MainText_ColLatin,
      RegionClass::Marginalia,           RegionClass::Marginalia_ParagraphNumber,
      RegionClass::Marginalia_Footnote,  RegionClass::Marginalia_PageNumber};
  EXPECT_EQ(seen, expected);
  EXPECT_EQ(parsed.report.region_order, OrderSource::Explicit);
}

TEST(ParsePage, UnknownClassIsAnError) {
  try {
    parse_page_file(test_data("unknown_class.xml"));
    FAIL() << "expected UnknownRegionClass";
  } catch (const UnknownRegionClass& e) {
    EXPECT_EQ(e.label(), "MainText_ColArabic");
  }
}

TEST(ParsePage, MissingClassIsAnError) {
  EXPECT_THROW(parse_page_xml(std::string_view(R"(<PcGts><Page imageWidth="1" imageHeight="1">
    <TextRegion id="r"><Coords points="0,0 1,0 1,1"/></TextRegion></Page></PcGts>)")),
               UnknownRegionClass);
}

TEST(ParsePage, MissingCoords) {
  EXPECT_THROW(parse_page_file(test_data("missing_coords.xml")), MissingCoords);
}

TEST(ParsePage, MalformedXml) {
  EXPECT_THROW(parse_page_xml(std::string_view("<PcGts><Page>")), MalformedXml);
  EXPECT_THROW(parse_page_xml(std::string_view("<Other/>")), MalformedXml);
  EXPECT_THROW(parse_page_xml(std::string_view("<PcGts><Page/></PcGts>")),
               MalformedXml);
  EXPECT_THROW(parse_page_xml(std::string_view(
                   R"(<PcGts><Page imageWidth="9" imageHeight="9">
      <TextRegion id="r" custom="structure {type:Marginalia;}">
      <Coords points="0,0 1,x 2,2"/></TextRegion></Page></PcGts>)")),
               MalformedXml);
}

TEST(ParsePage, MissingFileIsIoError) {
  EXPECT_THROW(parse_page_file("/nonexistent/page.xml"), IoError);
}

TEST(ParsePage, NamespacePrefixesAreIgnored) {
  const auto parsed = parse_page_xml(std::string_view(
      R"(<pc:PcGts xmlns:pc="urn:x"><pc:Page imageWidth="10" imageHeight="10">
      <pc:TextRegion id="r" custom="structure {type:MainText_Title;}">
      <pc:Coords points="0,0 10,0 10,10"/></pc:TextRegion></pc:Page></pc:PcGts>)"));
  ASSERT_EQ(parsed.page.regions.size(), 1u);
  EXPECT_EQ(parsed.page.regions[0].region_class, RegionClass::MainText_Title);
}

TEST(ParsePage, OutOfBoundsIsAWarning) {
  const auto parsed = parse_page_xml(std::string_view(
      R"(<PcGts><Page imageWidth="10" imageHeight="10">
      <TextRegion id="r" custom="structure {type:MainText_Title;}">
      <Coords points="0,0 12,0 12,10"/></TextRegion></Page></PcGts>)"));
  ASSERT_EQ(parsed.report.warnings.size(), 1u);
  EXPECT_NE(parsed.report.warnings[0].find("outside"), std::string::npos);
}

TEST(ParsePage, RunningAliasAndSparseIndices) {
  const auto parsed = parse_page_file(test_data("shuffled_order.xml"));
  const Page& page = parsed.page;
  ASSERT_EQ(page.regions.size(), 2u);
  EXPECT_EQ(page.regions[1].region_class, RegionClass::Title_RunningTitle);
  // Indices 5 and 2 become ranks 1 and 0.
  EXPECT_EQ(page.regions[1].lines[0].reading_index, 1u);
  EXPECT_EQ(page.regions[1].lines[1].reading_index, 0u);
  EXPECT_EQ(parsed.report.region_order, OrderSource::Explicit);
  EXPECT_EQ(parsed.report.line_order, OrderSource::Explicit);
}

TEST(RegionClassNames, RoundTrip) {
  for (RegionClass cls : kAllRegionClasses) {
    EXPECT_EQ(parse_region_class(to_string(cls)), cls);
  }
  EXPECT_THROW(parse_region_class("maintext_colgreek"), UnknownRegionClass);
}

//===----------------------------------------------------------------------===//
// Serialization
//===----------------------------------------------------------------------===//

Page random_page(std::mt19937& rng) {
  std::uniform_int_distribution<int> n_regions(0, 5), n_lines(0, 4), coord(0, 900);
  std::uniform_int_distribution<std::size_t> cls(0, kAllRegionClasses.size() - 1);
  std::bernoulli_distribution coin(0.5);
  const std::vector<std::string> texts = {"ὁ λόγος", "a & b <c>", "\"quoted\" 'x'",
                                          "", "  lead", "Ἐν ἀρχῇ"};
  std::uniform_int_distribution<std::size_t> pick(0, texts.size() - 1);

  Page page;
  page.image_ref = coin(rng) ? "img&1.png" : "p.jpg";
  page.width = 1000;
  page.height = 1000.5;
  const int nr = n_regions(rng);
  std::vector<std::size_t> region_ranks(nr);
  std::iota(region_ranks.begin(), region_ranks.end(), 0);
  std::shuffle(region_ranks.begin(), region_ranks.end(), rng);
  for (int r = 0; r < nr; ++r) {
    TextRegion region;
    region.id = "r" + std::to_string(r);
    region.region_class = kAllRegionClasses[cls(rng)];
    const double x = coord(rng), y = coord(rng);
    region.polygon = Polygon({{x, y}, {x + 50.25, y}, {x + 25, y + 40}});
    region.reading_index = region_ranks[r];
    const int nl = n_lines(rng);
    std::vector<std::size_t> line_ranks(nl);
    std::iota(line_ranks.begin(), line_ranks.end(), 0);
    std::shuffle(line_ranks.begin(), line_ranks.end(), rng);
    for (int l = 0; l < nl; ++l) {
      TextLine line;
      line.id = region.id + "_l" + std::to_string(l);
      line.text = texts[pick(rng)];
      line.reading_index = line_ranks[l];
      if (coin(rng)) line.polygon = Polygon::rectangle(x, y, x + 10, y + 0.125);
      region.lines.push_back(std::move(line));
    }
    page.regions.push_back(std::move(region));
  }
  return page;
}

TEST(SerializePage, FixturesAreFixedPoints) {
  for (const char* name : {"minimal.xml", "eight_classes.xml", "shuffled_order.xml"}) {
    const Page first = parse_fixture(name);
    const Page second = parse_page_xml(serialize_page_xml(first)).page;
    EXPECT_EQ(second, first) << name;
    EXPECT_EQ(serialize_page_xml(second), serialize_page_xml(first)) << name;
  }
}

TEST(SerializePage, RandomPagesRoundTrip) {
  std::mt19937 rng(23);
  for (int i = 0; i < 200; ++i) {
    const Page page = random_page(rng);
    const auto reparsed = parse_page_xml(serialize_page_xml(page));
    ASSERT_EQ(reparsed.page, page) << serialize_page_xml(page);
    ASSERT_EQ(page_from_json(page_to_json(page)), page);
  }
}

TEST(PageJson, RejectsBadShapes) {
  EXPECT_THROW(page_from_json(nlohmann::json::object()), MalformedPageJson);
  auto j = page_to_json(parse_fixture("minimal.xml"));
  j["regions"][0]["class"] = "Nope";
  EXPECT_THROW(page_from_json(j), UnknownRegionClass);
  j["regions"][0]["class"] = "Marginalia";
  j["regions"][0]["polygon"] = nlohmann::json::array({{0, 0}, {1, 1}});
  EXPECT_THROW(page_from_json(j), InvalidPolygon);
}

//===----------------------------------------------------------------------===//
// filter_relevant / linearize
//===----------------------------------------------------------------------===//

TEST(FilterRelevant, KeepsGreekColumnAndTitle) {
  const Page page = parse_fixture("eight_classes.xml");
  const Page kept = filter_relevant(page);
  ASSERT_EQ(kept.regions.size(), 2u);
  EXPECT_EQ(kept.regions[0].region_class, RegionClass::MainText_Title);
  EXPECT_EQ(kept.regions[1].region_class, RegionClass::MainText_ColGreek);
  EXPECT_EQ(kept.regions[0], page.regions[1]);
  EXPECT_EQ(kept.regions[1], page.regions[2]);
  EXPECT_EQ(filter_relevant(kept), kept);
}

TEST(FilterRelevant, NothingRelevant) {
  Page page = parse_fixture("eight_classes.xml");
  std::erase_if(page.regions, [](const TextRegion& r) { return is_relevant(r.region_class); });
  EXPECT_TRUE(filter_relevant(page).regions.empty());
}

TEST(FilterRelevant, IdempotentOnRandomPages) {
  std::mt19937 rng(29);
  for (int i = 0; i < 200; ++i) {
    const Page once = filter_relevant(random_page(rng));
    ASSERT_EQ(filter_relevant(once), once);
  }
}

TEST(Linearize, RegionThenLineOrder) {
  Page page;
  for (int r = 0; r < 2; ++r) {
    TextRegion region;
    region.id = "r" + std::to_string(r);
    region.polygon = Polygon::rectangle(0, 0, 1, 1);
    region.reading_index = r;
    for (int l = 0; l < 2; ++l) {
      region.lines.push_back({"r" + std::to_string(r) + "l" + std::to_string(l),
                              std::nullopt, "t", static_cast<std::size_t>(l)});
    }
    page.regions.push_back(region);
  }
  const auto lines = linearize(page);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0].line_id, "r0l0");
  EXPECT_EQ(lines[1].line_id, "r0l1");
  EXPECT_EQ(lines[2].line_id, "r1l0");
  EXPECT_EQ(lines[3].line_id, "r1l1");
}

TEST(Linearize, EmptyPage) { EXPECT_TRUE(linearize(Page{}).empty()); }

TEST(Linearize, FollowsIndicesNotFileOrder) {
  const auto lines = linearize(parse_fixture("shuffled_order.xml"));
  std::vector<std::string> texts;
  for (const auto& l : lines) texts.push_back(l.text);
  EXPECT_EQ(texts, (std::vector<std::string>{"α", "β", "γ", "δ"}));
}

//===----------------------------------------------------------------------===//
// Polygons
//===----------------------------------------------------------------------===//

TEST(Polygon, Validation) {
  EXPECT_THROW(Polygon({{0, 0}, {1, 1}}), InvalidPolygon);
  EXPECT_THROW(Polygon({{0, 0}, {1, NAN}, {2, 2}}), InvalidPolygon);
  EXPECT_THROW(Polygon::from_points_attr("0,0 1;1 2,2"), InvalidPolygon);
  EXPECT_EQ(Polygon::from_points_attr(" 0,0  1,0\n1,1 ").vertices().size(), 3u);
}

TEST(Polygon, AreaIgnoresOrientation) {
  const Polygon ccw({{0, 0}, {2, 0}, {2, 3}, {0, 3}});
  const Polygon cw({{0, 0}, {0, 3}, {2, 3}, {2, 0}});
  EXPECT_DOUBLE_EQ(ccw.area(), 6);
  EXPECT_DOUBLE_EQ(cw.area(), 6);
}

TEST(PolygonIou, IdenticalSquares) {
  const auto sq = Polygon::rectangle(0, 0, 1, 1);
  EXPECT_DOUBLE_EQ(polygon_iou(sq, sq), 1.0);
}

TEST(PolygonIou, DisjointSquares) {
  EXPECT_DOUBLE_EQ(polygon_iou(Polygon::rectangle(0, 0, 1, 1),
                               Polygon::rectangle(2, 0, 3, 1)),
                   0.0);
}

TEST(PolygonIou, HalfShiftedSquare) {
  // overlap 0.5, union 1.5
  const auto a = Polygon::rectangle(0, 0, 1, 1);
  const auto b = Polygon::rectangle(0.5, 0, 1.5, 1);
  EXPECT_NEAR(polygon_iou(a, b), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(polygon_iou(b, a), 1.0 / 3.0, 1e-12);
}

TEST(PolygonIou, ConcaveShape) {
  // L-shape of area 3 covering the unit square at the origin corner.
  const Polygon ell({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  const auto square = Polygon::rectangle(0, 0, 2, 2);
  EXPECT_NEAR(polygon_iou(ell, square), 3.0 / 4.0, 1e-12);
  // The notch: intersection is empty even though bounding boxes overlap.
  const auto notch = Polygon::rectangle(1.2, 1.2, 2, 2);
  EXPECT_DOUBLE_EQ(polygon_iou(ell, notch), 0.0);
}

TEST(PolygonIou, Errors) {
  const Polygon flat({{0, 0}, {1, 0}, {2, 0}});
  const auto sq = Polygon::rectangle(0, 0, 1, 1);
  EXPECT_THROW(polygon_iou(flat, sq), DegeneratePolygon);
  EXPECT_THROW(polygon_iou(sq, flat), DegeneratePolygon);
  const Polygon bowtie({{0, 0}, {4, 4}, {4, 0}, {0, 2}});
  EXPECT_THROW(polygon_iou(bowtie, sq), InvalidPolygon);
}

bool inside(const Polygon& poly, double x, double y) {
  bool in = false;
  const auto& v = poly.vertices();
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > y) != (v[j].y > y) &&
        x < (v[j].x - v[i].x) * (y - v[i].y) / (v[j].y - v[i].y) + v[i].x) {
      in = !in;
    }
  }
  return in;
}

// Star-shaped around (cx, cy): simple, frequently concave.
Polygon random_star(std::mt19937& rng, double cx, double cy) {
  std::uniform_int_distribution<int> n(3, 9);
  std::uniform_real_distribution<double> radius(0.2, 1.0), jitter(0.0, 1.0);
  const int k = n(rng);
  std::vector<Point> pts;
  for (int i = 0; i < k; ++i) {
    const double angle = 2 * std::numbers::pi * (i + 0.8 * jitter(rng)) / k;
    const double r = radius(rng);
    pts.push_back({cx + r * std::cos(angle), cy + r * std::sin(angle)});
  }
  return Polygon(std::move(pts));
}

TEST(PolygonIou, MatchesRasterOracle) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> offset(-0.8, 0.8);
  constexpr int kGrid = 500;
  for (int trial = 0; trial < 40; ++trial) {
    const Polygon a = random_star(rng, 0, 0);
    const Polygon b = random_star(rng, offset(rng), offset(rng));
    std::size_t in_a = 0, in_b = 0, in_both = 0;
    for (int gx = 0; gx < kGrid; ++gx) {
      for (int gy = 0; gy < kGrid; ++gy) {
        const double x = -2 + 4.0 * (gx + 0.5) / kGrid;
        const double y = -2 + 4.0 * (gy + 0.5) / kGrid;
        const bool ia = inside(a, x, y), ib = inside(b, x, y);
        in_a += ia;
        in_b += ib;
        in_both += ia && ib;
      }
    }
    const double raster = static_cast<double>(in_both) /
                          static_cast<double>(in_a + in_b - in_both);
    const double exact = polygon_iou(a, b);
    EXPECT_NEAR(exact, raster, 0.02) << "trial " << trial;
    EXPECT_DOUBLE_EQ(exact, polygon_iou(b, a));
    EXPECT_NEAR(polygon_iou(a, a), 1.0, 1e-12);
  }
}

}  // namespace

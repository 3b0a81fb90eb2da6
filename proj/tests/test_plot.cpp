// Copyright 2026 The halypo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "test_util.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <regex>

namespace halypo {
namespace {

namespace pt = boost::property_tree;

bool well_formed(const std::string& xml) {
  std::istringstream in(xml);
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error&) {
    return false;
  }
  return tree.count("svg") == 1;
}

std::vector<std::string> polylines(const std::string& svg) {
  static const std::regex re("<polyline[^>]*points=\"([^\"]*)\"");
  std::vector<std::string> out;
  for (std::sregex_iterator it(svg.begin(), svg.end(), re), end; it != end; ++it) {
    out.push_back((*it)[1]);
  }
  return out;
}

std::vector<std::pair<double, double>> points(const std::string& attr) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(attr);
  std::string pair;
  while (in >> pair) {
    const auto comma = pair.find(',');
    out.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
  }
  return out;
}

TEST(Plot, TwoPointSeriesIsOnePolylineWithTwoPairs) {
  const std::string svg = plot::render_plot({{"V", {0, 1}, {1.0, 0.5}}});
  const auto lines = polylines(svg);
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(points(lines[0]).size(), 2u);
  EXPECT_TRUE(well_formed(svg));
}

TEST(Plot, LogScaleDropsNonPositivePoints) {
  plot::PlotOptions opt;
  opt.log_y = true;
  const std::string svg = plot::render_plot({{"V", {0, 1, 2, 3}, {1.0, 0.0, -2.0, 0.1}}}, opt);
  EXPECT_NE(svg.find("<!-- warning: dropped 2 "), std::string::npos);
  EXPECT_EQ(points(polylines(svg).at(0)).size(), 2u);
  EXPECT_TRUE(well_formed(svg));
}

TEST(Plot, BilinearGapPlotIsMonotone) {
  const auto g = make_bilinear_rotation_game();
  OptimizerConfig c;
  c.epsilon = 0.0;
  c.schedule = ConstantStep{0.1};
  const auto tr = run_trajectory(*g, JointParams(test::vec({1, 0}), g->layout()), c, 200);
  plot::Series s{"V", {}, {}};
  for (const auto& r : tr.records) {
    s.x.push_back(static_cast<double>(r.k));
    s.y.push_back(r.V);
  }
  for (bool log_y : {false, true}) {
    plot::PlotOptions opt;
    opt.log_y = log_y;
    const auto pts = points(polylines(plot::render_plot({s}, opt)).at(0));
    ASSERT_EQ(pts.size(), 200u);
    // SVG y grows downward, so a decreasing series has non-decreasing y
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      EXPECT_LE(pts[k].second, pts[k + 1].second);
      EXPECT_LT(pts[k].first, pts[k + 1].first);
    }
  }
}

TEST(Plot, LegendLabelsAndTitleAreEscaped) {
  plot::PlotOptions opt;
  opt.title = "gap <V> & \"friends\"";
  opt.x_label = "k";
  opt.y_label = "V & cos";
  const std::string svg =
      plot::render_plot({{"a<b", {0, 1}, {1, 2}}, {"c&d", {0, 1}, {2, 1}}}, opt);
  EXPECT_TRUE(well_formed(svg));
  EXPECT_EQ(polylines(svg).size(), 2u);
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
  EXPECT_NE(svg.find("c&amp;d"), std::string::npos);
  EXPECT_NE(svg.find("gap &lt;V&gt; &amp; &quot;friends&quot;"), std::string::npos);
}

TEST(Plot, RejectsEmptyAndShortInput) {
  EXPECT_THROW(plot::render_plot({}), Error);
  EXPECT_THROW(plot::render_plot({{"V", {0}, {1}}}), Error);
  EXPECT_THROW(plot::render_plot({{"V", {0, 1}, {1}}}), DimensionError);
}

TEST(Plot, ConstantSeriesStaysFinite) {
  const std::string svg = plot::render_plot({{"flat", {0, 1, 2}, {3, 3, 3}}});
  EXPECT_TRUE(well_formed(svg));
  EXPECT_EQ(svg.find("nan"), std::string::npos);
  EXPECT_EQ(svg.find("inf"), std::string::npos);
}

}  // namespace
}  // namespace halypo

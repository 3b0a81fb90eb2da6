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

// Minimal standalone SVG line charts for trajectory series.

#pragma once

#include "halypo/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace halypo::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "step";
  std::string y_label = "value";
  bool log_y = false;
  int width = 720;
  int height = 420;
};

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // control characters are not allowed in XML 1.0 text
        if (static_cast<unsigned char>(c) >= 0x20 || c == '\n' || c == '\t') out += c;
    }
  }
  return out;
}

namespace detail {

inline std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      const double w = lo == 0.0 ? 1.0 : std::abs(lo) * 0.5;
      lo -= w;
      hi += w;
    }
  }
};

inline const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace detail

// Renders every series as one polyline on shared axes. With log_y, points
// whose y is not strictly positive (or not finite) cannot be placed; they
// are dropped and the count is recorded in a comment near the top of the
// document.
inline std::string render_plot(const std::vector<Series>& series, const PlotOptions& opt = {}) {
  if (series.empty()) throw Error("render_plot: no series given");
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw DimensionError("render_plot: x and y lengths differ");
    if (s.x.size() < 2) throw Error("render_plot: series '" + s.label + "' has fewer than two points");
  }

  std::size_t dropped = 0;
  std::vector<std::vector<std::pair<double, double>>> kept(series.size());
  detail::Range xr, yr;
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t k = 0; k < series[i].x.size(); ++k) {
      const double x = series[i].x[k];
      double y = series[i].y[k];
      if (!std::isfinite(x) || !std::isfinite(y) || (opt.log_y && !(y > 0.0))) {
        ++dropped;
        continue;
      }
      if (opt.log_y) y = std::log10(y);
      kept[i].emplace_back(x, y);
      xr.add(x);
      yr.add(y);
    }
  }
  if (xr.lo > xr.hi) {
    xr = {0.0, 1.0};
    yr = {0.0, 1.0};
  }
  xr.pad();
  yr.pad();

  const double left = 80, right = 20, top = 40, bottom = 60;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) +
         "\" height=\"" + std::to_string(opt.height) + "\" viewBox=\"0 0 " +
         std::to_string(opt.width) + " " + std::to_string(opt.height) + "\">\n";
  if (dropped > 0) {
    out += "<!-- warning: dropped " + std::to_string(dropped) +
           (opt.log_y ? " non-positive or non-finite" : " non-finite") + " points -->\n";
  }
  out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(opt.width) + "\" height=\"" +
         std::to_string(opt.height) + "\" fill=\"white\"/>\n";
  if (!opt.title.empty()) {
    out += "<text x=\"" + detail::fmt(opt.width / 2.0) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           xml_escape(opt.title) + "</text>\n";
  }

  // axes and ticks
  out += "<g stroke=\"#333\" stroke-width=\"1\" fill=\"none\">\n";
  out += "<line x1=\"" + detail::fmt(left) + "\" y1=\"" + detail::fmt(top + ph) + "\" x2=\"" +
         detail::fmt(left + pw) + "\" y2=\"" + detail::fmt(top + ph) + "\"/>\n";
  out += "<line x1=\"" + detail::fmt(left) + "\" y1=\"" + detail::fmt(top) + "\" x2=\"" +
         detail::fmt(left) + "\" y2=\"" + detail::fmt(top + ph) + "\"/>\n";
  out += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double fx = xr.lo + (xr.hi - xr.lo) * t / ticks;
    const double fy = yr.lo + (yr.hi - yr.lo) * t / ticks;
    out += "<text x=\"" + detail::fmt(px(fx)) + "\" y=\"" + detail::fmt(top + ph + 16) +
           "\" text-anchor=\"middle\">" + detail::fmt(fx, "%.4g") + "</text>\n";
    const std::string ylabel = opt.log_y ? "1e" + detail::fmt(fy, "%.3g") : detail::fmt(fy, "%.4g");
    out += "<text x=\"" + detail::fmt(left - 6) + "\" y=\"" + detail::fmt(py(fy) + 4) +
           "\" text-anchor=\"end\">" + xml_escape(ylabel) + "</text>\n";
  }
  out += "<text x=\"" + detail::fmt(left + pw / 2) + "\" y=\"" + detail::fmt(opt.height - 16.0) +
         "\" text-anchor=\"middle\">" + xml_escape(opt.x_label) + "</text>\n";
  out += "<text x=\"18\" y=\"" + detail::fmt(top + ph / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " + detail::fmt(top + ph / 2) +
         ")\">" + xml_escape(opt.log_y ? opt.y_label + " (log scale)" : opt.y_label) +
         "</text>\n</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    if (kept[i].empty()) continue;
    const char* color = detail::kPalette[i % std::size(detail::kPalette)];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < kept[i].size(); ++k) {
      if (k) out += ' ';
      out += detail::fmt(px(kept[i][k].first)) + "," + detail::fmt(py(kept[i][k].second));
    }
    out += "\"/>\n";
  }

  // legend
  out += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = top + 10 + 16.0 * static_cast<double>(i);
    const double x = left + pw - 150;
    const char* color = detail::kPalette[i % std::size(detail::kPalette)];
    out += "<rect x=\"" + detail::fmt(x) + "\" y=\"" + detail::fmt(y - 8) +
           "\" width=\"12\" height=\"3\" fill=\"" + color + "\"/>\n";
    out += "<text x=\"" + detail::fmt(x + 18) + "\" y=\"" + detail::fmt(y) + "\">" +
           xml_escape(series[i].label) + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace halypo::plot

/*
 * Copyright 2026 The calibkit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "calibkit/svg.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "calibkit/report.h"

namespace calibkit {
namespace {

constexpr double kWidth = 680.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kTop = 50.0;
constexpr double kSide = 400.0;
constexpr double kLegendX = kLeft + kSide + 24.0;

constexpr std::array<const char*, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string px(double v) { return format_fixed(v, 2); }
double to_x(double conf) { return kLeft + conf * kSide; }
double to_y(double acc) { return kTop + (1.0 - acc) * kSide; }

std::string escape(std::string_view text) {
  std::string out;
  for (const char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string render_reliability_svg(std::span<const ReliabilityCurve> curves,
                                   const SvgAnnotations& annotations) {
  std::size_t max_count = 1;
  for (const auto& curve : curves) {
    for (const auto& bin : curve.bins) max_count = std::max(max_count, bin.count);
  }

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << px(kWidth) << "\" height=\"" << px(kHeight) << "\" viewBox=\"0 0 "
      << px(kWidth) << ' ' << px(kHeight) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << px(kWidth) << "\" height=\""
      << px(kHeight) << "\" fill=\"#ffffff\"/>\n";
  if (!annotations.title.empty()) {
    svg << "<text class=\"title\" x=\"" << px(kLeft + kSide / 2) << "\" y=\""
        << px(kTop - 18) << "\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"16\">" << escape(annotations.title) << "</text>\n";
  }

  // Frame, grid and ticks.
  svg << "<rect class=\"frame\" x=\"" << px(kLeft) << "\" y=\"" << px(kTop)
      << "\" width=\"" << px(kSide) << "\" height=\"" << px(kSide)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = t / 5.0;
    const std::string label = format_fixed(v, 1);
    svg << "<line class=\"grid\" x1=\"" << px(to_x(v)) << "\" y1=\"" << px(to_y(0))
        << "\" x2=\"" << px(to_x(v)) << "\" y2=\"" << px(to_y(1))
        << "\" stroke=\"#e5e5e5\" stroke-width=\"1\"/>\n"
        << "<line class=\"grid\" x1=\"" << px(to_x(0)) << "\" y1=\"" << px(to_y(v))
        << "\" x2=\"" << px(to_x(1)) << "\" y2=\"" << px(to_y(v))
        << "\" stroke=\"#e5e5e5\" stroke-width=\"1\"/>\n"
        << "<text class=\"tick\" x=\"" << px(to_x(v)) << "\" y=\"" << px(to_y(0) + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << label << "</text>\n"
        << "<text class=\"tick\" x=\"" << px(to_x(0) - 8) << "\" y=\""
        << px(to_y(v) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << label << "</text>\n";
  }
  svg << "<text class=\"axis-label\" x=\"" << px(kLeft + kSide / 2) << "\" y=\""
      << px(kTop + kSide + 40)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
         "Mean predicted probability</text>\n"
      << "<text class=\"axis-label\" x=\"" << px(kLeft - 45) << "\" y=\""
      << px(kTop + kSide / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " font-size=\"13\" transform=\"rotate(-90 " << px(kLeft - 45) << ' '
      << px(kTop + kSide / 2) << ")\">Empirical frequency</text>\n";

  svg << "<line class=\"diagonal\" x1=\"" << px(to_x(0)) << "\" y1=\"" << px(to_y(0))
      << "\" x2=\"" << px(to_x(1)) << "\" y2=\"" << px(to_y(1))
      << "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n";

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& curve = curves[k];
    const char* color = kPalette[k % kPalette.size()];
    std::ostringstream points;
    bool first = true;
    for (const auto& bin : curve.bins) {
      if (bin.count == 0) continue;
      if (!first) points << ' ';
      first = false;
      points << px(to_x(*bin.conf)) << ',' << px(to_y(*bin.acc));
    }
    svg << "<g class=\"curve\" data-scope=\"" << escape(curve.scope) << "\">\n"
        << "<polyline points=\"" << points.str() << "\" fill=\"none\" stroke=\""
        << color << "\" stroke-width=\"" << px(kSvgStrokeWidth) << "\"/>\n";
    for (const auto& bin : curve.bins) {
      if (bin.count == 0) continue;
      const double share = static_cast<double>(bin.count) / static_cast<double>(max_count);
      svg << "<circle cx=\"" << px(to_x(*bin.conf)) << "\" cy=\"" << px(to_y(*bin.acc))
          << "\" r=\"" << px(2.0 + 6.0 * std::sqrt(share)) << "\" fill=\"" << color
          << "\" fill-opacity=\"0.6\" data-count=\"" << bin.count << "\"/>\n";
    }
    svg << "</g>\n";
  }

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const double y = kTop + 14.0 + 22.0 * static_cast<double>(k);
    const char* color = kPalette[k % kPalette.size()];
    std::string label = curves[k].scope;
    std::string mcs_text;
    if (k < annotations.curves.size()) {
      if (!annotations.curves[k].label.empty()) label = annotations.curves[k].label;
      mcs_text = " (MCS " + format_fixed(annotations.curves[k].mcs, 4) + ")";
    }
    svg << "<g class=\"legend\">\n"
        << "<rect x=\"" << px(kLegendX) << "\" y=\"" << px(y - 9) << "\" width=\"12\""
        << " height=\"12\" fill=\"" << color << "\"/>\n"
        << "<text x=\"" << px(kLegendX + 18) << "\" y=\"" << px(y + 1)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(label)
        << escape(mcs_text) << "</text>\n"
        << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_rows_svg(std::span<const ReportRow> rows,
                            const std::string& title) {
  std::vector<ReliabilityCurve> curves;
  SvgAnnotations annotations;
  annotations.title = title;
  for (const auto& row : rows) {
    curves.push_back(row.pooled_curve);
    annotations.curves.push_back({row.method + " [" + row.evaluated_on + "]",
                                  row.scores.mcs});
  }
  return render_reliability_svg(curves, annotations);
}

}  // namespace calibkit

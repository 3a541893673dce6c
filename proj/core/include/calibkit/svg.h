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

#ifndef CALIBKIT_SVG_H_
#define CALIBKIT_SVG_H_

#include <span>
#include <string>
#include <vector>

#include "calibkit/metrics.h"
#include "calibkit/report.h"

namespace calibkit {

struct CurveAnnotation {
  std::string label;
  double mcs = 0.0;
};

struct SvgAnnotations {
  std::string title;
  std::vector<CurveAnnotation> curves;  // parallel to the curves; may be short
};

inline constexpr double kSvgStrokeWidth = 2.0;

// Reliability diagram: identity diagonal, one polyline per curve through its
// occupied bins at (conf, acc), marker area proportional to bin count, and a
// legend with each curve's MCS. Output is a pure function of the inputs.
std::string render_reliability_svg(std::span<const ReliabilityCurve> curves,
                                   const SvgAnnotations& annotations);

// Diagram of the pooled curves of `rows`, legend labelled by method with each
// row's weighted MCS.
std::string render_rows_svg(std::span<const ReportRow> rows,
                            const std::string& title);

}  // namespace calibkit

#endif  // CALIBKIT_SVG_H_

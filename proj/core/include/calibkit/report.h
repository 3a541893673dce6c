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

#ifndef CALIBKIT_REPORT_H_
#define CALIBKIT_REPORT_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "calibkit/metrics.h"
#include "calibkit/scaling.h"

namespace calibkit {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kAllScope = "All";
inline constexpr std::string_view kAlreadyPerfect = "n/a (already perfect)";

struct SubsetScores {
  std::vector<std::string> classes;
  std::optional<CalibrationScores> scores;  // absent for an empty subset

  friend bool operator==(const SubsetScores&, const SubsetScores&) = default;
};

struct SubsetSummary {
  std::size_t k = 0;
  double target_fraction = 0.5;
  double mass_fraction = 0.0;
  SubsetScores frequent;
  SubsetScores rare;

  friend bool operator==(const SubsetSummary&, const SubsetSummary&) = default;
};

// Best-in-scope flags: highest cmAP, lowest ECE, lowest |MCS|.
struct BestMarkers {
  bool cmap = false;
  bool ece = false;
  bool mcs = false;

  friend bool operator==(const BestMarkers&, const BestMarkers&) = default;
};

struct ReportRow {
  std::string model;
  std::string scope;         // dataset id or "All"
  std::string method;        // base, base_full, ts_global, ps_per_class, ...
  std::string evaluated_on;  // full | remainder
  std::size_t n_samples = 0;
  std::size_t n_classes = 0;
  std::optional<double> cmap;
  CalibrationScores scores;
  std::optional<SubsetSummary> subsets;
  std::vector<ClassMetrics> per_class;
  ReliabilityCurve pooled_curve;
  std::optional<ScalingParams> params;
  std::optional<double> relative_improvement_pct;
  std::string relative_improvement_note;
  std::optional<double> delta_mcs_vs_full;
  BestMarkers best;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct Report {
  int schema_version = kReportSchemaVersion;
  std::string tool_version;
  // Ordered key/value echo of the run configuration.
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<ReportRow> rows;

  friend bool operator==(const Report&, const Report&) = default;
};

// 100 * (|base| - |new|) / |base|. Absent when base_mcs == 0.
std::optional<double> relative_improvement(double base_mcs, double new_mcs);

// Sets the BestMarkers of each row against the other rows of its scope.
void mark_best(std::vector<ReportRow>& rows);

enum class ReportFormat { kJson, kCsv };
ReportFormat parse_report_format(std::string_view text);

std::string report_to_json(const Report& report);
Report report_from_json(std::string_view text);

// One line per row. Column order is fixed; see kReportCsvColumns.
std::string report_to_csv(const Report& report);
extern const std::vector<std::string_view> kReportCsvColumns;

// Throws ValidationError(kIo) when the path cannot be written.
void emit_report(const Report& report, ReportFormat format,
                 const std::filesystem::path& path);

// Fixed-point text with `decimals` digits; negative zero prints as zero.
std::string format_fixed(double value, int decimals);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace calibkit

#endif  // CALIBKIT_REPORT_H_

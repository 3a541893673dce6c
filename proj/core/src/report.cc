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

#include "calibkit/report.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "calibkit/error.h"
#include "json.hpp"

namespace calibkit {
namespace {

using ojson = nlohmann::ordered_json;

ojson optional_number(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

std::optional<double> read_optional(const ojson& node) {
  if (node.is_null()) return std::nullopt;
  return node.get<double>();
}

ojson scores_to_json(const CalibrationScores& s) {
  return ojson{{"scope", s.scope}, {"ece", s.ece}, {"mcs", s.mcs},
               {"ocs", s.ocs},     {"ucs", s.ucs}, {"weight", s.weight}};
}

CalibrationScores scores_from_json(const ojson& node) {
  CalibrationScores s;
  s.scope = node.at("scope").get<std::string>();
  s.ece = node.at("ece").get<double>();
  s.mcs = node.at("mcs").get<double>();
  s.ocs = node.at("ocs").get<double>();
  s.ucs = node.at("ucs").get<double>();
  s.weight = node.at("weight").get<double>();
  return s;
}

ojson subset_to_json(const SubsetScores& s) {
  return ojson{{"classes", s.classes},
               {"scores", s.scores ? scores_to_json(*s.scores) : ojson(nullptr)}};
}

SubsetScores subset_from_json(const ojson& node) {
  SubsetScores s;
  s.classes = node.at("classes").get<std::vector<std::string>>();
  if (!node.at("scores").is_null()) s.scores = scores_from_json(node.at("scores"));
  return s;
}

ojson curve_to_json(const ReliabilityCurve& curve) {
  ojson bins = ojson::array();
  for (const auto& b : curve.bins) {
    bins.push_back({{"index", b.index},
                    {"lower", b.lower},
                    {"upper", b.upper},
                    {"count", b.count},
                    {"conf", optional_number(b.conf)},
                    {"acc", optional_number(b.acc)}});
  }
  return ojson{{"scope", curve.scope}, {"n", curve.n}, {"bins", std::move(bins)}};
}

ReliabilityCurve curve_from_json(const ojson& node) {
  ReliabilityCurve curve;
  curve.scope = node.at("scope").get<std::string>();
  curve.n = node.at("n").get<std::size_t>();
  for (const auto& b : node.at("bins")) {
    BinStats bin;
    bin.index = b.at("index").get<int>();
    bin.lower = b.at("lower").get<double>();
    bin.upper = b.at("upper").get<double>();
    bin.count = b.at("count").get<std::size_t>();
    bin.conf = read_optional(b.at("conf"));
    bin.acc = read_optional(b.at("acc"));
    curve.bins.push_back(bin);
  }
  return curve;
}

ojson row_to_json(const ReportRow& row) {
  ojson out;
  out["model"] = row.model;
  out["scope"] = row.scope;
  out["method"] = row.method;
  out["evaluated_on"] = row.evaluated_on;
  out["n_samples"] = row.n_samples;
  out["n_classes"] = row.n_classes;
  out["cmap"] = optional_number(row.cmap);
  out["scores"] = scores_to_json(row.scores);
  if (row.subsets) {
    const auto& s = *row.subsets;
    out["subsets"] = {{"k", s.k},
                      {"target_fraction", s.target_fraction},
                      {"mass_fraction", s.mass_fraction},
                      {"frequent", subset_to_json(s.frequent)},
                      {"rare", subset_to_json(s.rare)}};
  } else {
    out["subsets"] = nullptr;
  }
  ojson per_class = ojson::array();
  for (const auto& m : row.per_class) {
    per_class.push_back({{"class", m.class_name},
                         {"index", m.class_index},
                         {"ap", optional_number(m.ap)},
                         {"n_pos", m.n_pos},
                         {"scores", scores_to_json(m.scores)}});
  }
  out["per_class"] = std::move(per_class);
  out["pooled_curve"] = curve_to_json(row.pooled_curve);
  out["params"] = row.params ? ojson::parse(params_to_json(*row.params))
                             : ojson(nullptr);
  out["relative_improvement_pct"] = optional_number(row.relative_improvement_pct);
  out["relative_improvement_note"] = row.relative_improvement_note;
  out["delta_mcs_vs_full"] = optional_number(row.delta_mcs_vs_full);
  out["best"] = {{"cmap", row.best.cmap}, {"ece", row.best.ece}, {"mcs", row.best.mcs}};
  return out;
}

ReportRow row_from_json(const ojson& node) {
  ReportRow row;
  row.model = node.at("model").get<std::string>();
  row.scope = node.at("scope").get<std::string>();
  row.method = node.at("method").get<std::string>();
  row.evaluated_on = node.at("evaluated_on").get<std::string>();
  row.n_samples = node.at("n_samples").get<std::size_t>();
  row.n_classes = node.at("n_classes").get<std::size_t>();
  row.cmap = read_optional(node.at("cmap"));
  row.scores = scores_from_json(node.at("scores"));
  if (!node.at("subsets").is_null()) {
    const auto& s = node.at("subsets");
    SubsetSummary summary;
    summary.k = s.at("k").get<std::size_t>();
    summary.target_fraction = s.at("target_fraction").get<double>();
    summary.mass_fraction = s.at("mass_fraction").get<double>();
    summary.frequent = subset_from_json(s.at("frequent"));
    summary.rare = subset_from_json(s.at("rare"));
    row.subsets = std::move(summary);
  }
  for (const auto& m : node.at("per_class")) {
    ClassMetrics metrics;
    metrics.class_name = m.at("class").get<std::string>();
    metrics.class_index = m.at("index").get<std::size_t>();
    metrics.ap = read_optional(m.at("ap"));
    metrics.n_pos = m.at("n_pos").get<std::size_t>();
    metrics.scores = scores_from_json(m.at("scores"));
    row.per_class.push_back(std::move(metrics));
  }
  row.pooled_curve = curve_from_json(node.at("pooled_curve"));
  if (!node.at("params").is_null()) {
    row.params = params_from_json(node.at("params").dump());
  }
  row.relative_improvement_pct = read_optional(node.at("relative_improvement_pct"));
  row.relative_improvement_note = node.at("relative_improvement_note").get<std::string>();
  row.delta_mcs_vs_full = read_optional(node.at("delta_mcs_vs_full"));
  const auto& best = node.at("best");
  row.best.cmap = best.at("cmap").get<bool>();
  row.best.ece = best.at("ece").get<bool>();
  row.best.mcs = best.at("mcs").get<bool>();
  return row;
}

std::string csv_number(const std::optional<double>& v) {
  return v ? format_fixed(*v, 4) : std::string();
}

}  // namespace

const std::vector<std::string_view> kReportCsvColumns = {
    "model",        "scope",        "method",        "evaluated_on",
    "n_samples",    "n_classes",    "cmap",          "ece",
    "mcs",          "ocs",          "ucs",           "weight",
    "frequent_k",   "frequent_mass", "frequent_ece", "frequent_mcs",
    "rare_ece",     "rare_mcs",     "rel_improvement_pct",
    "delta_mcs_vs_full", "best"};

std::optional<double> relative_improvement(double base_mcs, double new_mcs) {
  if (base_mcs == 0.0) return std::nullopt;
  const double base = std::abs(base_mcs);
  return 100.0 * (base - std::abs(new_mcs)) / base;
}

void mark_best(std::vector<ReportRow>& rows) {
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].best = {};
    groups[{rows[i].scope, rows[i].evaluated_on}].push_back(i);
  }
  for (const auto& [key, members] : groups) {
    std::optional<std::size_t> best_cmap, best_ece, best_mcs;
    for (const std::size_t i : members) {
      const auto& r = rows[i];
      if (r.cmap && (!best_cmap || *r.cmap > *rows[*best_cmap].cmap)) best_cmap = i;
      if (!best_ece || r.scores.ece < rows[*best_ece].scores.ece) best_ece = i;
      if (!best_mcs ||
          std::abs(r.scores.mcs) < std::abs(rows[*best_mcs].scores.mcs)) {
        best_mcs = i;
      }
    }
    if (best_cmap) rows[*best_cmap].best.cmap = true;
    if (best_ece) rows[*best_ece].best.ece = true;
    if (best_mcs) rows[*best_mcs].best.mcs = true;
  }
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::kJson;
  if (text == "csv") return ReportFormat::kCsv;
  throw ValidationError(ErrorKind::kInvalidArgument,
                        "unknown report format '" + std::string(text) + "'");
}

std::string report_to_json(const Report& report) {
  ojson doc;
  doc["schema"] = "calibkit.report";
  doc["schema_version"] = report.schema_version;
  doc["tool_version"] = report.tool_version;
  ojson config = ojson::array();
  for (const auto& [key, value] : report.config) {
    config.push_back({{"key", key}, {"value", value}});
  }
  doc["config"] = std::move(config);
  ojson rows = ojson::array();
  for (const auto& row : report.rows) rows.push_back(row_to_json(row));
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

Report report_from_json(std::string_view text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw ValidationError(ErrorKind::kParse, std::string("report: ") + e.what());
  }
  try {
    if (doc.value("schema", std::string()) != "calibkit.report") {
      throw ValidationError(ErrorKind::kParse, "not a calibkit report");
    }
    Report report;
    report.schema_version = doc.at("schema_version").get<int>();
    if (report.schema_version != kReportSchemaVersion) {
      throw ValidationError(ErrorKind::kParse, "unsupported report schema version " +
                                                   std::to_string(report.schema_version));
    }
    report.tool_version = doc.at("tool_version").get<std::string>();
    for (const auto& entry : doc.at("config")) {
      report.config.emplace_back(entry.at("key").get<std::string>(),
                                 entry.at("value").get<std::string>());
    }
    for (const auto& row : doc.at("rows")) report.rows.push_back(row_from_json(row));
    return report;
  } catch (const ojson::exception& e) {
    throw ValidationError(ErrorKind::kParse, std::string("report: ") + e.what());
  }
}

std::string report_to_csv(const Report& report) {
  std::ostringstream out;
  for (std::size_t k = 0; k < kReportCsvColumns.size(); ++k) {
    if (k) out << ',';
    out << kReportCsvColumns[k];
  }
  out << '\n';
  for (const auto& r : report.rows) {
    std::vector<std::string> cells;
    cells.push_back(r.model);
    cells.push_back(r.scope);
    cells.push_back(r.method);
    cells.push_back(r.evaluated_on);
    cells.push_back(std::to_string(r.n_samples));
    cells.push_back(std::to_string(r.n_classes));
    cells.push_back(csv_number(r.cmap));
    cells.push_back(format_fixed(r.scores.ece, 4));
    cells.push_back(format_fixed(r.scores.mcs, 4));
    cells.push_back(format_fixed(r.scores.ocs, 4));
    cells.push_back(format_fixed(r.scores.ucs, 4));
    cells.push_back(format_fixed(r.scores.weight, 4));
    if (r.subsets) {
      const auto& s = *r.subsets;
      const auto score = [](const SubsetScores& sub, double CalibrationScores::*f) {
        return sub.scores ? format_fixed((*sub.scores).*f, 4) : std::string();
      };
      cells.push_back(std::to_string(s.k));
      cells.push_back(format_fixed(s.mass_fraction, 4));
      cells.push_back(score(s.frequent, &CalibrationScores::ece));
      cells.push_back(score(s.frequent, &CalibrationScores::mcs));
      cells.push_back(score(s.rare, &CalibrationScores::ece));
      cells.push_back(score(s.rare, &CalibrationScores::mcs));
    } else {
      cells.insert(cells.end(), 6, std::string());
    }
    cells.push_back(r.relative_improvement_pct
                        ? format_fixed(*r.relative_improvement_pct, 4)
                        : r.relative_improvement_note);
    cells.push_back(csv_number(r.delta_mcs_vs_full));
    std::string best;
    for (const auto& [flag, name] : {std::pair{r.best.cmap, "cmap"},
                                     std::pair{r.best.ece, "ece"},
                                     std::pair{r.best.mcs, "mcs"}}) {
      if (!flag) continue;
      if (!best.empty()) best += '|';
      best += name;
    }
    cells.push_back(best);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out << ',';
      out << cells[k];
    }
    out << '\n';
  }
  return out.str();
}

void emit_report(const Report& report, ReportFormat format,
                 const std::filesystem::path& path) {
  write_text_file(path, format == ReportFormat::kJson ? report_to_json(report)
                                                      : report_to_csv(report));
}

std::string format_fixed(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
  std::string text(buffer);
  if (text.front() == '-' && text.find_first_not_of("-0.") == std::string::npos) {
    text.erase(0, 1);
  }
  return text;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError(ErrorKind::kIo, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ValidationError(ErrorKind::kIo, "write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace calibkit

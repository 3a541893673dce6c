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

#include "calibkit/dataset.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "calibkit/error.h"
#include "json.hpp"

namespace calibkit {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(ErrorKind kind, const std::string& message) {
  throw ValidationError(kind, message);
}

std::string location(const std::filesystem::path& file, std::size_t row,
                     std::string_view column) {
  std::ostringstream out;
  out << " (" << file.string() << ", row " << row;
  if (!column.empty()) out << ", class " << column;
  out << ")";
  return out.str();
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  for (auto& cell : cells) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) {
      cell.remove_prefix(1);
    }
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) {
      cell.remove_suffix(1);
    }
  }
  return cells;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

using CsvTable = PredictionTable;

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());

  std::string line;
  if (!read_line(in, line)) {
    fail(ErrorKind::kParse, path.string() + ": missing header row");
  }
  const auto header = split_csv_line(line);
  if (header.empty() || header.front() != "sample_id") {
    fail(ErrorKind::kParse,
         path.string() + ": header must start with 'sample_id'");
  }
  CsvTable table;
  std::unordered_set<std::string> seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    std::string name(header[c]);
    if (name.empty()) {
      fail(ErrorKind::kParse, path.string() + ": empty class name in header");
    }
    if (!seen.insert(name).second) {
      fail(ErrorKind::kDuplicateClass,
           path.string() + ": duplicate class name '" + name + "'");
    }
    table.classes.push_back(std::move(name));
  }
  if (table.classes.empty()) {
    fail(ErrorKind::kShapeMismatch, path.string() + ": no class columns");
  }

  const std::size_t num_classes = table.classes.size();
  std::vector<double> data;
  std::size_t row = 0;
  while (read_line(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != num_classes + 1) {
      std::ostringstream msg;
      msg << "shape mismatch: expected " << num_classes + 1 << " cells, got "
          << cells.size() << location(path, row, "");
      fail(ErrorKind::kShapeMismatch, msg.str());
    }
    table.sample_ids.emplace_back(cells[0]);
    for (std::size_t c = 0; c < num_classes; ++c) {
      const auto value = parse_double(cells[c + 1]);
      if (!value) {
        fail(ErrorKind::kParse, "unparseable value '" +
                                    std::string(cells[c + 1]) + "'" +
                                    location(path, row, table.classes[c]));
      }
      if (!std::isfinite(*value)) {
        fail(ErrorKind::kNonFinite,
             "non-finite value" + location(path, row, table.classes[c]));
      }
      data.push_back(*value);
    }
  }
  table.values = Matrix<double>(row, num_classes);
  std::copy(data.begin(), data.end(), table.values.values().begin());
  return table;
}

std::vector<SampleMeta> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
  if (!doc.is_array()) {
    fail(ErrorKind::kParse, path.string() + ": manifest must be a JSON array");
  }
  std::vector<SampleMeta> meta;
  meta.reserve(doc.size());
  std::size_t row = 0;
  for (const auto& entry : doc) {
    ++row;
    const auto where = location(path, row, "");
    if (!entry.is_object()) {
      fail(ErrorKind::kParse, "manifest entry is not an object" + where);
    }
    SampleMeta m;
    for (const char* key : {"sample_id", "dataset_id"}) {
      if (!entry.contains(key) || !entry[key].is_string()) {
        fail(ErrorKind::kParse,
             std::string("missing string field '") + key + "'" + where);
      }
    }
    for (const char* key : {"start_s", "duration_s"}) {
      if (!entry.contains(key) || !entry[key].is_number()) {
        fail(ErrorKind::kParse,
             std::string("missing numeric field '") + key + "'" + where);
      }
    }
    m.sample_id = entry["sample_id"].get<std::string>();
    m.dataset_id = entry["dataset_id"].get<std::string>();
    m.start_s = entry["start_s"].get<double>();
    m.duration_s = entry["duration_s"].get<double>();
    meta.push_back(std::move(m));
  }
  return meta;
}

void validate_meta(std::span<const SampleMeta> meta) {
  std::set<std::pair<std::string_view, std::string_view>> ids;
  for (std::size_t i = 0; i < meta.size(); ++i) {
    const auto& m = meta[i];
    if (!(std::isfinite(m.duration_s) && m.duration_s > 0.0)) {
      std::ostringstream msg;
      msg << "duration_s must be > 0 (sample " << m.sample_id << ")";
      fail(ErrorKind::kOutOfRange, msg.str());
    }
    if (!(std::isfinite(m.start_s) && m.start_s >= 0.0)) {
      std::ostringstream msg;
      msg << "start_s must be >= 0 (sample " << m.sample_id << ")";
      fail(ErrorKind::kOutOfRange, msg.str());
    }
    if (!ids.emplace(m.dataset_id, m.sample_id).second) {
      fail(ErrorKind::kDuplicateSampleId, "duplicate sample_id '" +
                                              m.sample_id + "' in dataset '" +
                                              m.dataset_id + "'");
    }
  }
}

}  // namespace

ConfidenceMatrix::ConfidenceMatrix(Matrix<double> values)
    : values_(std::move(values)) {
  for (std::size_t r = 0; r < values_.rows(); ++r) {
    for (std::size_t c = 0; c < values_.cols(); ++c) {
      const double v = values_(r, c);
      if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream msg;
        msg << "confidence outside [0, 1] at row " << r + 1 << ", column "
            << c + 1 << ": " << v;
        fail(ErrorKind::kOutOfRange, msg.str());
      }
    }
  }
}

EvalDataset::EvalDataset(std::vector<std::string> classes,
                         Matrix<double> logits, LabelMatrix labels,
                         std::vector<SampleMeta> meta,
                         std::optional<Matrix<double>> source_probabilities)
    : classes_(std::move(classes)),
      logits_(std::move(logits)),
      labels_(std::move(labels)),
      meta_(std::move(meta)),
      source_probabilities_(std::move(source_probabilities)) {
  if (logits_.cols() != classes_.size()) {
    fail(ErrorKind::kShapeMismatch, "logit columns do not match class count");
  }
  if (labels_.rows() != logits_.rows() || labels_.cols() != logits_.cols()) {
    fail(ErrorKind::kShapeMismatch, "labels and logits differ in shape");
  }
  if (meta_.size() != logits_.rows()) {
    fail(ErrorKind::kShapeMismatch, "manifest rows do not match sample count");
  }
  std::unordered_set<std::string_view> names;
  for (const auto& name : classes_) {
    if (!names.insert(name).second) {
      fail(ErrorKind::kDuplicateClass, "duplicate class name '" + name + "'");
    }
  }
  for (std::size_t r = 0; r < logits_.rows(); ++r) {
    for (std::size_t c = 0; c < logits_.cols(); ++c) {
      if (!std::isfinite(logits_(r, c))) {
        fail(ErrorKind::kNonFinite,
             "non-finite logit (row " + std::to_string(r + 1) + ", class " +
                 classes_[c] + ")");
      }
      if (labels_(r, c) > 1) {
        fail(ErrorKind::kNonBinaryLabel,
             "non-binary label (row " + std::to_string(r + 1) + ", class " +
                 classes_[c] + ")");
      }
    }
  }
  if (source_probabilities_) {
    if (source_probabilities_->rows() != logits_.rows() ||
        source_probabilities_->cols() != logits_.cols()) {
      fail(ErrorKind::kShapeMismatch,
           "source probabilities differ in shape from logits");
    }
    ConfidenceMatrix check(*source_probabilities_);
  }
  validate_meta(meta_);
}

std::string EvalDataset::dataset_id() const {
  return meta_.empty() ? std::string() : meta_.front().dataset_id;
}

ConfidenceMatrix EvalDataset::base_confidences() const {
  if (source_probabilities_) return ConfidenceMatrix(*source_probabilities_);
  Matrix<double> probs(logits_.rows(), logits_.cols());
  const auto in = logits_.values();
  auto out = probs.values();
  for (std::size_t k = 0; k < in.size(); ++k) out[k] = sigmoid(in[k]);
  return ConfidenceMatrix(std::move(probs));
}

EvalDataset EvalDataset::subset(std::span<const std::size_t> rows) const {
  std::vector<SampleMeta> meta;
  meta.reserve(rows.size());
  for (const std::size_t r : rows) {
    if (r >= num_samples()) {
      fail(ErrorKind::kInvalidArgument, "row index out of range");
    }
    meta.push_back(meta_[r]);
  }
  std::optional<Matrix<double>> source;
  if (source_probabilities_) source = source_probabilities_->select_rows(rows);
  return EvalDataset(classes_, logits_.select_rows(rows),
                     labels_.select_rows(rows), std::move(meta),
                     std::move(source));
}

EvalDataset load_dataset(const std::filesystem::path& predictions_path,
                         const std::filesystem::path& labels_path,
                         const std::filesystem::path& manifest_path,
                         const LoadOptions& options) {
  if (!(options.eps > 0.0 && options.eps < 0.5)) {
    fail(ErrorKind::kInvalidArgument, "eps must lie in (0, 0.5)");
  }
  CsvTable predictions = read_csv_table(predictions_path);
  const CsvTable label_table = read_csv_table(labels_path);
  const std::vector<SampleMeta> manifest = read_manifest(manifest_path);

  if (label_table.classes != predictions.classes) {
    fail(ErrorKind::kClassMismatch,
         labels_path.string() + ": class header differs from " +
             predictions_path.string());
  }
  const std::size_t n = predictions.sample_ids.size();
  const std::size_t c = predictions.classes.size();
  if (label_table.sample_ids.size() != n) {
    std::ostringstream msg;
    msg << "shape mismatch: " << predictions_path.string() << " has " << n
        << " rows, " << labels_path.string() << " has "
        << label_table.sample_ids.size();
    fail(ErrorKind::kShapeMismatch, msg.str());
  }

  std::unordered_map<std::string_view, std::size_t> manifest_index;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    manifest_index.emplace(manifest[i].sample_id, i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& id = predictions.sample_ids[i];
    if (label_table.sample_ids[i] != id) {
      fail(ErrorKind::kSampleOrderMismatch,
           "sample_id '" + label_table.sample_ids[i] + "' does not match '" +
               id + "'" + location(labels_path, i + 1, ""));
    }
    if (!manifest_index.contains(id)) {
      fail(ErrorKind::kUnknownSampleId,
           "unknown sample_id '" + id + "'" +
               location(predictions_path, i + 1, ""));
    }
  }
  if (manifest.size() != n) {
    std::ostringstream msg;
    msg << "shape mismatch: " << manifest_path.string() << " has "
        << manifest.size() << " entries, expected " << n;
    fail(ErrorKind::kShapeMismatch, msg.str());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (manifest[i].sample_id != predictions.sample_ids[i]) {
      fail(ErrorKind::kSampleOrderMismatch,
           "manifest order differs from predictions at sample_id '" +
               predictions.sample_ids[i] + "'" +
               location(manifest_path, i + 1, ""));
    }
  }

  LabelMatrix labels(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double v = label_table.values(i, j);
      if (v != 0.0 && v != 1.0) {
        fail(ErrorKind::kNonBinaryLabel,
             "non-binary label (row " + std::to_string(i + 1) + ", class " +
                 predictions.classes[j] + ") in " + labels_path.string());
      }
      labels(i, j) = v == 1.0 ? 1 : 0;
    }
  }

  std::optional<Matrix<double>> source;
  if (options.inputs_are_probabilities) {
    Matrix<double> logits(n, c);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const double p = predictions.values(i, j);
        if (!(p >= 0.0 && p <= 1.0)) {
          fail(ErrorKind::kOutOfRange,
               "probability outside [0, 1]" +
                   location(predictions_path, i + 1, predictions.classes[j]));
        }
        logits(i, j) = inverse_sigmoid(p, options.eps);
      }
    }
    source = std::move(predictions.values);
    predictions.values = std::move(logits);
  }
  return EvalDataset(std::move(predictions.classes),
                     std::move(predictions.values), std::move(labels),
                     manifest, std::move(source));
}

PredictionTable read_prediction_table(const std::filesystem::path& path) {
  return read_csv_table(path);
}

std::vector<std::size_t> pos_counts(const EvalDataset& dataset) {
  std::vector<std::size_t> counts(dataset.num_classes(), 0);
  const auto& labels = dataset.labels();
  for (std::size_t r = 0; r < labels.rows(); ++r) {
    const auto row = labels.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) counts[c] += row[c];
  }
  return counts;
}

std::vector<EvalDataset> partition_by_dataset(const EvalDataset& dataset) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < dataset.num_samples(); ++i) {
    const auto& id = dataset.meta()[i].dataset_id;
    auto [it, inserted] = rows.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.push_back(i);
  }
  std::vector<EvalDataset> parts;
  parts.reserve(order.size());
  for (const auto& id : order) parts.push_back(dataset.subset(rows[id]));
  return parts;
}

std::string format_round_trip(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  return out;
}

void write_header(std::ostream& out, std::span<const std::string> classes) {
  out << "sample_id";
  for (const auto& name : classes) out << ',' << name;
  out << '\n';
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& path,
                      std::span<const std::string> classes,
                      std::span<const SampleMeta> meta,
                      const Matrix<double>& values) {
  auto out = open_for_write(path);
  write_header(out, classes);
  for (std::size_t r = 0; r < values.rows(); ++r) {
    out << meta[r].sample_id;
    for (const double v : values.row(r)) out << ',' << format_round_trip(v);
    out << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "write failed: " + path.string());
}

void write_matrix_csv(const std::filesystem::path& path,
                      std::span<const std::string> classes,
                      std::span<const std::string> sample_ids,
                      const Matrix<double>& values) {
  auto out = open_for_write(path);
  write_header(out, classes);
  for (std::size_t r = 0; r < values.rows(); ++r) {
    out << sample_ids[r];
    for (const double v : values.row(r)) out << ',' << format_round_trip(v);
    out << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "write failed: " + path.string());
}

void write_labels_csv(const std::filesystem::path& path,
                      std::span<const std::string> classes,
                      std::span<const SampleMeta> meta,
                      const LabelMatrix& labels) {
  auto out = open_for_write(path);
  write_header(out, classes);
  for (std::size_t r = 0; r < labels.rows(); ++r) {
    out << meta[r].sample_id;
    for (const auto v : labels.row(r)) out << ',' << (v ? '1' : '0');
    out << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "write failed: " + path.string());
}

void write_manifest_json(const std::filesystem::path& path,
                         std::span<const SampleMeta> meta) {
  json doc = json::array();
  for (const auto& m : meta) {
    doc.push_back({{"sample_id", m.sample_id},
                   {"dataset_id", m.dataset_id},
                   {"start_s", m.start_s},
                   {"duration_s", m.duration_s}});
  }
  auto out = open_for_write(path);
  out << doc.dump(1) << '\n';
  if (!out) fail(ErrorKind::kIo, "write failed: " + path.string());
}

}  // namespace calibkit

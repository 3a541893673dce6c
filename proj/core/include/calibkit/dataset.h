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

#ifndef CALIBKIT_DATASET_H_
#define CALIBKIT_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calibkit/matrix.h"
#include "calibkit/sigmoid.h"

namespace calibkit {

using LabelMatrix = Matrix<std::uint8_t>;

struct SampleMeta {
  std::string sample_id;
  std::string dataset_id;
  double start_s = 0.0;
  double duration_s = 0.0;

  friend bool operator==(const SampleMeta&, const SampleMeta&) = default;
};

// Predicted probabilities, every entry in [0, 1].
class ConfidenceMatrix {
 public:
  ConfidenceMatrix() = default;
  // Throws ValidationError if any entry is outside [0, 1] or NaN.
  explicit ConfidenceMatrix(Matrix<double> values);

  const Matrix<double>& values() const noexcept { return values_; }
  std::size_t rows() const noexcept { return values_.rows(); }
  std::size_t cols() const noexcept { return values_.cols(); }
  double operator()(std::size_t r, std::size_t c) const { return values_(r, c); }

  friend bool operator==(const ConfidenceMatrix&,
                         const ConfidenceMatrix&) = default;

 private:
  Matrix<double> values_;
};

// Aligned logits, binary labels, class names and per-sample manifest rows.
// Immutable once constructed; every constructor path validates.
class EvalDataset {
 public:
  // Throws ValidationError on any violated invariant. `source_probabilities`
  // holds the probabilities the logits were recovered from, when the inputs
  // were probabilities; base confidences then come from it verbatim.
  EvalDataset(std::vector<std::string> classes, Matrix<double> logits,
              LabelMatrix labels, std::vector<SampleMeta> meta,
              std::optional<Matrix<double>> source_probabilities = std::nullopt);

  std::size_t num_samples() const noexcept { return logits_.rows(); }
  std::size_t num_classes() const noexcept { return logits_.cols(); }

  const std::vector<std::string>& classes() const noexcept { return classes_; }
  const Matrix<double>& logits() const noexcept { return logits_; }
  const LabelMatrix& labels() const noexcept { return labels_; }
  const std::vector<SampleMeta>& meta() const noexcept { return meta_; }
  const std::optional<Matrix<double>>& source_probabilities() const noexcept {
    return source_probabilities_;
  }

  // dataset_id of the first sample; empty for a dataset with no rows.
  std::string dataset_id() const;

  // Uncalibrated confidences: the source probabilities when present,
  // otherwise sigmoid of the logits.
  ConfidenceMatrix base_confidences() const;

  // Rows in the given order. Throws ValidationError for an out-of-range index.
  EvalDataset subset(std::span<const std::size_t> rows) const;

  friend bool operator==(const EvalDataset&, const EvalDataset&) = default;

 private:
  std::vector<std::string> classes_;
  Matrix<double> logits_;
  LabelMatrix labels_;
  std::vector<SampleMeta> meta_;
  std::optional<Matrix<double>> source_probabilities_;
};

struct LoadOptions {
  bool inputs_are_probabilities = false;
  double eps = kDefaultProbabilityEps;
};

// Reads a predictions CSV, a labels CSV and a JSON manifest. See README for
// the file formats. Throws ValidationError naming the file, row and column of
// the first problem found.
EvalDataset load_dataset(const std::filesystem::path& predictions_path,
                         const std::filesystem::path& labels_path,
                         const std::filesystem::path& manifest_path,
                         const LoadOptions& options = {});

// A sample_id-keyed value CSV without labels or manifest, as consumed when
// applying fitted parameters to new predictions.
struct PredictionTable {
  std::vector<std::string> classes;
  std::vector<std::string> sample_ids;
  Matrix<double> values;
};
PredictionTable read_prediction_table(const std::filesystem::path& path);

// Column sums of the label matrix.
std::vector<std::size_t> pos_counts(const EvalDataset& dataset);

// Splits by dataset_id, preserving first-appearance order of ids and the row
// order within each id.
std::vector<EvalDataset> partition_by_dataset(const EvalDataset& dataset);

// Writes `sample_id,<classes...>` followed by one row per sample, values in
// shortest round-trip decimal form.
void write_matrix_csv(const std::filesystem::path& path,
                      std::span<const std::string> classes,
                      std::span<const SampleMeta> meta,
                      const Matrix<double>& values);
void write_matrix_csv(const std::filesystem::path& path,
                      std::span<const std::string> classes,
                      std::span<const std::string> sample_ids,
                      const Matrix<double>& values);
void write_labels_csv(const std::filesystem::path& path,
                      std::span<const std::string> classes,
                      std::span<const SampleMeta> meta,
                      const LabelMatrix& labels);
void write_manifest_json(const std::filesystem::path& path,
                         std::span<const SampleMeta> meta);

// Shortest decimal text that parses back to exactly `value`.
std::string format_round_trip(double value);

}  // namespace calibkit

#endif  // CALIBKIT_DATASET_H_

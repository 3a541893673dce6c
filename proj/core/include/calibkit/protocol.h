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

#ifndef CALIBKIT_PROTOCOL_H_
#define CALIBKIT_PROTOCOL_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "calibkit/dataset.h"
#include "calibkit/metrics.h"
#include "calibkit/report.h"
#include "calibkit/scaling.h"

namespace calibkit {

inline constexpr double kDefaultTargetFraction = 0.5;

struct SplitSpec {
  enum class Kind { kHeldOutDataset, kFirstMinutes };

  Kind kind = Kind::kFirstMinutes;
  double minutes = 10.0;
  std::string calibration_dataset;

  static SplitSpec first_minutes(double minutes);
  static SplitSpec held_out(std::string dataset_id);

  // Throws ValidationError for minutes <= 0 or an empty dataset id.
  void validate() const;
  std::string describe() const;
};

struct SplitIndices {
  std::vector<std::size_t> calibration;
  std::vector<std::size_t> evaluation;
};

// Within each dataset_id, orders samples by (start_s, sample_id) and assigns
// a sample to calibration while the duration accumulated before it is below
// minutes * 60 s. Both index lists come back sorted ascending.
SplitIndices split_first_minutes(const EvalDataset& dataset, double minutes);

struct SubsetAssignment {
  std::vector<std::size_t> frequent;  // class indices, most positives first
  std::vector<std::size_t> rare;      // remaining classes with positives
  std::size_t k = 0;
  double mass_fraction = 0.0;
};

// Smallest prefix of classes, sorted by positive count descending (ties by
// class name), covering at least target_fraction of all positives.
SubsetAssignment frequent_rare_split(std::span<const std::size_t> counts,
                                     std::span<const std::string> class_names,
                                     double target_fraction =
                                         kDefaultTargetFraction);

struct MethodSpec {
  ScalingMethod method = ScalingMethod::kPlatt;
  ScalingScope scope = ScalingScope::kGlobal;

  // ts_global, ts_per_class, ps_global, ps_per_class
  std::string name() const;
};

struct BenchmarkOptions {
  std::string model = "model";
  int num_bins = kDefaultBins;
  double target_fraction = kDefaultTargetFraction;
  std::optional<SplitSpec> split;
  std::vector<MethodSpec> methods;
  AdamConfig adam;
  bool per_class_table = false;
  // Held-out calibration data from outside `datasets`. When unset, the
  // held-out split looks the calibration dataset up by id in `datasets`.
  std::optional<EvalDataset> calibration_dataset;
};

struct FittedParams {
  std::string dataset_id;  // dataset the parameters are meant for
  ScalingParams params;
};

struct BenchmarkResult {
  std::vector<ReportRow> rows;
  std::vector<FittedParams> fitted;
};

// Evaluates every dataset and the pooled "All" scope. With a split and
// methods, fits each method on the calibration side and evaluates on the
// evaluation side next to Base rows. Every dataset must carry a single
// dataset_id.
BenchmarkResult run_benchmark(std::span<const EvalDataset> datasets,
                              const BenchmarkOptions& options);

}  // namespace calibkit

#endif  // CALIBKIT_PROTOCOL_H_

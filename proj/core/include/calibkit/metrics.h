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

#ifndef CALIBKIT_METRICS_H_
#define CALIBKIT_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calibkit/dataset.h"

namespace calibkit {

inline constexpr int kDefaultBins = 15;

// One equal-width confidence bin. Bins are numbered 1..M; bin m covers
// [(m-1)/M, m/M), the last bin is closed at 1. `conf` and `acc` are absent
// for an empty bin.
struct BinStats {
  int index = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  std::optional<double> conf;
  std::optional<double> acc;

  friend bool operator==(const BinStats&, const BinStats&) = default;
};

struct ReliabilityCurve {
  std::vector<BinStats> bins;
  std::size_t n = 0;
  std::string scope;

  friend bool operator==(const ReliabilityCurve&,
                         const ReliabilityCurve&) = default;
};

// ece = ocs + ucs and mcs = ocs - ucs. `weight` is the positive-label mass
// behind the scope.
struct CalibrationScores {
  double ece = 0.0;
  double mcs = 0.0;
  double ocs = 0.0;
  double ucs = 0.0;
  std::string scope;
  double weight = 0.0;

  friend bool operator==(const CalibrationScores&,
                         const CalibrationScores&) = default;
};

struct ClassMetrics {
  std::string class_name;
  std::size_t class_index = 0;
  std::optional<double> ap;  // absent iff n_pos == 0
  CalibrationScores scores;
  std::size_t n_pos = 0;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

// Mean of precision@rank over the positives, ranking by score descending
// with ties kept in index order. Absent when there are no positives.
std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const std::uint8_t> labels);

// Macro-average AP over classes with at least one positive.
double cmap(const EvalDataset& dataset, const ConfidenceMatrix& probs);

// Index (0-based) of the equal-width bin holding `confidence`.
std::size_t bin_index(double confidence, int num_bins);

ReliabilityCurve bin_class(std::span<const double> confidences,
                           std::span<const std::uint8_t> labels, int num_bins,
                           std::string scope = {});

CalibrationScores calibration_scores(const ReliabilityCurve& curve);

// One-vs-rest scores per class; `scores.weight` is the class's positive count.
std::vector<ClassMetrics> per_class_scores(const EvalDataset& dataset,
                                           const ConfidenceMatrix& probs,
                                           int num_bins);

// Positive-count weighted mean of per-class scores.
CalibrationScores aggregate_multilabel(std::span<const ClassMetrics> per_class,
                                       std::string scope = {});

// Bins every (sample, class) pair together, in row-major order.
ReliabilityCurve pooled_reliability(const EvalDataset& dataset,
                                    const ConfidenceMatrix& probs,
                                    int num_bins, std::string scope = "pooled");

// Rebuilds ECE and MCS from an (OCS, UCS) pair.
CalibrationScores compose_scores(double ocs, double ucs);

bool satisfies_identities(const CalibrationScores& scores, double tolerance);

}  // namespace calibkit

#endif  // CALIBKIT_METRICS_H_

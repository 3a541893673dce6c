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

#include "calibkit/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "calibkit/error.h"

namespace calibkit {
namespace {

void check_shapes(const EvalDataset& dataset, const ConfidenceMatrix& probs) {
  if (probs.rows() != dataset.num_samples() ||
      probs.cols() != dataset.num_classes()) {
    throw ValidationError(ErrorKind::kShapeMismatch,
                          "confidence matrix does not match dataset shape");
  }
}

void check_bins(int num_bins) {
  if (num_bins < 1) {
    throw ValidationError(ErrorKind::kInvalidArgument,
                          "number of bins must be >= 1");
  }
}

double bin_edge(std::size_t m, int num_bins) {
  return static_cast<double>(m) / static_cast<double>(num_bins);
}

}  // namespace

std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw ValidationError(ErrorKind::kShapeMismatch,
                          "scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t rank = 1; rank <= order.size(); ++rank) {
    if (labels[order[rank - 1]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

double cmap(const EvalDataset& dataset, const ConfidenceMatrix& probs) {
  check_shapes(dataset, probs);
  double sum = 0.0;
  std::size_t defined = 0;
  for (std::size_t c = 0; c < dataset.num_classes(); ++c) {
    const auto scores = probs.values().column(c);
    const auto labels = dataset.labels().column(c);
    if (const auto ap = average_precision(scores, labels)) {
      sum += *ap;
      ++defined;
    }
  }
  if (defined == 0) {
    throw ValidationError(ErrorKind::kUndefined,
                          "cmAP undefined: no class has a positive label");
  }
  return sum / static_cast<double>(defined);
}

std::size_t bin_index(double confidence, int num_bins) {
  const auto last = static_cast<std::size_t>(num_bins - 1);
  const double scaled = std::floor(confidence * num_bins);
  std::size_t m = scaled <= 0.0 ? 0 : std::min(static_cast<std::size_t>(scaled), last);
  // Settle rounding at the edges so membership agrees with m/M comparisons.
  while (m > 0 && confidence < bin_edge(m, num_bins)) --m;
  while (m < last && confidence >= bin_edge(m + 1, num_bins)) ++m;
  return m;
}

ReliabilityCurve bin_class(std::span<const double> confidences,
                           std::span<const std::uint8_t> labels, int num_bins,
                           std::string scope) {
  check_bins(num_bins);
  if (confidences.size() != labels.size()) {
    throw ValidationError(ErrorKind::kShapeMismatch,
                          "confidences and labels differ in length");
  }
  const auto m_count = static_cast<std::size_t>(num_bins);
  std::vector<double> conf_sum(m_count, 0.0);
  std::vector<std::size_t> pos(m_count, 0);
  std::vector<std::size_t> count(m_count, 0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double p = confidences[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "confidence outside [0, 1]: " << p;
      throw ValidationError(ErrorKind::kOutOfRange, msg.str());
    }
    const std::size_t m = bin_index(p, num_bins);
    conf_sum[m] += p;
    pos[m] += labels[i];
    ++count[m];
  }

  ReliabilityCurve curve;
  curve.n = confidences.size();
  curve.scope = std::move(scope);
  curve.bins.reserve(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    BinStats bin;
    bin.index = static_cast<int>(m + 1);
    bin.lower = bin_edge(m, num_bins);
    bin.upper = bin_edge(m + 1, num_bins);
    bin.count = count[m];
    if (count[m] > 0) {
      const auto n = static_cast<double>(count[m]);
      bin.conf = conf_sum[m] / n;
      bin.acc = static_cast<double>(pos[m]) / n;
    }
    curve.bins.push_back(bin);
  }
  return curve;
}

CalibrationScores calibration_scores(const ReliabilityCurve& curve) {
  if (curve.n == 0) {
    throw ValidationError(ErrorKind::kUndefined, "empty scope");
  }
  CalibrationScores scores;
  scores.scope = curve.scope;
  const auto n = static_cast<double>(curve.n);
  for (const auto& bin : curve.bins) {
    if (bin.count == 0) continue;
    const double share = static_cast<double>(bin.count) / n;
    const double gap = *bin.conf - *bin.acc;
    scores.ece += share * std::abs(gap);
    scores.mcs += share * gap;
    scores.ocs += share * std::max(gap, 0.0);
    scores.ucs += share * std::abs(std::min(gap, 0.0));
  }
  return scores;
}

std::vector<ClassMetrics> per_class_scores(const EvalDataset& dataset,
                                           const ConfidenceMatrix& probs,
                                           int num_bins) {
  check_shapes(dataset, probs);
  std::vector<ClassMetrics> out;
  out.reserve(dataset.num_classes());
  for (std::size_t c = 0; c < dataset.num_classes(); ++c) {
    const auto conf = probs.values().column(c);
    const auto labels = dataset.labels().column(c);
    ClassMetrics metrics;
    metrics.class_name = dataset.classes()[c];
    metrics.class_index = c;
    metrics.n_pos = static_cast<std::size_t>(
        std::count(labels.begin(), labels.end(), std::uint8_t{1}));
    metrics.ap = average_precision(conf, labels);
    metrics.scores =
        calibration_scores(bin_class(conf, labels, num_bins, metrics.class_name));
    metrics.scores.weight = static_cast<double>(metrics.n_pos);
    out.push_back(std::move(metrics));
  }
  return out;
}

CalibrationScores aggregate_multilabel(std::span<const ClassMetrics> per_class,
                                       std::string scope) {
  CalibrationScores total;
  total.scope = std::move(scope);
  for (const auto& m : per_class) {
    const double w = m.scores.weight;
    total.ece += w * m.scores.ece;
    total.mcs += w * m.scores.mcs;
    total.ocs += w * m.scores.ocs;
    total.ucs += w * m.scores.ucs;
    total.weight += w;
  }
  if (!(total.weight > 0.0)) {
    throw ValidationError(ErrorKind::kUndefined,
                          "aggregation undefined: no class has positive weight");
  }
  total.ece /= total.weight;
  total.mcs /= total.weight;
  total.ocs /= total.weight;
  total.ucs /= total.weight;
  return total;
}

ReliabilityCurve pooled_reliability(const EvalDataset& dataset,
                                    const ConfidenceMatrix& probs, int num_bins,
                                    std::string scope) {
  check_shapes(dataset, probs);
  const auto conf = probs.values().values();
  const auto labels = dataset.labels().values();
  return bin_class(conf, labels, num_bins, std::move(scope));
}

CalibrationScores compose_scores(double ocs, double ucs) {
  CalibrationScores scores;
  scores.ocs = ocs;
  scores.ucs = ucs;
  scores.ece = ocs + ucs;
  scores.mcs = ocs - ucs;
  return scores;
}

bool satisfies_identities(const CalibrationScores& s, double tolerance) {
  return std::abs(s.ece - (s.ocs + s.ucs)) <= tolerance &&
         std::abs(s.mcs - (s.ocs - s.ucs)) <= tolerance &&
         std::abs(s.mcs) <= s.ece + tolerance && s.ocs >= 0.0 && s.ucs >= 0.0;
}

}  // namespace calibkit

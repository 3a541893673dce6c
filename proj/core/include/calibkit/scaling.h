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

#ifndef CALIBKIT_SCALING_H_
#define CALIBKIT_SCALING_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "calibkit/dataset.h"

namespace calibkit {

enum class ScalingMethod { kTemperature, kPlatt };
enum class ScalingScope { kGlobal, kPerClass };

std::string_view to_string(ScalingMethod method);
std::string_view to_string(ScalingScope scope);
// Accepts "ts"/"temperature" and "ps"/"platt"; throws ValidationError.
ScalingMethod parse_method(std::string_view text);
// Accepts "global" and "per-class"; throws ValidationError.
ScalingScope parse_scope(std::string_view text);

struct AdamConfig {
  double learning_rate = 1e-3;
  int steps = 1000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool record_history = false;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct FitTrace {
  int steps = 0;
  double nll_initial = 0.0;
  double nll_final = 0.0;
  double grad_norm_final = 0.0;
  std::vector<double> nll_history;
  AdamConfig config;

  friend bool operator==(const FitTrace&, const FitTrace&) = default;
};

// Post hoc map p = sigmoid(z / T + b) with T = exp(tau).
//
// Global parameters hold one (tau, bias) pair that applies to every column.
// Per-class parameters hold one pair per class, aligned with `classes`.
// Temperature scaling keeps every bias at zero.
struct ScalingParams {
  ScalingMethod method = ScalingMethod::kTemperature;
  ScalingScope scope = ScalingScope::kGlobal;
  std::vector<std::string> classes;  // per-class only
  std::vector<double> tau{0.0};
  std::vector<double> bias{0.0};
  std::string fitted_on;
  // Summary of the optimizer run. Per-class fits store the column-mean NLL
  // endpoints and the largest final gradient norm across classes.
  std::optional<FitTrace> trace;

  static ScalingParams identity(ScalingMethod method = ScalingMethod::kTemperature);
  static ScalingParams identity_per_class(ScalingMethod method,
                                          std::vector<std::string> classes);

  std::size_t size() const noexcept { return tau.size(); }
  double temperature(std::size_t column) const;
  double bias_for(std::size_t column) const;
  double tau_for(std::size_t column) const;

  // Throws ValidationError unless the parameters can act on `num_classes`
  // columns and the TS/bias and length invariants hold.
  void validate_for(std::size_t num_classes) const;

  friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

// Gradient of the mean NLL with respect to (tau, bias), shaped like the
// parameters. For temperature scaling the bias gradient is reported but the
// bias is never updated.
struct ParamGradient {
  std::vector<double> tau;
  std::vector<double> bias;

  double norm(bool include_bias) const;
};

inline constexpr double kLogClamp = 1e-12;

ConfidenceMatrix apply_scaling(const Matrix<double>& logits,
                               const ScalingParams& params);

// Mean over all entries of binary cross-entropy. Each term is computed in
// log space and capped at -log(1e-12), which is the value a probability
// clamp to [1e-12, 1 - 1e-12] inside the logs gives.
double bce_nll(const Matrix<double>& logits, const LabelMatrix& labels,
               const ScalingParams& params);

ParamGradient gradients(const Matrix<double>& logits, const LabelMatrix& labels,
                        const ScalingParams& params);

struct FitResult {
  ScalingParams params;
  FitTrace trace;
};

// Full-batch Adam on bce_nll starting from T = 1, b = 0. Per-class fits
// solve one independent problem per column; columns without positives keep
// identity parameters. Deterministic.
FitResult fit(const Matrix<double>& logits, const LabelMatrix& labels,
              std::span<const std::string> classes, ScalingMethod method,
              ScalingScope scope, const AdamConfig& config = {},
              std::string fitted_on = {});

// Serialized parameter document; see README for the schema. `parse` restores
// every double bit-exactly.
std::string params_to_json(const ScalingParams& params);
ScalingParams params_from_json(std::string_view text);

}  // namespace calibkit

#endif  // CALIBKIT_SCALING_H_

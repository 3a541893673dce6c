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

#ifndef CALIBKIT_SYNTH_H_
#define CALIBKIT_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "calibkit/dataset.h"

namespace calibkit {

// Per-class normal latent logits. Empty `mean` selects the default profile:
// class means uniform in [-3, 1] and stddev 2. Vectors of length 1 broadcast.
struct LatentSpec {
  std::vector<double> mean;
  std::vector<double> stddev;
};

struct SynthConfig {
  std::size_t num_samples = 1000;
  std::size_t num_classes = 10;
  LatentSpec latent;
  std::vector<double> true_t{1.0};  // length 1 or num_classes
  std::vector<double> true_b{0.0};  // length 1 or num_classes
  std::uint64_t seed = 0;
  std::string dataset_id = "synth";
  double clip_duration_s = 5.0;

  // Throws ValidationError for sizes < 1, T <= 0, bad vector lengths.
  void validate() const;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::string dataset_id;
  std::vector<double> true_t;  // per class
  std::vector<double> true_b;  // per class
  std::vector<double> latent_mean;
  std::vector<double> latent_stddev;
  double clip_duration_s = 5.0;
};

struct SynthOutput {
  EvalDataset dataset;
  GroundTruth truth;
};

// Logits z ~ N(mean_c, stddev_c); the reported confidence is sigmoid(z) and
// the label is Bernoulli(sigmoid(z / T*_c + b*_c)). With T* = 1 and b* = 0
// the reported confidences are calibrated by construction.
SynthOutput generate(const SynthConfig& config);

std::string class_name_for(std::size_t index);

// predictions.csv, labels.csv, manifest.json and ground_truth.json in `dir`.
void write_synth_files(const SynthOutput& output,
                       const std::filesystem::path& dir);
std::string ground_truth_to_json(const GroundTruth& truth);

}  // namespace calibkit

#endif  // CALIBKIT_SYNTH_H_

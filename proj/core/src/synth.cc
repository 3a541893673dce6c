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

#include "calibkit/synth.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "calibkit/error.h"
#include "calibkit/random.h"
#include "calibkit/report.h"
#include "json.hpp"

namespace calibkit {
namespace {

constexpr double kDefaultMeanLow = -3.0;
constexpr double kDefaultMeanHigh = 1.0;
constexpr double kDefaultStddev = 2.0;

bool broadcastable(const std::vector<double>& v, std::size_t n) {
  return v.size() == 1 || v.size() == n;
}

std::vector<double> broadcast(const std::vector<double>& v, std::size_t n) {
  return v.size() == 1 ? std::vector<double>(n, v[0]) : v;
}

}  // namespace

void SynthConfig::validate() const {
  const auto invalid = [](const std::string& what) {
    throw ValidationError(ErrorKind::kInvalidArgument, what);
  };
  if (num_samples < 1 || num_classes < 1) invalid("N and C must be >= 1");
  if (!broadcastable(true_t, num_classes)) invalid("true_t must have length 1 or C");
  if (!broadcastable(true_b, num_classes)) invalid("true_b must have length 1 or C");
  for (const double t : true_t) {
    if (!(t > 0.0) || !std::isfinite(t)) invalid("true_t must be > 0");
  }
  for (const double b : true_b) {
    if (!std::isfinite(b)) invalid("true_b must be finite");
  }
  if (!latent.mean.empty() || !latent.stddev.empty()) {
    if (!broadcastable(latent.mean, num_classes) ||
        !broadcastable(latent.stddev, num_classes)) {
      invalid("latent mean/stddev must have length 1 or C");
    }
    for (const double s : latent.stddev) {
      if (!(s >= 0.0) || !std::isfinite(s)) invalid("latent stddev must be >= 0");
    }
  }
  if (!(clip_duration_s > 0.0)) invalid("clip duration must be > 0");
  if (dataset_id.empty()) invalid("dataset id must not be empty");
}

std::string class_name_for(std::size_t index) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "class_%03zu", index);
  return buffer;
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  const std::size_t n = config.num_samples;
  const std::size_t c_count = config.num_classes;
  const CellRandom rng(config.seed);

  GroundTruth truth;
  truth.seed = config.seed;
  truth.dataset_id = config.dataset_id;
  truth.clip_duration_s = config.clip_duration_s;
  truth.true_t = broadcast(config.true_t, c_count);
  truth.true_b = broadcast(config.true_b, c_count);
  if (config.latent.mean.empty()) {
    truth.latent_mean.resize(c_count);
    truth.latent_stddev.assign(c_count, kDefaultStddev);
    for (std::size_t c = 0; c < c_count; ++c) {
      const double u =
          rng.uniform(0, static_cast<std::uint32_t>(c), RandomStream::kClassMean);
      truth.latent_mean[c] = kDefaultMeanLow + (kDefaultMeanHigh - kDefaultMeanLow) * u;
    }
  } else {
    truth.latent_mean = broadcast(config.latent.mean, c_count);
    truth.latent_stddev = config.latent.stddev.empty()
                              ? std::vector<double>(c_count, kDefaultStddev)
                              : broadcast(config.latent.stddev, c_count);
  }

  std::vector<std::string> classes;
  classes.reserve(c_count);
  for (std::size_t c = 0; c < c_count; ++c) classes.push_back(class_name_for(c));

  Matrix<double> logits(n, c_count);
  LabelMatrix labels(n, c_count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < c_count; ++c) {
      const auto col = static_cast<std::uint32_t>(c);
      const double z = truth.latent_mean[c] +
                       truth.latent_stddev[c] *
                           rng.standard_normal(i, col, RandomStream::kLatentNormal);
      const double p_true = sigmoid(z / truth.true_t[c] + truth.true_b[c]);
      logits(i, c) = z;
      labels(i, c) = rng.uniform(i, col, RandomStream::kLabel) < p_true ? 1 : 0;
    }
  }

  std::vector<SampleMeta> meta(n);
  char id[64];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(id, sizeof(id), "%s-%07zu", config.dataset_id.c_str(), i);
    meta[i].sample_id = id;
    meta[i].dataset_id = config.dataset_id;
    meta[i].start_s = static_cast<double>(i) * config.clip_duration_s;
    meta[i].duration_s = config.clip_duration_s;
  }
  return {EvalDataset(std::move(classes), std::move(logits), std::move(labels),
                      std::move(meta)),
          std::move(truth)};
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  nlohmann::json doc;
  doc["seed"] = truth.seed;
  doc["dataset_id"] = truth.dataset_id;
  doc["true_t"] = truth.true_t;
  doc["true_b"] = truth.true_b;
  doc["latent_mean"] = truth.latent_mean;
  doc["latent_stddev"] = truth.latent_stddev;
  doc["clip_duration_s"] = truth.clip_duration_s;
  doc["generative_model"] =
      "z ~ N(latent_mean, latent_stddev); confidence = sigmoid(z); "
      "label ~ Bernoulli(sigmoid(z / true_t + true_b))";
  return doc.dump(2) + "\n";
}

void write_synth_files(const SynthOutput& output,
                       const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw ValidationError(ErrorKind::kIo,
                          "cannot create directory " + dir.string());
  }
  const EvalDataset& d = output.dataset;
  write_matrix_csv(dir / "predictions.csv", d.classes(), d.meta(), d.logits());
  write_labels_csv(dir / "labels.csv", d.classes(), d.meta(), d.labels());
  write_manifest_json(dir / "manifest.json", d.meta());
  write_text_file(dir / "ground_truth.json", ground_truth_to_json(output.truth));
}

}  // namespace calibkit

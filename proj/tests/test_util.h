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

// Shared helpers for the calibkit test suites.

#ifndef CALIBKIT_TESTS_TEST_UTIL_H_
#define CALIBKIT_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "calibkit/dataset.h"
#include "calibkit/sigmoid.h"

namespace calibkit::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("calibkit_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Confidences that mix exact bin edges, 0, 1 and ties with continuous values.
inline double random_confidence(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 3);
  switch (kind(rng)) {
    case 0: {
      std::uniform_int_distribution<int> grid(0, 20);
      return grid(rng) / 20.0;
    }
    case 1: {
      std::uniform_int_distribution<int> grid(0, 3);
      return grid(rng) / 3.0;
    }
    default:
      return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  }
}

struct RandomInstance {
  std::vector<std::string> classes;
  Matrix<double> probs;
  LabelMatrix labels;
};

inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t n,
                                      std::size_t c) {
  RandomInstance inst;
  inst.probs = Matrix<double>(n, c);
  inst.labels = LabelMatrix(n, c);
  std::uniform_real_distribution<double> prevalence(0.0, 0.8);
  for (std::size_t j = 0; j < c; ++j) {
    inst.classes.push_back("c" + std::to_string(j));
    const double rate = prevalence(rng);
    std::bernoulli_distribution label(rate);
    for (std::size_t i = 0; i < n; ++i) {
      inst.probs(i, j) = random_confidence(rng);
      inst.labels(i, j) = label(rng) ? 1 : 0;
    }
  }
  return inst;
}

inline std::vector<SampleMeta> simple_meta(std::size_t n,
                                           const std::string& dataset = "d0",
                                           double duration = 5.0) {
  std::vector<SampleMeta> meta(n);
  for (std::size_t i = 0; i < n; ++i) {
    meta[i] = {dataset + "-" + std::to_string(i), dataset,
               static_cast<double>(i) * duration, duration};
  }
  return meta;
}

// Dataset whose logits are log-odds of `probs` and whose source
// probabilities are `probs` verbatim.
inline EvalDataset dataset_from_probs(const RandomInstance& inst,
                                      const std::string& dataset = "d0") {
  Matrix<double> logits(inst.probs.rows(), inst.probs.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    for (std::size_t j = 0; j < logits.cols(); ++j) {
      logits(i, j) = inverse_sigmoid(inst.probs(i, j));
    }
  }
  return EvalDataset(inst.classes, std::move(logits), inst.labels,
                     simple_meta(inst.probs.rows(), dataset), inst.probs);
}

inline LabelMatrix labels_from(std::initializer_list<std::initializer_list<int>> rows) {
  const std::size_t n = rows.size();
  const std::size_t c = n ? rows.begin()->size() : 0;
  LabelMatrix out(n, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (const int v : row) out(i, j++) = static_cast<std::uint8_t>(v);
    ++i;
  }
  return out;
}

inline Matrix<double> matrix_from(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t c = n ? rows.begin()->size() : 0;
  Matrix<double> out(n, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    std::size_t j = 0;
    for (const double v : row) out(i, j++) = v;
    ++i;
  }
  return out;
}

}  // namespace calibkit::testing

#endif  // CALIBKIT_TESTS_TEST_UTIL_H_

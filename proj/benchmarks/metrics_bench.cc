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

#include <cstdint>
#include <vector>

#include "benchmark/benchmark.h"
#include "calibkit/metrics.h"
#include "calibkit/synth.h"

namespace calibkit {
namespace {

EvalDataset make_data(std::size_t n, std::size_t c) {
  SynthConfig config;
  config.num_samples = n;
  config.num_classes = c;
  config.seed = 42;
  return generate(config).dataset;
}

void BM_BinClass(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)), 1);
  const auto probs = data.base_confidences();
  const auto conf = probs.values().column(0);
  const auto labels = data.labels().column(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(bin_class(conf, labels, kDefaultBins));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BinClass)->Range(1 << 10, 1 << 18);

void BM_AveragePrecision(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)), 1);
  const auto probs = data.base_confidences();
  const auto conf = probs.values().column(0);
  const auto labels = data.labels().column(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(average_precision(conf, labels));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AveragePrecision)->Range(1 << 10, 1 << 18);

void BM_PerClassAggregate(benchmark::State& state) {
  const auto data = make_data(static_cast<std::size_t>(state.range(0)), 20);
  const auto probs = data.base_confidences();
  for (auto _ : state) {
    const auto per = per_class_scores(data, probs, kDefaultBins);
    benchmark::DoNotOptimize(aggregate_multilabel(per));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 20);
}
BENCHMARK(BM_PerClassAggregate)->Range(1 << 10, 1 << 15);

}  // namespace
}  // namespace calibkit

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

#include "benchmark/benchmark.h"
#include "calibkit/scaling.h"
#include "calibkit/synth.h"

namespace calibkit {
namespace {

SynthOutput make_data(std::size_t n) {
  SynthConfig config;
  config.num_samples = n;
  config.num_classes = 10;
  config.true_b = {-1.0};
  config.seed = 7;
  return generate(config);
}

void BM_ApplyScaling(benchmark::State& state) {
  const auto out = make_data(static_cast<std::size_t>(state.range(0)));
  auto params = ScalingParams::identity(ScalingMethod::kPlatt);
  params.tau = {0.3};
  params.bias = {-0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_scaling(out.dataset.logits(), params));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 10);
}
BENCHMARK(BM_ApplyScaling)->Range(1 << 10, 1 << 16);

void BM_Gradients(benchmark::State& state) {
  const auto out = make_data(static_cast<std::size_t>(state.range(0)));
  const auto params = ScalingParams::identity(ScalingMethod::kPlatt);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gradients(out.dataset.logits(), out.dataset.labels(), params));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 10);
}
BENCHMARK(BM_Gradients)->Range(1 << 10, 1 << 16);

void BM_Fit(benchmark::State& state) {
  const auto out = make_data(static_cast<std::size_t>(state.range(0)));
  const auto scope =
      state.range(1) ? ScalingScope::kPerClass : ScalingScope::kGlobal;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(out.dataset.logits(), out.dataset.labels(),
                                 out.dataset.classes(), ScalingMethod::kPlatt,
                                 scope));
  }
}
BENCHMARK(BM_Fit)
    ->ArgsProduct({{1000, 5000}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace calibkit

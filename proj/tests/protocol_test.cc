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

#include "calibkit/protocol.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "calibkit/error.h"
#include "calibkit/metrics.h"
#include "calibkit/synth.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace calibkit {
namespace {

EvalDataset clips(std::size_t n, const std::string& id, double duration = 5.0,
                  std::uint64_t seed = 1) {
  SynthConfig config;
  config.num_samples = n;
  config.num_classes = 4;
  config.seed = seed;
  config.dataset_id = id;
  config.clip_duration_s = duration;
  return generate(config).dataset;
}

const ReportRow* find_row(const std::vector<ReportRow>& rows,
                          const std::string& scope, const std::string& method) {
  for (const auto& row : rows) {
    if (row.scope == scope && row.method == method) return &row;
  }
  return nullptr;
}

TEST(FirstMinutesTest, TwentyMinutesOfClipsSplitsInHalf) {
  const auto d = clips(240, "POW");
  const auto split = split_first_minutes(d, 10.0);
  EXPECT_EQ(split.calibration.size(), 120u);
  EXPECT_EQ(split.evaluation.size(), 120u);
  EXPECT_EQ(split.calibration.back(), 119u);
  EXPECT_EQ(split.evaluation.front(), 120u);
}

TEST(FirstMinutesTest, WindowCoveringEverythingIsAnError) {
  const auto d = clips(24, "POW");
  EXPECT_THROW(split_first_minutes(d, 10.0), ValidationError);
  EXPECT_THROW(split_first_minutes(d, 0.0), ValidationError);
}

TEST(FirstMinutesTest, OrdersByStartTimeWithinEachDataset) {
  Matrix<double> logits(6, 1);
  LabelMatrix labels(6, 1);
  std::vector<SampleMeta> meta{{"b3", "B", 120.0, 60.0}, {"a1", "A", 60.0, 60.0},
                               {"b1", "B", 0.0, 60.0},   {"a0", "A", 0.0, 60.0},
                               {"b2", "B", 60.0, 60.0},  {"a2", "A", 120.0, 60.0}};
  const EvalDataset d({"c"}, logits, labels, meta);
  const auto split = split_first_minutes(d, 2.0);
  EXPECT_EQ(split.calibration, (std::vector<std::size_t>{1, 2, 3, 4}));
  EXPECT_EQ(split.evaluation, (std::vector<std::size_t>{0, 5}));
}

TEST(FirstMinutesTest, SampleIdBreaksStartTies) {
  Matrix<double> logits(3, 1);
  LabelMatrix labels(3, 1);
  std::vector<SampleMeta> meta{{"z", "A", 0.0, 60.0}, {"y", "A", 0.0, 60.0},
                               {"x", "A", 60.0, 60.0}};
  const EvalDataset d({"c"}, logits, labels, meta);
  const auto split = split_first_minutes(d, 1.0);
  EXPECT_EQ(split.calibration, (std::vector<std::size_t>{1}));
}

TEST(FrequentRareTest, MassFirst) {
  const std::vector<std::size_t> counts{30, 50, 20};
  const std::vector<std::string> names{"b", "a", "c"};
  const auto s = frequent_rare_split(counts, names, 0.5);
  EXPECT_EQ(s.frequent, (std::vector<std::size_t>{1}));
  EXPECT_EQ(s.rare, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(s.k, 1u);
  EXPECT_EQ(s.mass_fraction, 0.5);
}

TEST(FrequentRareTest, HighTargetTakesEverything) {
  const std::vector<std::size_t> counts{50, 30, 20};
  const std::vector<std::string> names{"a", "b", "c"};
  const auto s = frequent_rare_split(counts, names, 0.999);
  EXPECT_EQ(s.k, 3u);
  EXPECT_TRUE(s.rare.empty());
  EXPECT_EQ(s.mass_fraction, 1.0);
}

TEST(FrequentRareTest, TiesByNameAndZeroClassesExcluded) {
  const std::vector<std::size_t> counts{10, 10, 0};
  const std::vector<std::string> names{"m", "k", "z"};
  const auto s = frequent_rare_split(counts, names, 0.3);
  EXPECT_EQ(s.frequent, (std::vector<std::size_t>{1}));
  EXPECT_EQ(s.rare, (std::vector<std::size_t>{0}));
}

TEST(FrequentRareTest, Errors) {
  const std::vector<std::size_t> zeros{0, 0};
  const std::vector<std::string> names{"a", "b"};
  EXPECT_THROW(frequent_rare_split(zeros, names), ValidationError);
  const std::vector<std::size_t> counts{1, 2};
  EXPECT_THROW(frequent_rare_split(counts, names, 1.0), ValidationError);
}

TEST(BenchmarkTest, BaseRowEqualsDirectMetrics) {
  const auto d = clips(300, "POW");
  BenchmarkOptions options;
  const std::vector<EvalDataset> datasets{d};
  const auto result = run_benchmark(datasets, options);
  const auto* row = find_row(result.rows, "POW", "base");
  ASSERT_NE(row, nullptr);
  EXPECT_EQ(row->evaluated_on, "full");
  const auto probs = d.base_confidences();
  const auto per = per_class_scores(d, probs, kDefaultBins);
  const auto total = aggregate_multilabel(per);
  EXPECT_EQ(row->scores.ece, total.ece);
  EXPECT_EQ(row->scores.mcs, total.mcs);
  EXPECT_EQ(*row->cmap, cmap(d, probs));
  EXPECT_EQ(row->n_samples, 300u);
  EXPECT_EQ(row->pooled_curve.n, 1200u);
  ASSERT_NE(find_row(result.rows, "All", "base"), nullptr);
}

TEST(BenchmarkTest, SubsetsReweightToTotal) {
  const auto d = clips(400, "POW", 5.0, 3);
  const std::vector<EvalDataset> datasets{d};
  const auto result = run_benchmark(datasets, {});
  for (const auto& row : result.rows) {
    ASSERT_TRUE(row.subsets);
    const auto& f = row.subsets->frequent;
    const auto& r = row.subsets->rare;
    ASSERT_TRUE(f.scores);
    if (!r.scores) continue;
    const double wf = f.scores->weight;
    const double wr = r.scores->weight;
    EXPECT_NEAR((wf * f.scores->ece + wr * r.scores->ece) / (wf + wr),
                row.scores.ece, 1e-12);
    EXPECT_NEAR((wf * f.scores->mcs + wr * r.scores->mcs) / (wf + wr),
                row.scores.mcs, 1e-12);
    EXPECT_GE(row.subsets->mass_fraction, 0.5);
  }
}

TEST(BenchmarkTest, FirstMinutesRowsAndDeterminism) {
  const std::vector<EvalDataset> datasets{clips(240, "A", 5.0, 1),
                                          clips(360, "B", 5.0, 2)};
  BenchmarkOptions options;
  options.split = SplitSpec::first_minutes(10.0);
  options.methods = {{ScalingMethod::kTemperature, ScalingScope::kGlobal},
                     {ScalingMethod::kPlatt, ScalingScope::kPerClass}};
  options.adam.steps = 100;
  const auto result = run_benchmark(datasets, options);
  for (const std::string scope : {"A", "B", "All"}) {
    const auto* full = find_row(result.rows, scope, "base_full");
    const auto* base = find_row(result.rows, scope, "base");
    const auto* ts = find_row(result.rows, scope, "ts_global");
    const auto* ps = find_row(result.rows, scope, "ps_per_class");
    ASSERT_TRUE(full && base && ts && ps) << scope;
    EXPECT_EQ(full->evaluated_on, "full");
    EXPECT_EQ(base->evaluated_on, "remainder");
    ASSERT_TRUE(base->delta_mcs_vs_full);
    EXPECT_NEAR(*base->delta_mcs_vs_full, base->scores.mcs - full->scores.mcs, 1e-15);
    if (scope != "All") {
      ASSERT_TRUE(ps->params);
      EXPECT_EQ(ps->params->fitted_on.rfind(scope + ":", 0), 0u);
    }
    const auto expected = relative_improvement(base->scores.mcs, ts->scores.mcs);
    ASSERT_EQ(ts->relative_improvement_pct.has_value(), expected.has_value());
    if (expected) EXPECT_EQ(*ts->relative_improvement_pct, *expected);
  }
  const auto* a_base = find_row(result.rows, "A", "base");
  EXPECT_EQ(a_base->n_samples, 120u);
  EXPECT_EQ(result.fitted.size(), 4u);
  EXPECT_EQ(run_benchmark(datasets, options).rows, result.rows);
}

TEST(BenchmarkTest, HeldOutRequiresMatchingClassesPerClass) {
  SynthConfig config;
  config.num_samples = 100;
  config.num_classes = 3;
  config.dataset_id = "C";
  auto calib = generate(config).dataset;
  const std::vector<EvalDataset> datasets{clips(100, "T")};
  BenchmarkOptions options;
  options.split = SplitSpec::held_out("C");
  options.calibration_dataset = calib;
  options.methods = {{ScalingMethod::kPlatt, ScalingScope::kPerClass}};
  options.adam.steps = 10;
  try {
    run_benchmark(datasets, options);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kClassMismatch);
  }
  options.methods = {{ScalingMethod::kPlatt, ScalingScope::kGlobal}};
  const auto result = run_benchmark(datasets, options);
  const auto* row = find_row(result.rows, "T", "ps_global");
  ASSERT_NE(row, nullptr);
  EXPECT_EQ(row->params->fitted_on.rfind("C:", 0), 0u);
}

TEST(MethodSpecTest, Names) {
  EXPECT_EQ((MethodSpec{ScalingMethod::kTemperature, ScalingScope::kGlobal}.name()),
            "ts_global");
  EXPECT_EQ((MethodSpec{ScalingMethod::kPlatt, ScalingScope::kPerClass}.name()),
            "ps_per_class");
}

}  // namespace
}  // namespace calibkit

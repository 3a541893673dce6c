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

#include "cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "calibkit/report.h"
#include "calibkit/scaling.h"
#include "calibkit/sigmoid.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace calibkit {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  // Defaults for --seed/--n/--c are replaced when `extra` names them.
  void synth(const fs::path& dir, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"synth", "--out", dir.string()};
    for (const char* flag : {"--seed", "--n", "--c"}) {
      if (std::find(extra.begin(), extra.end(), flag) != extra.end()) continue;
      args.push_back(flag);
      args.push_back(flag == std::string("--seed") ? "5"
                     : flag == std::string("--n")  ? "480"
                                                   : "4");
    }
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run(args);
    ASSERT_EQ(r.code, 0) << r.err;
  }
  std::vector<std::string> data_args(const fs::path& dir) const {
    return {"--predictions", (dir / "predictions.csv").string(),
            "--labels",      (dir / "labels.csv").string(),
            "--manifest",    (dir / "manifest.json").string()};
  }
  std::vector<std::string> cmd(std::string name, const fs::path& data,
                               const fs::path& out,
                               std::vector<std::string> extra = {}) const {
    std::vector<std::string> args{std::move(name)};
    const auto d = data_args(data);
    args.insert(args.end(), d.begin(), d.end());
    args.push_back("--out");
    args.push_back(out.string());
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
  }

  testing::TempDir tmp_;
};

TEST_F(CliTest, HelpAndVersion) {
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
  const auto v = run({"--version"});
  EXPECT_EQ(v.code, cli::kExitOk);
  EXPECT_FALSE(v.out.empty());
}

TEST_F(CliTest, UnknownCommandIsValidationError) {
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitValidation);
  EXPECT_EQ(run({}).code, cli::kExitValidation);
}

TEST_F(CliTest, SynthIsDeterministic) {
  synth(tmp_ / "a");
  synth(tmp_ / "b");
  for (const char* name :
       {"predictions.csv", "labels.csv", "manifest.json", "ground_truth.json"}) {
    EXPECT_EQ(slurp(tmp_ / "a" / name), slurp(tmp_ / "b" / name)) << name;
  }
}

TEST_F(CliTest, EvaluateWritesReportAndSvg) {
  synth(tmp_ / "data");
  const auto r = run(cmd("evaluate", tmp_ / "data", tmp_ / "out",
                         {"--svg", "--per-class", "--model", "toy"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = report_from_json(slurp(tmp_ / "out" / "report.json"));
  ASSERT_FALSE(report.rows.empty());
  EXPECT_EQ(report.rows.front().model, "toy");
  EXPECT_EQ(report.rows.front().per_class.size(), 4u);
  EXPECT_TRUE(fs::exists(tmp_ / "out" / "reliability_synth.svg"));
  EXPECT_TRUE(fs::exists(tmp_ / "out" / "reliability_All.svg"));
  EXPECT_NE(r.out.find("MCS="), std::string::npos);
}

TEST_F(CliTest, CsvFormat) {
  synth(tmp_ / "data");
  const auto r = run(cmd("evaluate", tmp_ / "data", tmp_ / "out", {"--format", "csv"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(tmp_ / "out" / "report.csv").rfind("model,scope,method", 0), 0u);
}

TEST_F(CliTest, MissingLabelsNamesThePath) {
  synth(tmp_ / "data");
  fs::remove(tmp_ / "data" / "labels.csv");
  const auto r = run(cmd("evaluate", tmp_ / "data", tmp_ / "out"));
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find((tmp_ / "data" / "labels.csv").string()), std::string::npos);
}

TEST_F(CliTest, BadFlagValuesAreRejected) {
  synth(tmp_ / "data");
  EXPECT_EQ(run(cmd("evaluate", tmp_ / "data", tmp_ / "o1", {"--bins", "0"})).code,
            cli::kExitValidation);
  EXPECT_EQ(run(cmd("evaluate", tmp_ / "data", tmp_ / "o2", {"--format", "xml"})).code,
            cli::kExitValidation);
  EXPECT_EQ(run(cmd("fit", tmp_ / "data", tmp_ / "o3", {"--method", "iso"})).code,
            cli::kExitValidation);
  EXPECT_EQ(run(cmd("fit", tmp_ / "data", tmp_ / "o4",
                    {"--method", "ps", "--first-minutes", "1000"}))
                .code,
            cli::kExitValidation);
}

TEST_F(CliTest, FitRecoversTemperature) {
  synth(tmp_ / "data", {"--true-t", "2", "--n", "2000", "--c", "10"});
  const auto r = run(cmd("fit", tmp_ / "data", tmp_ / "out",
                         {"--method", "ts", "--lr", "0.01", "--steps", "3000"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto params = params_from_json(slurp(tmp_ / "out" / "params_synth.json"));
  EXPECT_NEAR(params.temperature(0), 2.0, 0.1);
  EXPECT_EQ(params.bias_for(0), 0.0);
}

TEST_F(CliTest, ApplyIdentityMatchesSigmoid) {
  synth(tmp_ / "data");
  write_text_file(tmp_ / "id.json", params_to_json(ScalingParams::identity()));
  const auto r = run({"apply", "--predictions", (tmp_ / "data" / "predictions.csv").string(),
                      "--params", (tmp_ / "id.json").string(), "--out",
                      (tmp_ / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto calibrated = read_prediction_table(tmp_ / "out" / "calibrated_predictions.csv");
  const auto logits = read_prediction_table(tmp_ / "data" / "predictions.csv");
  for (std::size_t i = 0; i < logits.values.rows(); ++i) {
    for (std::size_t j = 0; j < logits.values.cols(); ++j) {
      ASSERT_EQ(calibrated.values(i, j), sigmoid(logits.values(i, j)));
    }
  }
}

TEST_F(CliTest, ApplyThenEvaluateEqualsFit) {
  synth(tmp_ / "data", {"--true-b", "-1"});
  ASSERT_EQ(run(cmd("fit", tmp_ / "data", tmp_ / "fit",
                    {"--method", "ps", "--scope", "per-class", "--steps", "200"}))
                .code,
            0);
  ASSERT_EQ(run({"apply", "--predictions", (tmp_ / "data" / "predictions.csv").string(),
                 "--params", (tmp_ / "fit" / "params_synth.json").string(), "--out",
                 (tmp_ / "applied").string()})
                .code,
            0);
  std::vector<std::string> args{
      "evaluate", "--predictions",
      (tmp_ / "applied" / "calibrated_predictions.csv").string(), "--labels",
      (tmp_ / "data" / "labels.csv").string(), "--manifest",
      (tmp_ / "data" / "manifest.json").string(), "--probabilities", "--out",
      (tmp_ / "eval").string()};
  ASSERT_EQ(run(args).code, 0);
  const auto fitted = report_from_json(slurp(tmp_ / "fit" / "report.json"));
  const auto evaluated = report_from_json(slurp(tmp_ / "eval" / "report.json"));
  const ReportRow* a = nullptr;
  const ReportRow* b = nullptr;
  for (const auto& row : fitted.rows) {
    if (row.scope == "synth" && row.method == "ps_per_class") a = &row;
  }
  for (const auto& row : evaluated.rows) {
    if (row.scope == "synth" && row.method == "base") b = &row;
  }
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->scores.ece, b->scores.ece);
  EXPECT_EQ(a->scores.mcs, b->scores.mcs);
  EXPECT_EQ(*a->cmap, *b->cmap);
  EXPECT_EQ(a->pooled_curve.bins, b->pooled_curve.bins);
}

TEST_F(CliTest, ApplyClassMismatch) {
  synth(tmp_ / "data");
  synth(tmp_ / "other", {"--c", "3"});
  ASSERT_EQ(run(cmd("fit", tmp_ / "other", tmp_ / "fit",
                    {"--method", "ps", "--scope", "per-class", "--steps", "10"}))
                .code,
            0);
  const auto r = run({"apply", "--predictions", (tmp_ / "data" / "predictions.csv").string(),
                      "--params", (tmp_ / "fit" / "params_synth.json").string(), "--out",
                      (tmp_ / "applied").string()});
  EXPECT_EQ(r.code, cli::kExitValidation);
}

TEST_F(CliTest, HeldOutPerClassWithMismatchedClasses) {
  synth(tmp_ / "data");
  synth(tmp_ / "calib", {"--c", "3", "--dataset-id", "cal"});
  const auto r = run(cmd("fit", tmp_ / "data", tmp_ / "out",
                         {"--method", "ps", "--scope", "per-class", "--steps", "10",
                          "--calib-predictions", (tmp_ / "calib" / "predictions.csv").string(),
                          "--calib-labels", (tmp_ / "calib" / "labels.csv").string(),
                          "--calib-manifest", (tmp_ / "calib" / "manifest.json").string()}));
  EXPECT_EQ(r.code, cli::kExitValidation);
  const auto g = run(cmd("fit", tmp_ / "data", tmp_ / "out2",
                         {"--method", "ps", "--scope", "global", "--steps", "10",
                          "--calib-predictions", (tmp_ / "calib" / "predictions.csv").string(),
                          "--calib-labels", (tmp_ / "calib" / "labels.csv").string(),
                          "--calib-manifest", (tmp_ / "calib" / "manifest.json").string()}));
  EXPECT_EQ(g.code, 0) << g.err;
}

TEST_F(CliTest, PlotReferencesMcs) {
  synth(tmp_ / "data");
  ASSERT_EQ(run(cmd("evaluate", tmp_ / "data", tmp_ / "out")).code, 0);
  const auto r = run({"plot", "--report", (tmp_ / "out" / "report.json").string(),
                      "--scope", "pooled", "--out", (tmp_ / "plot").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = report_from_json(slurp(tmp_ / "out" / "report.json"));
  const auto svg = slurp(tmp_ / "plot" / "reliability_pooled.svg");
  for (const auto& row : report.rows) {
    if (row.scope != "All") continue;
    EXPECT_NE(svg.find("(MCS " + format_fixed(row.scores.mcs, 4) + ")"),
              std::string::npos);
  }
  EXPECT_EQ(run({"plot", "--report", (tmp_ / "out" / "report.json").string(), "--scope",
                 "nowhere", "--out", (tmp_ / "plot").string()})
                .code,
            cli::kExitValidation);
}

}  // namespace
}  // namespace calibkit

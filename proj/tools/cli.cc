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
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "calibkit/dataset.h"
#include "calibkit/error.h"
#include "calibkit/protocol.h"
#include "calibkit/report.h"
#include "calibkit/scaling.h"
#include "calibkit/svg.h"
#include "calibkit/synth.h"
#include "calibkit/version.h"

namespace calibkit::cli {
namespace {

namespace fs = std::filesystem;

struct DataFlags {
  std::string predictions;
  std::string labels;
  std::string manifest;
  bool probabilities = false;
  double eps = kDefaultProbabilityEps;
  int bins = kDefaultBins;
  std::string model = "model";
  double target_fraction = kDefaultTargetFraction;
  std::optional<double> first_minutes;
  std::string calib_dataset;
  std::string calib_predictions;
  std::string calib_labels;
  std::string calib_manifest;
  std::string out = ".";
  std::string format = "json";
  bool svg = false;
  bool per_class = false;
};

struct FitFlags {
  std::string method;
  std::string scope = "global";
  double lr = 1e-3;
  int steps = 1000;
  bool record_history = false;
};

struct ApplyFlags {
  std::string predictions;
  std::string params;
  bool probabilities = false;
  double eps = kDefaultProbabilityEps;
  std::string out = ".";
};

struct SynthFlags {
  std::uint64_t seed = 0;
  std::size_t n = 1000;
  std::size_t c = 10;
  std::vector<double> true_t{1.0};
  std::vector<double> true_b{0.0};
  std::vector<double> latent_mean;
  std::vector<double> latent_std;
  std::string dataset_id = "synth";
  double clip_duration = 5.0;
  std::string out = ".";
};

struct PlotFlags {
  std::string report;
  std::string scope = "pooled";
  std::string out = ".";
};

[[noreturn]] void reject(const std::string& message) {
  throw ValidationError(ErrorKind::kInvalidArgument, message);
}

void add_data_flags(CLI::App& cmd, DataFlags& f) {
  cmd.add_option("--predictions", f.predictions, "Predictions CSV (logits or probabilities)")
      ->required();
  cmd.add_option("--labels", f.labels, "Binary labels CSV")->required();
  cmd.add_option("--manifest", f.manifest, "Manifest JSON")->required();
  cmd.add_flag("--probabilities", f.probabilities,
               "Prediction cells are probabilities rather than logits");
  cmd.add_option("--eps", f.eps, "Clamp for probability-to-logit recovery");
  cmd.add_option("--bins", f.bins, "Number of equal-width confidence bins");
  cmd.add_option("--model", f.model, "Model tag recorded in report rows");
  cmd.add_option("--target-fraction", f.target_fraction,
                 "Positive mass covered by the frequent class subset");
  auto* minutes = cmd.add_option("--first-minutes", f.first_minutes,
                                 "Calibrate on the first X minutes of each dataset");
  auto* calib = cmd.add_option("--calib-dataset", f.calib_dataset,
                               "Calibrate on this held-out dataset id");
  minutes->excludes(calib);
  cmd.add_option("--calib-predictions", f.calib_predictions,
                 "Held-out calibration predictions from separate files");
  cmd.add_option("--calib-labels", f.calib_labels, "Held-out calibration labels");
  cmd.add_option("--calib-manifest", f.calib_manifest, "Held-out calibration manifest");
  cmd.add_option("--out", f.out, "Output directory");
  cmd.add_option("--format", f.format, "Report format: json or csv");
  cmd.add_flag("--svg", f.svg, "Also write reliability diagrams");
  cmd.add_flag("--per-class", f.per_class, "Include the per-class metrics table");
}

void validate_data_flags(const DataFlags& f) {
  if (f.bins < 1) reject("--bins must be >= 1");
  if (!(f.eps > 0.0 && f.eps < 0.5)) reject("--eps must lie in (0, 0.5)");
  if (!(f.target_fraction > 0.0 && f.target_fraction < 1.0)) {
    reject("--target-fraction must lie in (0, 1)");
  }
  if (f.first_minutes && !(*f.first_minutes > 0.0 && std::isfinite(*f.first_minutes))) {
    reject("--first-minutes must be > 0");
  }
  parse_report_format(f.format);
  const int calib_files = !f.calib_predictions.empty() + !f.calib_labels.empty() +
                          !f.calib_manifest.empty();
  if (calib_files != 0 && calib_files != 3) {
    reject("--calib-predictions, --calib-labels and --calib-manifest go together");
  }
  if (calib_files == 3 && f.first_minutes) {
    reject("held-out calibration files cannot be combined with --first-minutes");
  }
}

void validate_fit_flags(const FitFlags& f) {
  if (f.method.empty()) reject("--method is required");
  parse_method(f.method);
  parse_scope(f.scope);
  if (!(f.lr > 0.0 && std::isfinite(f.lr))) reject("--lr must be > 0");
  if (f.steps < 1) reject("--steps must be >= 1");
}

std::string safe_name(std::string_view text) {
  std::string out;
  for (const char ch : text) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ||
                    ch == '_' || ch == '.';
    out += ok ? ch : '_';
  }
  return out.empty() ? std::string("unnamed") : out;
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError(ErrorKind::kIo, "cannot create directory " + dir);
  return fs::path(dir);
}

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

ConfigEcho echo_data(const std::string& subcommand, const DataFlags& f) {
  ConfigEcho echo;
  echo.emplace_back("subcommand", subcommand);
  echo.emplace_back("model", f.model);
  echo.emplace_back("predictions", f.predictions);
  echo.emplace_back("labels", f.labels);
  echo.emplace_back("manifest", f.manifest);
  echo.emplace_back("inputs_are_probabilities", f.probabilities ? "true" : "false");
  echo.emplace_back("eps", format_round_trip(f.eps));
  echo.emplace_back("bins", std::to_string(f.bins));
  echo.emplace_back("binning", "equal-width, last bin closed at 1");
  echo.emplace_back("target_fraction", format_round_trip(f.target_fraction));
  if (f.first_minutes) {
    echo.emplace_back("split", "first-minutes");
    echo.emplace_back("first_minutes", format_round_trip(*f.first_minutes));
    echo.emplace_back("split_rule",
                      "per dataset_id, cumulative clip duration ordered by "
                      "(start_s, sample_id)");
  } else if (!f.calib_dataset.empty() || !f.calib_predictions.empty()) {
    echo.emplace_back("split", "held-out");
    echo.emplace_back("calib_dataset", f.calib_dataset);
    if (!f.calib_predictions.empty()) {
      echo.emplace_back("calib_predictions", f.calib_predictions);
      echo.emplace_back("calib_labels", f.calib_labels);
      echo.emplace_back("calib_manifest", f.calib_manifest);
    }
  } else {
    echo.emplace_back("split", "none");
  }
  echo.emplace_back("per_class_table", f.per_class ? "true" : "false");
  echo.emplace_back("format", f.format);
  return echo;
}

void echo_fit(ConfigEcho& echo, const FitFlags& f, const AdamConfig& adam) {
  echo.emplace_back("method", f.method);
  echo.emplace_back("scope", f.scope);
  echo.emplace_back("optimizer", "adam, full batch, no early stopping");
  echo.emplace_back("learning_rate", format_round_trip(adam.learning_rate));
  echo.emplace_back("steps", std::to_string(adam.steps));
  echo.emplace_back("beta1", format_round_trip(adam.beta1));
  echo.emplace_back("beta2", format_round_trip(adam.beta2));
  echo.emplace_back("adam_epsilon", format_round_trip(adam.epsilon));
  echo.emplace_back("parameterization", "p = sigmoid(z / T + b), T = exp(tau)");
  echo.emplace_back("init", "tau=0, b=0");
  echo.emplace_back("per_class_fallback", "identity for classes without positives");
}

struct LoadedData {
  std::vector<EvalDataset> datasets;
  std::optional<EvalDataset> calibration;
};

LoadedData load_inputs(const DataFlags& f) {
  const LoadOptions load{f.probabilities, f.eps};
  LoadedData data;
  data.datasets = partition_by_dataset(
      load_dataset(f.predictions, f.labels, f.manifest, load));
  if (!f.calib_predictions.empty()) {
    data.calibration = load_dataset(f.calib_predictions, f.calib_labels,
                                    f.calib_manifest, load);
  }
  return data;
}

BenchmarkOptions benchmark_options(const DataFlags& f, const LoadedData& data) {
  BenchmarkOptions options;
  options.model = f.model;
  options.num_bins = f.bins;
  options.target_fraction = f.target_fraction;
  options.per_class_table = f.per_class;
  if (f.first_minutes) {
    options.split = SplitSpec::first_minutes(*f.first_minutes);
  } else if (data.calibration) {
    const std::string id =
        f.calib_dataset.empty() ? data.calibration->dataset_id() : f.calib_dataset;
    options.split = SplitSpec::held_out(id);
    options.calibration_dataset = data.calibration;
  } else if (!f.calib_dataset.empty()) {
    options.split = SplitSpec::held_out(f.calib_dataset);
  }
  return options;
}

void write_outputs(const Report& report, const DataFlags& f, const fs::path& dir,
                   std::ostream& out) {
  const ReportFormat format = parse_report_format(f.format);
  const fs::path report_path =
      dir / (format == ReportFormat::kJson ? "report.json" : "report.csv");
  emit_report(report, format, report_path);
  out << "wrote " << report_path.string() << '\n';
  if (!f.svg) return;
  std::vector<std::string> scopes;
  for (const auto& row : report.rows) {
    if (std::find(scopes.begin(), scopes.end(), row.scope) == scopes.end()) {
      scopes.push_back(row.scope);
    }
  }
  for (const auto& scope : scopes) {
    std::vector<ReportRow> rows;
    for (const auto& row : report.rows) {
      if (row.scope == scope) rows.push_back(row);
    }
    const fs::path path = dir / ("reliability_" + safe_name(scope) + ".svg");
    write_text_file(path, render_rows_svg(rows, report.rows.front().model + " / " + scope));
    out << "wrote " << path.string() << '\n';
  }
}

void print_summary(const Report& report, std::ostream& out) {
  for (const auto& row : report.rows) {
    out << row.scope << '\t' << row.method << '\t' << row.evaluated_on
        << "\tcmAP=" << (row.cmap ? format_fixed(*row.cmap, 4) : "n/a")
        << "\tECE=" << format_fixed(row.scores.ece, 4)
        << "\tMCS=" << format_fixed(row.scores.mcs, 4)
        << "\tOCS=" << format_fixed(row.scores.ocs, 4)
        << "\tUCS=" << format_fixed(row.scores.ucs, 4) << '\n';
  }
}

int cmd_evaluate(const DataFlags& f, std::ostream& out) {
  validate_data_flags(f);
  const fs::path dir = prepare_out_dir(f.out);
  const LoadedData data = load_inputs(f);
  const BenchmarkOptions options = benchmark_options(f, data);
  const BenchmarkResult result = run_benchmark(data.datasets, options);
  Report report;
  report.tool_version = kVersion;
  report.config = echo_data("evaluate", f);
  report.rows = result.rows;
  write_outputs(report, f, dir, out);
  print_summary(report, out);
  return kExitOk;
}

int cmd_fit(const DataFlags& f, const FitFlags& ff, std::ostream& out) {
  validate_data_flags(f);
  validate_fit_flags(ff);
  const fs::path dir = prepare_out_dir(f.out);
  const LoadedData data = load_inputs(f);
  BenchmarkOptions options = benchmark_options(f, data);
  options.methods = {{parse_method(ff.method), parse_scope(ff.scope)}};
  options.adam.learning_rate = ff.lr;
  options.adam.steps = ff.steps;
  options.adam.record_history = ff.record_history;
  const BenchmarkResult result = run_benchmark(data.datasets, options);

  for (const auto& fitted : result.fitted) {
    const fs::path path = dir / ("params_" + safe_name(fitted.dataset_id) + ".json");
    write_text_file(path, params_to_json(fitted.params));
    out << "wrote " << path.string() << '\n';
  }
  Report report;
  report.tool_version = kVersion;
  report.config = echo_data("fit", f);
  echo_fit(report.config, ff, options.adam);
  report.rows = result.rows;
  write_outputs(report, f, dir, out);
  print_summary(report, out);
  return kExitOk;
}

int cmd_apply(const ApplyFlags& f, std::ostream& out) {
  if (!(f.eps > 0.0 && f.eps < 0.5)) reject("--eps must lie in (0, 0.5)");
  const fs::path dir = prepare_out_dir(f.out);
  const ScalingParams params = params_from_json(read_text_file(f.params));
  PredictionTable table = read_prediction_table(f.predictions);
  params.validate_for(table.classes.size());
  if (params.scope == ScalingScope::kPerClass && params.classes != table.classes) {
    throw ValidationError(ErrorKind::kClassMismatch,
                          "per-class parameters were fitted on different classes");
  }
  if (f.probabilities) {
    for (double& v : table.values.values()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError(ErrorKind::kOutOfRange,
                              f.predictions + ": probability outside [0, 1]");
      }
      v = inverse_sigmoid(v, f.eps);
    }
  }
  const ConfidenceMatrix calibrated = apply_scaling(table.values, params);
  const fs::path path = dir / "calibrated_predictions.csv";
  write_matrix_csv(path, table.classes, table.sample_ids, calibrated.values());
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

int cmd_synth(const SynthFlags& f, std::ostream& out) {
  SynthConfig config;
  config.num_samples = f.n;
  config.num_classes = f.c;
  config.true_t = f.true_t;
  config.true_b = f.true_b;
  config.latent.mean = f.latent_mean;
  config.latent.stddev = f.latent_std;
  config.seed = f.seed;
  config.dataset_id = f.dataset_id;
  config.clip_duration_s = f.clip_duration;
  if (config.latent.mean.empty() && !config.latent.stddev.empty()) {
    reject("--latent-std requires --latent-mean");
  }
  config.validate();
  const fs::path dir = prepare_out_dir(f.out);
  write_synth_files(generate(config), dir);
  out << "wrote " << (dir / "predictions.csv").string() << ", labels.csv, "
      << "manifest.json, ground_truth.json\n";
  return kExitOk;
}

int cmd_plot(const PlotFlags& f, std::ostream& out) {
  const Report report = report_from_json(read_text_file(f.report));
  const std::string scope = f.scope == "pooled" ? std::string(kAllScope) : f.scope;
  std::vector<ReportRow> rows;
  for (const auto& row : report.rows) {
    if (row.scope == scope) rows.push_back(row);
  }
  if (rows.empty()) {
    throw ValidationError(ErrorKind::kInvalidArgument,
                          "report has no rows for scope '" + f.scope + "'");
  }
  const fs::path dir = prepare_out_dir(f.out);
  const fs::path path = dir / ("reliability_" + safe_name(f.scope) + ".svg");
  write_text_file(path, render_rows_svg(rows, rows.front().model + " / " + scope));
  out << "wrote " << path.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"calibkit: calibration metrics and post hoc scaling for "
               "multi-label classifiers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  DataFlags eval_flags;
  auto* evaluate = app.add_subcommand("evaluate", "Compute cmAP, ECE, MCS, OCS and UCS");
  add_data_flags(*evaluate, eval_flags);

  DataFlags fit_data;
  FitFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "Fit temperature or Platt scaling");
  add_data_flags(*fit_cmd, fit_data);
  fit_cmd->add_option("--method", fit_flags.method, "ts or ps")->required();
  fit_cmd->add_option("--scope", fit_flags.scope, "global or per-class");
  fit_cmd->add_option("--lr", fit_flags.lr, "Adam learning rate");
  fit_cmd->add_option("--steps", fit_flags.steps, "Adam steps");
  fit_cmd->add_flag("--record-history", fit_flags.record_history,
                    "Store the per-step NLL in the params file");

  ApplyFlags apply_flags;
  auto* apply = app.add_subcommand("apply", "Apply fitted parameters to predictions");
  apply->add_option("--predictions", apply_flags.predictions, "Predictions CSV")->required();
  apply->add_option("--params", apply_flags.params, "Scaling params JSON")->required();
  apply->add_flag("--probabilities", apply_flags.probabilities,
                  "Prediction cells are probabilities rather than logits");
  apply->add_option("--eps", apply_flags.eps, "Clamp for probability-to-logit recovery");
  apply->add_option("--out", apply_flags.out, "Output directory");

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--seed", synth_flags.seed, "PRNG seed");
  synth->add_option("--n", synth_flags.n, "Number of samples");
  synth->add_option("--c", synth_flags.c, "Number of classes");
  synth->add_option("--true-t", synth_flags.true_t, "True temperature (1 or C values)")
      ->delimiter(',');
  synth->add_option("--true-b", synth_flags.true_b, "True bias (1 or C values)")
      ->delimiter(',');
  synth->add_option("--latent-mean", synth_flags.latent_mean,
                    "Latent logit mean (1 or C values)")
      ->delimiter(',');
  synth->add_option("--latent-std", synth_flags.latent_std,
                    "Latent logit stddev (1 or C values)")
      ->delimiter(',');
  synth->add_option("--dataset-id", synth_flags.dataset_id, "Dataset id");
  synth->add_option("--clip-duration", synth_flags.clip_duration, "Clip length in seconds");
  synth->add_option("--out", synth_flags.out, "Output directory");

  PlotFlags plot_flags;
  auto* plot = app.add_subcommand("plot", "Render a reliability diagram from a report");
  plot->add_option("--report", plot_flags.report, "Report JSON")->required();
  plot->add_option("--scope", plot_flags.scope, "pooled or a dataset id");
  plot->add_option("--out", plot_flags.out, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (*evaluate) return cmd_evaluate(eval_flags, out);
    if (*fit_cmd) return cmd_fit(fit_data, fit_flags, out);
    if (*apply) return cmd_apply(apply_flags, out);
    if (*synth) return cmd_synth(synth_flags, out);
    if (*plot) return cmd_plot(plot_flags, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitValidation;
}

}  // namespace calibkit::cli

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
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "calibkit/error.h"

namespace calibkit {
namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw ValidationError(ErrorKind::kInvalidArgument, message);
}

// One dataset's contribution to an evaluation scope.
struct ScopePart {
  const EvalDataset* dataset;
  ConfidenceMatrix probs;
};

// Builds the metric columns of a scope. Classes are matched by name across
// parts, in order of first appearance; each class column concatenates the
// parts that carry it, in part order.
ReportRow evaluate_scope(const std::string& scope,
                         const std::vector<ScopePart>& parts,
                         const BenchmarkOptions& options) {
  std::vector<std::string> classes;
  std::unordered_map<std::string, std::size_t> class_slot;
  std::size_t n_samples = 0;
  for (const auto& part : parts) {
    n_samples += part.dataset->num_samples();
    for (const auto& name : part.dataset->classes()) {
      if (class_slot.try_emplace(name, classes.size()).second) {
        classes.push_back(name);
      }
    }
  }

  std::vector<std::vector<double>> conf(classes.size());
  std::vector<std::vector<std::uint8_t>> labels(classes.size());
  std::vector<double> pooled_conf;
  std::vector<std::uint8_t> pooled_labels;
  for (const auto& part : parts) {
    const EvalDataset& d = *part.dataset;
    for (std::size_t c = 0; c < d.num_classes(); ++c) {
      const std::size_t slot = class_slot.at(d.classes()[c]);
      for (std::size_t r = 0; r < d.num_samples(); ++r) {
        conf[slot].push_back(part.probs(r, c));
        labels[slot].push_back(d.labels()(r, c));
      }
    }
    const auto values = part.probs.values().values();
    pooled_conf.insert(pooled_conf.end(), values.begin(), values.end());
    const auto flat = d.labels().values();
    pooled_labels.insert(pooled_labels.end(), flat.begin(), flat.end());
  }

  ReportRow row;
  row.model = options.model;
  row.scope = scope;
  row.n_samples = n_samples;
  row.n_classes = classes.size();

  std::vector<ClassMetrics> per_class;
  per_class.reserve(classes.size());
  std::vector<std::size_t> counts;
  double ap_sum = 0.0;
  std::size_t ap_defined = 0;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    ClassMetrics m;
    m.class_name = classes[c];
    m.class_index = c;
    m.n_pos = static_cast<std::size_t>(
        std::count(labels[c].begin(), labels[c].end(), std::uint8_t{1}));
    m.ap = average_precision(conf[c], labels[c]);
    m.scores = calibration_scores(
        bin_class(conf[c], labels[c], options.num_bins, m.class_name));
    m.scores.weight = static_cast<double>(m.n_pos);
    if (m.ap) {
      ap_sum += *m.ap;
      ++ap_defined;
    }
    counts.push_back(m.n_pos);
    per_class.push_back(std::move(m));
  }
  if (ap_defined > 0) row.cmap = ap_sum / static_cast<double>(ap_defined);
  row.scores = aggregate_multilabel(per_class, scope);

  const SubsetAssignment assignment =
      frequent_rare_split(counts, classes, options.target_fraction);
  SubsetSummary subsets;
  subsets.k = assignment.k;
  subsets.target_fraction = options.target_fraction;
  subsets.mass_fraction = assignment.mass_fraction;
  const auto fill = [&](const std::vector<std::size_t>& members,
                        SubsetScores& out, const char* name) {
    std::vector<ClassMetrics> chosen;
    for (const std::size_t c : members) {
      out.classes.push_back(classes[c]);
      chosen.push_back(per_class[c]);
    }
    if (!chosen.empty()) out.scores = aggregate_multilabel(chosen, scope + "/" + name);
  };
  fill(assignment.frequent, subsets.frequent, "frequent");
  fill(assignment.rare, subsets.rare, "rare");
  row.subsets = std::move(subsets);

  row.pooled_curve =
      bin_class(pooled_conf, pooled_labels, options.num_bins, scope + "/pooled");
  if (options.per_class_table) row.per_class = std::move(per_class);
  return row;
}

void set_relative(ReportRow& row, const ReportRow& base) {
  row.relative_improvement_pct = relative_improvement(base.scores.mcs, row.scores.mcs);
  if (!row.relative_improvement_pct) {
    row.relative_improvement_note = std::string(kAlreadyPerfect);
  }
}

void check_options(std::span<const EvalDataset> datasets,
                   const BenchmarkOptions& options) {
  if (options.num_bins < 1) invalid("number of bins must be >= 1");
  if (!(options.target_fraction > 0.0 && options.target_fraction < 1.0)) {
    invalid("target fraction must lie in (0, 1)");
  }
  if (options.split) options.split->validate();
  if (datasets.empty()) invalid("no datasets to evaluate");
  for (const auto& d : datasets) {
    if (d.num_samples() == 0) invalid("dataset has no samples");
    const std::string id = d.dataset_id();
    for (const auto& m : d.meta()) {
      if (m.dataset_id != id) {
        invalid("dataset mixes dataset_ids '" + id + "' and '" + m.dataset_id +
                "'; partition it first");
      }
    }
  }
}

std::string describe_fit(const std::string& dataset_id, const std::string& rule,
                         std::size_t n) {
  std::ostringstream out;
  out << dataset_id << ": " << rule << " (" << n << " samples)";
  return out.str();
}

}  // namespace

SplitSpec SplitSpec::first_minutes(double minutes) {
  SplitSpec spec;
  spec.kind = Kind::kFirstMinutes;
  spec.minutes = minutes;
  return spec;
}

SplitSpec SplitSpec::held_out(std::string dataset_id) {
  SplitSpec spec;
  spec.kind = Kind::kHeldOutDataset;
  spec.calibration_dataset = std::move(dataset_id);
  return spec;
}

void SplitSpec::validate() const {
  if (kind == Kind::kFirstMinutes && !(minutes > 0.0 && std::isfinite(minutes))) {
    invalid("first-minutes split requires minutes > 0");
  }
  if (kind == Kind::kHeldOutDataset && calibration_dataset.empty()) {
    invalid("held-out split requires a calibration dataset id");
  }
}

std::string SplitSpec::describe() const {
  if (kind == Kind::kHeldOutDataset) {
    return "held-out dataset " + calibration_dataset;
  }
  std::ostringstream out;
  out << "first " << minutes << " minutes per dataset";
  return out.str();
}

SplitIndices split_first_minutes(const EvalDataset& dataset, double minutes) {
  SplitSpec::first_minutes(minutes).validate();
  const double window_s = minutes * 60.0;

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dataset.num_samples(); ++i) {
    const auto& id = dataset.meta()[i].dataset_id;
    auto [it, inserted] = groups.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.push_back(i);
  }

  SplitIndices split;
  const auto& meta = dataset.meta();
  for (const auto& id : order) {
    auto& rows = groups[id];
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      if (meta[a].start_s != meta[b].start_s) return meta[a].start_s < meta[b].start_s;
      return meta[a].sample_id < meta[b].sample_id;
    });
    double elapsed = 0.0;
    std::size_t evaluation = 0;
    for (const std::size_t r : rows) {
      if (elapsed < window_s) {
        split.calibration.push_back(r);
      } else {
        split.evaluation.push_back(r);
        ++evaluation;
      }
      elapsed += meta[r].duration_s;
    }
    if (evaluation == 0) {
      throw ValidationError(ErrorKind::kInvalidArgument,
                            "calibration window consumes entire dataset '" + id + "'");
    }
  }
  std::sort(split.calibration.begin(), split.calibration.end());
  std::sort(split.evaluation.begin(), split.evaluation.end());
  return split;
}

SubsetAssignment frequent_rare_split(std::span<const std::size_t> counts,
                                     std::span<const std::string> class_names,
                                     double target_fraction) {
  if (counts.size() != class_names.size()) {
    throw ValidationError(ErrorKind::kShapeMismatch,
                          "counts and class names differ in length");
  }
  if (!(target_fraction > 0.0 && target_fraction < 1.0)) {
    invalid("target fraction must lie in (0, 1)");
  }
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) {
    throw ValidationError(ErrorKind::kUndefined,
                          "frequent/rare split needs at least one positive label");
  }
  std::vector<std::size_t> ranked;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0) ranked.push_back(c);
  }
  std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return class_names[a] < class_names[b];
  });

  SubsetAssignment out;
  const double target = target_fraction * static_cast<double>(total);
  std::size_t covered = 0;
  std::size_t k = 0;
  while (k < ranked.size() && static_cast<double>(covered) < target) {
    covered += counts[ranked[k]];
    ++k;
  }
  out.frequent.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
  out.rare.assign(ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end());
  out.k = k;
  out.mass_fraction = static_cast<double>(covered) / static_cast<double>(total);
  return out;
}

std::string MethodSpec::name() const {
  std::string out(to_string(method));
  out += scope == ScalingScope::kGlobal ? "_global" : "_per_class";
  return out;
}

BenchmarkResult run_benchmark(std::span<const EvalDataset> datasets,
                              const BenchmarkOptions& options) {
  check_options(datasets, options);
  BenchmarkResult result;

  const auto make_row = [&](const std::string& scope, std::vector<ScopePart> parts,
                            std::string method, std::string evaluated_on) {
    ReportRow row = evaluate_scope(scope, parts, options);
    row.method = std::move(method);
    row.evaluated_on = std::move(evaluated_on);
    return row;
  };
  const std::string all(kAllScope);

  if (!options.split && options.methods.empty()) {
    std::vector<ScopePart> all_parts;
    for (const auto& d : datasets) {
      ScopePart part{&d, d.base_confidences()};
      result.rows.push_back(make_row(d.dataset_id(), {part}, "base", "full"));
      all_parts.push_back(std::move(part));
    }
    result.rows.push_back(make_row(all, std::move(all_parts), "base", "full"));
    mark_best(result.rows);
    return result;
  }

  const bool first_minutes =
      options.split && options.split->kind == SplitSpec::Kind::kFirstMinutes;
  const bool held_out =
      options.split && options.split->kind == SplitSpec::Kind::kHeldOutDataset;

  // Held-out calibration data and the datasets it is evaluated on.
  const EvalDataset* calibration = nullptr;
  std::vector<const EvalDataset*> targets;
  if (held_out) {
    const std::string& id = options.split->calibration_dataset;
    if (options.calibration_dataset) {
      calibration = &*options.calibration_dataset;
    }
    for (const auto& d : datasets) {
      if (d.dataset_id() == id) {
        if (!calibration) calibration = &d;
      } else {
        targets.push_back(&d);
      }
    }
    if (!calibration) {
      throw ValidationError(ErrorKind::kUnknownSampleId,
                            "calibration dataset '" + id + "' not found");
    }
    if (targets.empty()) invalid("held-out split leaves no dataset to evaluate");
  } else {
    for (const auto& d : datasets) targets.push_back(&d);
  }

  // Evaluation-side subsets kept alive for the All scope.
  std::vector<EvalDataset> evaluation_sets;
  evaluation_sets.reserve(targets.size());
  std::vector<ScalingParams> held_out_params;
  if (held_out) {
    for (const auto& m : options.methods) {
      if (m.scope == ScalingScope::kPerClass) {
        for (const auto* t : targets) {
          if (t->classes() != calibration->classes()) {
            throw ValidationError(ErrorKind::kClassMismatch,
                                  "per-class fitting requires matching classes");
          }
        }
      }
      FitResult fitted = fit(calibration->logits(), calibration->labels(),
                             calibration->classes(), m.method, m.scope, options.adam,
                             describe_fit(calibration->dataset_id(), "held-out dataset",
                                          calibration->num_samples()));
      result.fitted.push_back({calibration->dataset_id(), fitted.params});
      held_out_params.push_back(std::move(fitted.params));
    }
  }

  struct MethodRows {
    std::vector<ScopePart> all_parts;
  };
  std::vector<ScopePart> all_full, all_base;
  std::vector<MethodRows> all_methods(options.methods.size());

  for (std::size_t t = 0; t < targets.size(); ++t) {
    const EvalDataset& d = *targets[t];
    const std::string id = d.dataset_id();
    const EvalDataset* fit_on = &d;
    std::optional<EvalDataset> calibration_side;
    std::string evaluated_on = "full";
    if (first_minutes) {
      const SplitIndices split = split_first_minutes(d, options.split->minutes);
      calibration_side = d.subset(split.calibration);
      evaluation_sets.push_back(d.subset(split.evaluation));
      fit_on = &*calibration_side;
      evaluated_on = "remainder";
    } else {
      evaluation_sets.push_back(d);
    }
    const EvalDataset& eval = evaluation_sets.back();

    std::optional<ReportRow> full_row;
    if (first_minutes) {
      ScopePart part{&d, d.base_confidences()};
      full_row = make_row(id, {part}, "base_full", "full");
      all_full.push_back(std::move(part));
    }
    ScopePart base_part{&eval, eval.base_confidences()};
    ReportRow base = make_row(id, {base_part}, "base", evaluated_on);
    all_base.push_back(std::move(base_part));
    if (full_row) base.delta_mcs_vs_full = base.scores.mcs - full_row->scores.mcs;

    std::vector<ReportRow> method_rows;
    for (std::size_t k = 0; k < options.methods.size(); ++k) {
      const MethodSpec& m = options.methods[k];
      ScalingParams params;
      if (held_out) {
        params = held_out_params[k];
      } else {
        const std::string rule =
            first_minutes ? options.split->describe() : std::string("full dataset");
        FitResult fitted = fit(fit_on->logits(), fit_on->labels(), fit_on->classes(),
                               m.method, m.scope, options.adam,
                               describe_fit(id, rule, fit_on->num_samples()));
        params = std::move(fitted.params);
        result.fitted.push_back({id, params});
      }
      ScopePart part{&eval, apply_scaling(eval.logits(), params)};
      ReportRow row = make_row(id, {part}, m.name(), evaluated_on);
      all_methods[k].all_parts.push_back(std::move(part));
      set_relative(row, base);
      row.params = params;
      method_rows.push_back(std::move(row));
    }

    if (full_row) result.rows.push_back(std::move(*full_row));
    result.rows.push_back(std::move(base));
    for (auto& row : method_rows) result.rows.push_back(std::move(row));
  }

  const std::string all_evaluated_on = first_minutes ? "remainder" : "full";
  std::optional<ReportRow> all_full_row;
  if (first_minutes) all_full_row = make_row(all, std::move(all_full), "base_full", "full");
  ReportRow all_base_row = make_row(all, std::move(all_base), "base", all_evaluated_on);
  if (all_full_row) {
    all_base_row.delta_mcs_vs_full = all_base_row.scores.mcs - all_full_row->scores.mcs;
    result.rows.push_back(std::move(*all_full_row));
  }
  std::vector<ReportRow> all_method_rows;
  for (std::size_t k = 0; k < options.methods.size(); ++k) {
    ReportRow row = make_row(all, std::move(all_methods[k].all_parts),
                             options.methods[k].name(), all_evaluated_on);
    set_relative(row, all_base_row);
    if (held_out) row.params = held_out_params[k];
    all_method_rows.push_back(std::move(row));
  }
  result.rows.push_back(std::move(all_base_row));
  for (auto& row : all_method_rows) result.rows.push_back(std::move(row));
  mark_best(result.rows);
  return result;
}

}  // namespace calibkit

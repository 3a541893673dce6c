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

#include "calibkit/scaling.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "calibkit/error.h"
#include "json.hpp"

namespace calibkit {
namespace {

using json = nlohmann::json;

struct Pair {
  double tau = 0.0;
  double bias = 0.0;
};

struct PairGradient {
  double tau = 0.0;
  double bias = 0.0;
};

const double kMaxTermLoss = -std::log(kLogClamp);

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// BCE of sigmoid(u) against y, evaluated in log space and capped where the
// probability clamp would bind.
double clamped_bce(double u, std::uint8_t y) {
  return std::min(softplus(y ? -u : u), kMaxTermLoss);
}

// Sum of BCE terms over the entries, one shared (tau, bias).
double nll_sum(std::span<const double> z, std::span<const std::uint8_t> y,
               Pair theta) {
  const double t = std::exp(theta.tau);
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    sum += clamped_bce(z[k] / t + theta.bias, y[k]);
  }
  return sum;
}

// Summed d/dtau and d/dbias of the BCE terms. With u = z exp(-tau) + b,
// dl/du = p - y and du/dtau = -z / T. Capped terms are flat.
PairGradient gradient_sum(std::span<const double> z,
                          std::span<const std::uint8_t> y, Pair theta) {
  const double t = std::exp(theta.tau);
  PairGradient g;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double scaled = z[k] / t;
    const double u = scaled + theta.bias;
    if (softplus(y[k] ? -u : u) > kMaxTermLoss) continue;
    const double residual = sigmoid(u) - y[k];
    g.tau -= residual * scaled;
    g.bias += residual;
  }
  return g;
}

void check_label_shape(const Matrix<double>& logits, const LabelMatrix& labels) {
  if (logits.rows() != labels.rows() || logits.cols() != labels.cols()) {
    throw ValidationError(ErrorKind::kShapeMismatch,
                          "logits and labels differ in shape");
  }
}

void check_config(const AdamConfig& config) {
  const bool ok = config.learning_rate > 0.0 && std::isfinite(config.learning_rate) &&
                  config.steps >= 1 && config.beta1 >= 0.0 && config.beta1 < 1.0 &&
                  config.beta2 >= 0.0 && config.beta2 < 1.0 && config.epsilon > 0.0;
  if (!ok) {
    throw ValidationError(ErrorKind::kInvalidArgument,
                          "invalid optimizer configuration");
  }
}

struct AdamRun {
  Pair theta;
  std::vector<double> history;  // mean NLL after each step, if recorded
  double nll_initial = 0.0;
  double nll_final = 0.0;
  double grad_norm_final = 0.0;
};

// Full-batch Adam over one (tau, bias) pair shared by all entries. The
// objective is the mean BCE over the entries.
AdamRun run_adam(std::span<const double> z, std::span<const std::uint8_t> y,
                 ScalingMethod method, const AdamConfig& config) {
  const bool fit_bias = method == ScalingMethod::kPlatt;
  const auto count = static_cast<double>(z.size());
  AdamRun run;
  run.nll_initial = nll_sum(z, y, run.theta) / count;

  double m_tau = 0.0, v_tau = 0.0, m_bias = 0.0, v_bias = 0.0;
  double beta1_power = 1.0, beta2_power = 1.0;
  for (int step = 1; step <= config.steps; ++step) {
    const PairGradient sum = gradient_sum(z, y, run.theta);
    const double g_tau = sum.tau / count;
    const double g_bias = sum.bias / count;
    if (!std::isfinite(g_tau) || !std::isfinite(g_bias)) {
      std::ostringstream msg;
      msg << "non-finite gradient at step " << step << " (tau=" << run.theta.tau
          << ", bias=" << run.theta.bias << ")";
      throw NumericalError(msg.str());
    }
    beta1_power *= config.beta1;
    beta2_power *= config.beta2;
    const auto update = [&](double g, double& m, double& v, double& param) {
      m = config.beta1 * m + (1.0 - config.beta1) * g;
      v = config.beta2 * v + (1.0 - config.beta2) * g * g;
      const double m_hat = m / (1.0 - beta1_power);
      const double v_hat = v / (1.0 - beta2_power);
      param -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    };
    update(g_tau, m_tau, v_tau, run.theta.tau);
    if (fit_bias) update(g_bias, m_bias, v_bias, run.theta.bias);
    if (config.record_history) {
      run.history.push_back(nll_sum(z, y, run.theta) / count);
    }
  }
  run.nll_final = nll_sum(z, y, run.theta) / count;
  const PairGradient last = gradient_sum(z, y, run.theta);
  const double g_tau = last.tau / count;
  const double g_bias = fit_bias ? last.bias / count : 0.0;
  run.grad_norm_final = std::sqrt(g_tau * g_tau + g_bias * g_bias);
  if (!std::isfinite(run.nll_final) || !std::isfinite(run.theta.tau) ||
      !std::isfinite(run.theta.bias)) {
    throw NumericalError("optimizer diverged to a non-finite value");
  }
  return run;
}

template <typename T>
std::vector<T> column_of(const Matrix<T>& m, std::size_t c) {
  return m.column(c);
}

}  // namespace

std::string_view to_string(ScalingMethod method) {
  return method == ScalingMethod::kTemperature ? "ts" : "ps";
}

std::string_view to_string(ScalingScope scope) {
  return scope == ScalingScope::kGlobal ? "global" : "per-class";
}

ScalingMethod parse_method(std::string_view text) {
  if (text == "ts" || text == "temperature") return ScalingMethod::kTemperature;
  if (text == "ps" || text == "platt") return ScalingMethod::kPlatt;
  throw ValidationError(ErrorKind::kInvalidArgument,
                        "unknown scaling method '" + std::string(text) + "'");
}

ScalingScope parse_scope(std::string_view text) {
  if (text == "global") return ScalingScope::kGlobal;
  if (text == "per-class") return ScalingScope::kPerClass;
  throw ValidationError(ErrorKind::kInvalidArgument,
                        "unknown scaling scope '" + std::string(text) + "'");
}

ScalingParams ScalingParams::identity(ScalingMethod method) {
  ScalingParams params;
  params.method = method;
  params.scope = ScalingScope::kGlobal;
  return params;
}

ScalingParams ScalingParams::identity_per_class(ScalingMethod method,
                                                std::vector<std::string> classes) {
  ScalingParams params;
  params.method = method;
  params.scope = ScalingScope::kPerClass;
  params.tau.assign(classes.size(), 0.0);
  params.bias.assign(classes.size(), 0.0);
  params.classes = std::move(classes);
  return params;
}

double ScalingParams::tau_for(std::size_t column) const {
  return scope == ScalingScope::kGlobal ? tau.at(0) : tau.at(column);
}

double ScalingParams::temperature(std::size_t column) const {
  return std::exp(tau_for(column));
}

double ScalingParams::bias_for(std::size_t column) const {
  return scope == ScalingScope::kGlobal ? bias.at(0) : bias.at(column);
}

void ScalingParams::validate_for(std::size_t num_classes) const {
  if (tau.size() != bias.size()) {
    throw ValidationError(ErrorKind::kShapeMismatch,
                          "tau and bias differ in length");
  }
  if (scope == ScalingScope::kGlobal && tau.size() != 1) {
    throw ValidationError(ErrorKind::kShapeMismatch,
                          "global parameters must hold exactly one pair");
  }
  if (scope == ScalingScope::kPerClass && tau.size() != num_classes) {
    std::ostringstream msg;
    msg << "per-class parameters hold " << tau.size() << " classes, data has "
        << num_classes;
    throw ValidationError(ErrorKind::kShapeMismatch, msg.str());
  }
  for (std::size_t k = 0; k < tau.size(); ++k) {
    if (!std::isfinite(tau[k]) || !std::isfinite(bias[k])) {
      throw ValidationError(ErrorKind::kNonFinite, "non-finite scaling parameter");
    }
    if (method == ScalingMethod::kTemperature && bias[k] != 0.0) {
      throw ValidationError(ErrorKind::kInvalidArgument,
                            "temperature scaling requires zero bias");
    }
  }
}

double ParamGradient::norm(bool include_bias) const {
  double sq = 0.0;
  for (const double g : tau) sq += g * g;
  if (include_bias) {
    for (const double g : bias) sq += g * g;
  }
  return std::sqrt(sq);
}

ConfidenceMatrix apply_scaling(const Matrix<double>& logits,
                               const ScalingParams& params) {
  params.validate_for(logits.cols());
  Matrix<double> out(logits.rows(), logits.cols());
  for (std::size_t c = 0; c < logits.cols(); ++c) {
    const double t = params.temperature(c);
    const double b = params.bias_for(c);
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      out(r, c) = sigmoid(logits(r, c) / t + b);
    }
  }
  return ConfidenceMatrix(std::move(out));
}

double bce_nll(const Matrix<double>& logits, const LabelMatrix& labels,
               const ScalingParams& params) {
  check_label_shape(logits, labels);
  params.validate_for(logits.cols());
  if (logits.empty()) {
    throw ValidationError(ErrorKind::kUndefined, "NLL of an empty matrix");
  }
  if (params.scope == ScalingScope::kGlobal) {
    return nll_sum(logits.values(), labels.values(),
                   {params.tau[0], params.bias[0]}) /
           static_cast<double>(logits.size());
  }
  double sum = 0.0;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      const double u = logits(r, c) / params.temperature(c) + params.bias[c];
      sum += clamped_bce(u, labels(r, c));
    }
  }
  return sum / static_cast<double>(logits.size());
}

ParamGradient gradients(const Matrix<double>& logits, const LabelMatrix& labels,
                        const ScalingParams& params) {
  check_label_shape(logits, labels);
  params.validate_for(logits.cols());
  if (logits.empty()) {
    throw ValidationError(ErrorKind::kUndefined, "gradient of an empty matrix");
  }
  const auto count = static_cast<double>(logits.size());
  ParamGradient grad;
  if (params.scope == ScalingScope::kGlobal) {
    const PairGradient g = gradient_sum(logits.values(), labels.values(),
                                        {params.tau[0], params.bias[0]});
    grad.tau = {g.tau / count};
    grad.bias = {g.bias / count};
    return grad;
  }
  grad.tau.resize(logits.cols());
  grad.bias.resize(logits.cols());
  for (std::size_t c = 0; c < logits.cols(); ++c) {
    const auto z = column_of(logits, c);
    const auto y = column_of(labels, c);
    const PairGradient g = gradient_sum(z, y, {params.tau[c], params.bias[c]});
    grad.tau[c] = g.tau / count;
    grad.bias[c] = g.bias / count;
  }
  return grad;
}

FitResult fit(const Matrix<double>& logits, const LabelMatrix& labels,
              std::span<const std::string> classes, ScalingMethod method,
              ScalingScope scope, const AdamConfig& config,
              std::string fitted_on) {
  check_label_shape(logits, labels);
  check_config(config);
  if (logits.empty()) {
    throw ValidationError(ErrorKind::kUndefined,
                          "cannot fit scaling parameters on zero labels");
  }
  if (scope == ScalingScope::kPerClass && classes.size() != logits.cols()) {
    throw ValidationError(ErrorKind::kShapeMismatch,
                          "class names do not match logit columns");
  }

  FitResult result;
  result.trace.config = config;
  result.trace.steps = config.steps;

  if (scope == ScalingScope::kGlobal) {
    const AdamRun run = run_adam(logits.values(), labels.values(), method, config);
    result.params = ScalingParams::identity(method);
    result.params.tau = {run.theta.tau};
    result.params.bias = {run.theta.bias};
    result.trace.nll_initial = run.nll_initial;
    result.trace.nll_final = run.nll_final;
    result.trace.grad_norm_final = run.grad_norm_final;
    result.trace.nll_history = run.history;
  } else {
    result.params = ScalingParams::identity_per_class(
        method, std::vector<std::string>(classes.begin(), classes.end()));
    const std::size_t num_classes = logits.cols();
    double initial_sum = 0.0;
    double final_sum = 0.0;
    double worst_grad = 0.0;
    std::vector<double> history_sum(config.record_history ? config.steps : 0, 0.0);
    for (std::size_t c = 0; c < num_classes; ++c) {
      const auto z = column_of(logits, c);
      const auto y = column_of(labels, c);
      const bool has_positive = std::find(y.begin(), y.end(), 1) != y.end();
      if (!has_positive) {
        // Identity fallback: an all-negative column drives the bias to -inf.
        const double nll = nll_sum(z, y, {}) / static_cast<double>(z.size());
        initial_sum += nll;
        final_sum += nll;
        for (double& h : history_sum) h += nll;
        continue;
      }
      const AdamRun run = run_adam(z, y, method, config);
      result.params.tau[c] = run.theta.tau;
      result.params.bias[c] = run.theta.bias;
      initial_sum += run.nll_initial;
      final_sum += run.nll_final;
      worst_grad = std::max(worst_grad, run.grad_norm_final);
      for (std::size_t s = 0; s < run.history.size(); ++s) {
        history_sum[s] += run.history[s];
      }
    }
    const auto cols = static_cast<double>(num_classes);
    result.trace.nll_initial = initial_sum / cols;
    result.trace.nll_final = final_sum / cols;
    result.trace.grad_norm_final = worst_grad;
    for (double& h : history_sum) h /= cols;
    result.trace.nll_history = std::move(history_sum);
  }
  result.params.fitted_on = std::move(fitted_on);
  result.params.trace = result.trace;
  return result;
}

namespace {

json vector_or_scalar(const ScalingParams& params, const std::vector<double>& v) {
  if (params.scope == ScalingScope::kGlobal) return v.at(0);
  return v;
}

std::vector<double> read_values(const json& doc, const char* key,
                                ScalingScope scope) {
  const json& node = doc.at(key);
  if (scope == ScalingScope::kGlobal) {
    if (!node.is_number()) {
      throw ValidationError(ErrorKind::kParse,
                            std::string("'") + key + "' must be a number");
    }
    return {node.get<double>()};
  }
  if (!node.is_array()) {
    throw ValidationError(ErrorKind::kParse,
                          std::string("'") + key + "' must be an array");
  }
  return node.get<std::vector<double>>();
}

}  // namespace

std::string params_to_json(const ScalingParams& params) {
  json doc;
  doc["schema"] = "calibkit.scaling_params";
  doc["version"] = 1;
  doc["method"] = to_string(params.method);
  doc["scope"] = to_string(params.scope);
  if (params.scope == ScalingScope::kPerClass) doc["classes"] = params.classes;
  doc["parameterization"] = "p = sigmoid(z / T + b), T = exp(tau)";
  std::vector<double> temperatures;
  for (const double tau : params.tau) temperatures.push_back(std::exp(tau));
  doc["T"] = vector_or_scalar(params, temperatures);
  doc["b"] = vector_or_scalar(params, params.bias);
  doc["tau"] = vector_or_scalar(params, params.tau);
  doc["fitted_on"] = params.fitted_on;
  if (params.trace) {
    const FitTrace& t = *params.trace;
    json trace;
    trace["steps"] = t.steps;
    trace["nll_initial"] = t.nll_initial;
    trace["nll_final"] = t.nll_final;
    trace["grad_norm_final"] = t.grad_norm_final;
    trace["optimizer"] = {{"name", "adam"},
                          {"learning_rate", t.config.learning_rate},
                          {"steps", t.config.steps},
                          {"beta1", t.config.beta1},
                          {"beta2", t.config.beta2},
                          {"epsilon", t.config.epsilon},
                          {"record_history", t.config.record_history},
                          {"init", "tau=0, b=0"}};
    if (!t.nll_history.empty()) trace["nll_history"] = t.nll_history;
    doc["trace"] = std::move(trace);
  }
  return doc.dump(2) + "\n";
}

ScalingParams params_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(ErrorKind::kParse,
                          std::string("scaling params: ") + e.what());
  }
  try {
    ScalingParams params;
    params.method = parse_method(doc.at("method").get<std::string>());
    params.scope = parse_scope(doc.at("scope").get<std::string>());
    if (params.scope == ScalingScope::kPerClass) {
      params.classes = doc.at("classes").get<std::vector<std::string>>();
    }
    if (doc.contains("tau")) {
      params.tau = read_values(doc, "tau", params.scope);
    } else {
      params.tau = read_values(doc, "T", params.scope);
      for (double& t : params.tau) {
        if (!(t > 0.0)) {
          throw ValidationError(ErrorKind::kOutOfRange, "T must be > 0");
        }
        t = std::log(t);
      }
    }
    params.bias = doc.contains("b") ? read_values(doc, "b", params.scope)
                                    : std::vector<double>(params.tau.size(), 0.0);
    params.fitted_on = doc.value("fitted_on", std::string());
    if (doc.contains("trace")) {
      const json& t = doc.at("trace");
      FitTrace trace;
      trace.steps = t.at("steps").get<int>();
      trace.nll_initial = t.at("nll_initial").get<double>();
      trace.nll_final = t.at("nll_final").get<double>();
      trace.grad_norm_final = t.at("grad_norm_final").get<double>();
      const json& o = t.at("optimizer");
      trace.config.learning_rate = o.at("learning_rate").get<double>();
      trace.config.steps = o.at("steps").get<int>();
      trace.config.beta1 = o.at("beta1").get<double>();
      trace.config.beta2 = o.at("beta2").get<double>();
      trace.config.epsilon = o.at("epsilon").get<double>();
      trace.config.record_history = o.value("record_history", false);
      if (t.contains("nll_history")) {
        trace.nll_history = t.at("nll_history").get<std::vector<double>>();
      }
      params.trace = std::move(trace);
    }
    if (params.scope == ScalingScope::kPerClass &&
        params.classes.size() != params.tau.size()) {
      throw ValidationError(ErrorKind::kShapeMismatch,
                            "per-class parameters do not match class list");
    }
    params.validate_for(params.tau.size());
    return params;
  } catch (const json::exception& e) {
    throw ValidationError(ErrorKind::kParse,
                          std::string("scaling params: ") + e.what());
  }
}

}  // namespace calibkit

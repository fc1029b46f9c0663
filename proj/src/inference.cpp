/*
 * Copyright 2026 The fair-exit Authors.
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

#include "fairexit/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "fairexit/errors.hpp"
#include "fairexit/format.hpp"
#include "fairexit/tensor_ops.hpp"

namespace fairexit {

std::string exit_label(std::size_t exit, std::size_t num_exits) {
  return exit + 1 == num_exits ? "f" : std::to_string(exit + 1);
}

void InferenceConfig::validate(std::size_t num_exits) const {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw ConfigError("inference.theta must lie in [0, 1], got " + format_double(theta));
  }
  if (mode == ExitMode::kFixedExit && fixed_exit >= num_exits) {
    throw ConfigError("inference.fixed_exit " + std::to_string(fixed_exit + 1) +
                      " out of range (model has " + std::to_string(num_exits) + " exits)");
  }
}

double confidence(std::span<const double> logits) {
  const auto p = softmax(logits);
  return *std::max_element(p.begin(), p.end());
}

std::size_t select_exit(std::span<const double> confidences, double theta) {
  if (confidences.empty()) throw DomainError("select_exit: no exits");
  const std::size_t final_exit = confidences.size() - 1;
  for (std::size_t k = 0; k < final_exit; ++k) {
    if (confidences[k] >= theta) return k;
  }
  return final_exit;
}

InferenceTrace& InferenceTrace::merge(const InferenceTrace& other) {
  if (histogram.empty()) histogram.assign(other.histogram.size(), 0);
  if (other.histogram.size() != histogram.size()) throw DimensionError("trace merge: exit count differs");
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
  for (std::size_t k = 0; k < histogram.size(); ++k) histogram[k] += other.histogram[k];
  return *this;
}

namespace {

void fill_outputs(const MultiExitModel& model, const Matrix& inputs, std::size_t begin,
                  std::size_t end, ExitOutputs& out) {
  std::vector<std::size_t> rows(end - begin);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = begin + i;
  const ForwardResult fwd = model.forward_all(inputs.gather_rows(rows));
  for (std::size_t k = 0; k < fwd.logits.size(); ++k) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto p = softmax(fwd.logits[k].row(i));
      const auto best = std::max_element(p.begin(), p.end());
      out.confidence[k][begin + i] = *best;
      out.prediction[k][begin + i] = static_cast<int>(best - p.begin());
    }
  }
}

}  // namespace

ExitOutputs compute_exit_outputs(const MultiExitModel& model, const Matrix& inputs,
                                 std::size_t threads) {
  const std::size_t m = inputs.rows();
  const std::size_t exits = model.num_exits();
  ExitOutputs out;
  out.confidence.assign(exits, std::vector<double>(m, 0.0));
  out.prediction.assign(exits, std::vector<int>(m, 0));
  if (m == 0) return out;
  if (inputs.cols() != model.config().input_dim) {
    throw DimensionError("inference: inputs have " + std::to_string(inputs.cols()) +
                         " features, model expects " + std::to_string(model.config().input_dim));
  }
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, m);
  if (workers == 1) {
    fill_outputs(model, inputs, 0, m, out);
    return out;
  }
  // Workers write disjoint sample ranges of pre-sized vectors.
  std::vector<std::thread> pool;
  const std::size_t chunk = (m + workers - 1) / workers;
  for (std::size_t begin = 0; begin < m; begin += chunk) {
    const std::size_t end = std::min(m, begin + chunk);
    pool.emplace_back([&, begin, end] { fill_outputs(model, inputs, begin, end, out); });
  }
  for (auto& t : pool) t.join();
  return out;
}

Predictions apply_policy(const ExitOutputs& outputs, const InferenceConfig& cfg) {
  const std::size_t exits = outputs.num_exits();
  cfg.validate(exits);
  Predictions result;
  result.trace.histogram.assign(exits, 0);
  std::vector<double> conf(exits);
  for (std::size_t i = 0; i < outputs.num_samples(); ++i) {
    std::size_t chosen = exits - 1;
    switch (cfg.mode) {
      case ExitMode::kEarlyExit:
        for (std::size_t k = 0; k < exits; ++k) conf[k] = outputs.confidence[k][i];
        chosen = select_exit(conf, cfg.theta);
        break;
      case ExitMode::kFixedExit:
        chosen = cfg.fixed_exit;
        break;
      case ExitMode::kFinalOnly:
        break;
    }
    const int label = outputs.prediction[chosen][i];
    result.labels.push_back(label);
    result.trace.entries.push_back({chosen, outputs.confidence[chosen][i], label});
    ++result.trace.histogram[chosen];
  }
  return result;
}

Predictions predict_batch(const MultiExitModel& model, const Matrix& inputs,
                          const InferenceConfig& cfg, std::size_t threads) {
  cfg.validate(model.num_exits());
  return apply_policy(compute_exit_outputs(model, inputs, threads), cfg);
}

EvalRow make_row(std::string key, const Predictions& predictions, const Dataset& data) {
  const FairnessReport report =
      evaluate(predictions.labels, data.targets, data.sensitive, data.num_classes);
  EvalRow row;
  row.key = std::move(key);
  row.accuracy = report.prf.overall_accuracy;
  row.eopp0 = report.eopp0;
  row.eopp1 = report.eopp1;
  row.eodd = report.eodd;
  row.histogram = predictions.trace.histogram;
  return row;
}

std::vector<EvalRow> sweep_theta(const MultiExitModel& model, const Dataset& data,
                                 std::span<const double> thetas, std::size_t threads) {
  if (thetas.empty()) throw ConfigError("sweep_theta: empty theta list");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!(thetas[i] >= 0.0 && thetas[i] <= 1.0)) {
      throw ConfigError("sweep_theta: theta " + format_double(thetas[i]) + " outside [0, 1]");
    }
    if (i > 0 && thetas[i] < thetas[i - 1]) {
      throw ConfigError("sweep_theta: thetas must be sorted ascending");
    }
  }
  const ExitOutputs outputs = compute_exit_outputs(model, data.features, threads);
  std::vector<EvalRow> rows;
  for (double theta : thetas) {
    rows.push_back(make_row(format_double(theta),
                            apply_policy(outputs, InferenceConfig::early_exit(theta)), data));
  }
  return rows;
}

std::vector<EvalRow> per_exit_eval(const MultiExitModel& model, const Dataset& data, double theta,
                                   std::size_t threads) {
  const ExitOutputs outputs = compute_exit_outputs(model, data.features, threads);
  const std::size_t exits = model.num_exits();
  std::vector<EvalRow> rows;
  for (std::size_t k = 0; k < exits; ++k) {
    rows.push_back(make_row(exit_label(k, exits), apply_policy(outputs, InferenceConfig::fixed(k)), data));
  }
  rows.push_back(make_row("policy", apply_policy(outputs, InferenceConfig::early_exit(theta)), data));
  return rows;
}

std::string rows_to_csv(const std::vector<EvalRow>& rows, const std::string& first_column,
                        std::size_t num_exits) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("nan"); };
  std::ostringstream out;
  out << first_column << ",accuracy,eopp0,eopp1,eodd";
  for (std::size_t k = 0; k < num_exits; ++k) out << ",hist_" << exit_label(k, num_exits);
  out << '\n';
  for (const auto& row : rows) {
    out << row.key << ',' << format_double(row.accuracy) << ',' << opt(row.eopp0) << ','
        << opt(row.eopp1) << ',' << opt(row.eodd);
    for (std::size_t h : row.histogram) out << ',' << h;
    out << '\n';
  }
  return out.str();
}

}  // namespace fairexit

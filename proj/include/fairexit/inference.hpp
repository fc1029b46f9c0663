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

#ifndef FAIREXIT_INFERENCE_HPP_
#define FAIREXIT_INFERENCE_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairexit/dataset.hpp"
#include "fairexit/metrics.hpp"
#include "fairexit/model.hpp"

namespace fairexit {

// Exits are indexed 0..num_exits-1 in code, shallow to deep, with the final
// classifier last. Tables and reports label them "1".."n" and "f".
std::string exit_label(std::size_t exit, std::size_t num_exits);

enum class ExitMode { kEarlyExit, kFixedExit, kFinalOnly };

struct InferenceConfig {
  double theta = 0.999;
  ExitMode mode = ExitMode::kEarlyExit;
  std::size_t fixed_exit = 0;  // used by kFixedExit

  // theta must lie in [0, 1]; a fixed exit must exist in the model.
  void validate(std::size_t num_exits) const;

  static InferenceConfig early_exit(double theta) { return {theta, ExitMode::kEarlyExit, 0}; }
  static InferenceConfig fixed(std::size_t exit) { return {0.999, ExitMode::kFixedExit, exit}; }
  static InferenceConfig final_only() { return {0.999, ExitMode::kFinalOnly, 0}; }
};

// Maximum softmax probability.
double confidence(std::span<const double> logits);

// Earliest internal exit whose confidence is >= theta, else the final exit
// (the last entry, which is never gated).
std::size_t select_exit(std::span<const double> confidences, double theta);

struct TraceEntry {
  std::size_t exit = 0;
  double confidence = 0.0;
  int prediction = 0;
};

struct InferenceTrace {
  std::vector<TraceEntry> entries;
  std::vector<std::size_t> histogram;  // samples per exit

  // Histogram addition for traces of disjoint batches.
  InferenceTrace& merge(const InferenceTrace& other);
};

struct Predictions {
  std::vector<int> labels;
  InferenceTrace trace;
};

// Confidence and argmax class of every exit for every sample, from one
// forward pass. Indexed [exit][sample].
struct ExitOutputs {
  std::vector<std::vector<double>> confidence;
  std::vector<std::vector<int>> prediction;

  std::size_t num_exits() const { return confidence.size(); }
  std::size_t num_samples() const { return confidence.empty() ? 0 : confidence.front().size(); }
};

// Shards rows over up to `threads` workers; the result does not depend on
// the thread count.
ExitOutputs compute_exit_outputs(const MultiExitModel& model, const Matrix& inputs,
                                 std::size_t threads = 1);

Predictions apply_policy(const ExitOutputs& outputs, const InferenceConfig& cfg);

Predictions predict_batch(const MultiExitModel& model, const Matrix& inputs,
                          const InferenceConfig& cfg, std::size_t threads = 1);

// One row of a sweep or per-exit table.
struct EvalRow {
  std::string key;  // theta value, exit label, or "policy"
  double accuracy = 0.0;
  std::optional<double> eopp0;
  std::optional<double> eopp1;
  std::optional<double> eodd;
  std::vector<std::size_t> histogram;
};

EvalRow make_row(std::string key, const Predictions& predictions, const Dataset& data);

// One row per theta (ascending, each in [0, 1]) from a single forward pass.
std::vector<EvalRow> sweep_theta(const MultiExitModel& model, const Dataset& data,
                                 std::span<const double> thetas, std::size_t threads = 1);

// Rows for every fixed exit 1..n, f, then the early-exit policy at `theta`.
std::vector<EvalRow> per_exit_eval(const MultiExitModel& model, const Dataset& data, double theta,
                                   std::size_t threads = 1);

// CSV with columns <first_column>,accuracy,eopp0,eopp1,eodd,hist_1..hist_f.
std::string rows_to_csv(const std::vector<EvalRow>& rows, const std::string& first_column,
                        std::size_t num_exits);

}  // namespace fairexit

#endif  // FAIREXIT_INFERENCE_HPP_

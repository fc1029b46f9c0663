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

#ifndef FAIREXIT_TRAINING_HPP_
#define FAIREXIT_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fairexit/dataset.hpp"
#include "fairexit/kernels.hpp"
#include "fairexit/model.hpp"
#include "fairexit/tape.hpp"

namespace fairexit {

enum class RegularizerKind { kNone, kMmd, kHsic };

std::string to_string(RegularizerKind kind);
RegularizerKind parse_regularizer(const std::string& text);

// Depth-linear exit weights: alpha_k = 0.3 + 0.6 (k-1)/n for internal exit
// k = 1..n, and 0.9 for the final exit. n = 4 gives 0.3, 0.45, 0.6, 0.75, 0.9.
std::vector<double> default_alphas(std::size_t num_internal_exits);

struct TrainConfig {
  // One weight per exit, final classifier last.
  std::vector<double> alphas = default_alphas(4);
  double lambda = 0.01;
  RegularizerKind regularizer = RegularizerKind::kMmd;
  KernelSpec kernel = KernelSpec::rbf_median();
  double learning_rate = 1e-2;
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;

  // Throws ConfigError naming the offending field.
  void validate(std::size_t num_exits) const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Per-exit loss terms of one batch (or an epoch average) and their weighted
// total:  total = sum_k alpha_k (target_loss[k] + lambda fairness_loss[k]).
struct LossBreakdown {
  std::vector<double> target_loss;
  std::vector<double> fairness_loss;
  double total = 0.0;
  // The batch held a single sensitive group, so every fairness_loss is 0.
  bool degenerate = false;
};

struct JointLoss {
  Var total;
  LossBreakdown breakdown;
};

// Records the joint loss of every exit on the forward pass's tape.
JointLoss joint_loss(const TapeForward& forward, std::span<const int> targets,
                     std::span<const int> sensitive, const TrainConfig& cfg);

// Same quantity from plain (untaped) outputs.
LossBreakdown joint_loss(const ForwardResult& forward, std::span<const int> targets,
                         std::span<const int> sensitive, const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  // Batch-size weighted mean of the epoch's batch breakdowns.
  LossBreakdown loss;
  std::size_t degenerate_batches = 0;
};

// Called with the trained parameters after the last epoch. This is where a
// pruning pass (e.g. a FairPrune-style saliency prune) would plug in; no
// such pass ships with this library.
using PostTrainingHook = std::function<void(ParamStore&)>;

// Seeded minibatch SGD: every epoch reshuffles the sample order (seed + epoch
// stream), keeps the last partial batch, and records one EpochRecord.
std::vector<EpochRecord> train(MultiExitModel& model, const Dataset& data, const TrainConfig& cfg,
                               const PostTrainingHook& hook = {});

}  // namespace fairexit

#endif  // FAIREXIT_TRAINING_HPP_

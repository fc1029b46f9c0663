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

#include "fairexit/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fairexit/errors.hpp"
#include "fairexit/regularizers.hpp"

namespace fairexit {

std::string to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::kNone:
      return "none";
    case RegularizerKind::kMmd:
      return "mmd";
    case RegularizerKind::kHsic:
      return "hsic";
  }
  return "none";
}

RegularizerKind parse_regularizer(const std::string& text) {
  if (text == "none") return RegularizerKind::kNone;
  if (text == "mmd") return RegularizerKind::kMmd;
  if (text == "hsic") return RegularizerKind::kHsic;
  throw ConfigError("train.regularizer: unknown value '" + text + "' (none, mmd, hsic)");
}

std::vector<double> default_alphas(std::size_t num_internal_exits) {
  std::vector<double> alphas;
  const double n = static_cast<double>(num_internal_exits);
  for (std::size_t k = 1; k <= num_internal_exits; ++k)
    alphas.push_back(0.3 + 0.6 * static_cast<double>(k - 1) / n);
  alphas.push_back(0.9);
  return alphas;
}

void TrainConfig::validate(std::size_t num_exits) const {
  if (alphas.size() != num_exits) {
    throw ConfigError("train.alphas: expected " + std::to_string(num_exits) +
                      " values (one per internal exit plus the final exit), got " +
                      std::to_string(alphas.size()));
  }
  for (double a : alphas) {
    if (!(std::isfinite(a) && a >= 0.0)) throw ConfigError("train.alphas: values must be >= 0");
  }
  if (!(std::isfinite(lambda) && lambda >= 0.0)) throw ConfigError("train.lambda must be >= 0");
  if (!(std::isfinite(learning_rate) && learning_rate >= 0.0)) {
    throw ConfigError("train.learning_rate must be >= 0");
  }
  if (epochs == 0) throw ConfigError("train.epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("train.batch_size must be >= 1");
  kernel.validate();
}

JointLoss joint_loss(const TapeForward& forward, std::span<const int> targets,
                     std::span<const int> sensitive, const TrainConfig& cfg) {
  const std::size_t exits = forward.logits.size();
  if (forward.features.size() != exits) throw DimensionError("joint_loss: logits/features count mismatch");
  cfg.validate(exits);
  if (exits == 0) throw DimensionError("joint_loss: no exits");
  if (sensitive.size() != targets.size()) throw DimensionError("joint_loss: sensitive length mismatch");

  bool seen[2] = {false, false};
  for (int a : sensitive) {
    if (a != 0 && a != 1) throw DomainError("joint_loss: sensitive values must be 0 or 1");
    seen[a] = true;
  }
  const bool regularize = cfg.regularizer != RegularizerKind::kNone;

  JointLoss out;
  out.breakdown.degenerate = regularize && !(seen[0] && seen[1]);
  Var total{};
  for (std::size_t k = 0; k < exits; ++k) {
    Var lt = softmax_cross_entropy(forward.logits[k], targets);
    Var term = lt;
    double ls_value = 0.0;
    if (regularize && !out.breakdown.degenerate) {
      Var ls = cfg.regularizer == RegularizerKind::kMmd
                   ? mmd2(forward.features[k], sensitive, cfg.kernel)
                   : hsic(forward.features[k], sensitive, cfg.kernel);
      ls_value = scalar(ls);
      term = add(lt, scale(ls, cfg.lambda));
    }
    Var weighted = scale(term, cfg.alphas[k]);
    total = k == 0 ? weighted : add(total, weighted);

    const double lt_value = scalar(lt);
    out.breakdown.target_loss.push_back(lt_value);
    out.breakdown.fairness_loss.push_back(ls_value);
    out.breakdown.total += cfg.alphas[k] * (lt_value + cfg.lambda * ls_value);
  }
  out.total = total;
  return out;
}

LossBreakdown joint_loss(const ForwardResult& forward, std::span<const int> targets,
                         std::span<const int> sensitive, const TrainConfig& cfg) {
  Tape tape;
  TapeForward recorded;
  for (const auto& l : forward.logits) recorded.logits.push_back(tape.constant(l));
  for (const auto& f : forward.features) recorded.features.push_back(tape.constant(f));
  return joint_loss(recorded, targets, sensitive, cfg).breakdown;
}

std::vector<EpochRecord> train(MultiExitModel& model, const Dataset& data, const TrainConfig& cfg,
                               const PostTrainingHook& hook) {
  cfg.validate(model.num_exits());
  if (data.size() == 0) throw DataError("train: dataset is empty");
  data.validate();
  if (data.dim() != model.config().input_dim) {
    throw DataError("train: dataset has " + std::to_string(data.dim()) +
                    " features, model expects " + std::to_string(model.config().input_dim));
  }
  if (data.num_classes != model.config().num_classes) {
    throw DataError("train: dataset has " + std::to_string(data.num_classes) +
                    " classes, model expects " + std::to_string(model.config().num_classes));
  }

  const std::size_t m = data.size();
  const std::size_t exits = model.num_exits();
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<EpochRecord> history;
  history.reserve(cfg.epochs);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord record;
    record.epoch = epoch;
    record.loss.target_loss.assign(exits, 0.0);
    record.loss.fairness_loss.assign(exits, 0.0);

    for (std::size_t start = 0; start < m; start += cfg.batch_size) {
      const std::size_t end = std::min(m, start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Dataset batch = data.subset(idx);

      Tape tape;
      Var x = tape.constant(batch.features);
      const TapeForward fwd = model.forward_all(tape, x);
      const JointLoss loss = joint_loss(fwd, batch.targets, batch.sensitive, cfg);
      tape.backward(loss.total);
      sgd_step(model.params(), cfg.learning_rate);

      const double w = static_cast<double>(idx.size()) / static_cast<double>(m);
      for (std::size_t k = 0; k < exits; ++k) {
        record.loss.target_loss[k] += w * loss.breakdown.target_loss[k];
        record.loss.fairness_loss[k] += w * loss.breakdown.fairness_loss[k];
      }
      record.loss.total += w * loss.breakdown.total;
      if (loss.breakdown.degenerate) ++record.degenerate_batches;
    }
    record.loss.degenerate = record.degenerate_batches > 0;
    if (!std::isfinite(record.loss.total)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    }
    history.push_back(std::move(record));
  }
  if (hook) hook(model.params());
  return history;
}

}  // namespace fairexit

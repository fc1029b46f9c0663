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

#include "fairexit/model.hpp"

#include <string>

#include "fairexit/errors.hpp"
#include "fairexit/tensor_ops.hpp"

namespace fairexit {

void ModelConfig::validate() const {
  if (input_dim == 0) throw ConfigError("model.input_dim must be >= 1");
  if (num_classes < 2) throw ConfigError("model.num_classes must be >= 2");
  if (block_widths.empty()) throw ConfigError("model.block_widths: need at least one internal exit");
  for (std::size_t w : block_widths) {
    if (w == 0) throw ConfigError("model.block_widths: widths must be positive");
  }
  if (head_hidden == 0) throw ConfigError("model.head_hidden must be positive");
}

MultiExitModel::MultiExitModel(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  const auto classes = static_cast<std::size_t>(config_.num_classes);
  std::size_t width = config_.input_dim;
  for (std::size_t b = 0; b < config_.block_widths.size(); ++b) {
    const std::string id = std::to_string(b + 1);
    blocks_.push_back(add_affine("block" + id, width, config_.block_widths[b], rng));
    width = config_.block_widths[b];
    Head head;
    head.hidden = add_affine("head" + id + ".fc1", width, config_.head_hidden, rng);
    head.out = add_affine("head" + id + ".fc2", config_.head_hidden, classes, rng);
    heads_.push_back(head);
  }
  final_ = add_affine("final", width, classes, rng);
}

MultiExitModel::Affine MultiExitModel::add_affine(const std::string& prefix, std::size_t in,
                                                  std::size_t out, std::mt19937_64& rng) {
  Affine layer;
  layer.weight = params_.add(prefix + ".weight", uniform_init(in, out, in, rng));
  layer.bias = params_.add(prefix + ".bias", uniform_init(1, out, in, rng));
  return layer;
}

void MultiExitModel::check_input(const Matrix& batch) const {
  if (batch.cols() != config_.input_dim) {
    throw DimensionError("model expects " + std::to_string(config_.input_dim) +
                         " input features, batch has " + std::to_string(batch.cols()));
  }
}

ForwardResult MultiExitModel::forward_all(const Matrix& batch) const {
  check_input(batch);
  auto affine = [this](const Matrix& x, const Affine& layer) {
    return dense_forward(x, params_[layer.weight].value, params_[layer.bias].value);
  };
  ForwardResult out;
  Matrix h = batch;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    h = relu(affine(h, blocks_[b]));
    out.logits.push_back(affine(relu(affine(h, heads_[b].hidden)), heads_[b].out));
    out.features.push_back(h);
  }
  out.logits.push_back(affine(h, final_));
  out.features.push_back(h);
  return out;
}

TapeForward MultiExitModel::forward_all(Tape& tape, Var batch) {
  check_input(tape.value(batch));
  std::vector<Var> p;
  p.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) p.push_back(tape.parameter(params_, i));
  auto affine = [&p](Var x, const Affine& layer) { return dense(x, p[layer.weight], p[layer.bias]); };

  TapeForward out;
  Var h = batch;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    h = relu(affine(h, blocks_[b]));
    out.logits.push_back(affine(relu(affine(h, heads_[b].hidden)), heads_[b].out));
    out.features.push_back(h);
  }
  out.logits.push_back(affine(h, final_));
  out.features.push_back(h);
  return out;
}

MultiExitModel build_model(const ModelConfig& config) { return MultiExitModel(config); }

}  // namespace fairexit

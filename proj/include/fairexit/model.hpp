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

#ifndef FAIREXIT_MODEL_HPP_
#define FAIREXIT_MODEL_HPP_

#include <cstdint>
#include <vector>

#include "fairexit/matrix.hpp"
#include "fairexit/param_store.hpp"
#include "fairexit/tape.hpp"

namespace fairexit {

struct ModelConfig {
  std::size_t input_dim = 0;
  int num_classes = 2;
  // One backbone block (affine + ReLU) per entry; one internal exit each.
  std::vector<std::size_t> block_widths = {32, 32, 32, 32};
  std::size_t head_hidden = 32;
  std::uint64_t seed = 0;

  std::size_t num_internal_exits() const { return block_widths.size(); }
  // Internal exits plus the final classifier.
  std::size_t num_exits() const { return block_widths.size() + 1; }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Outputs of every exit, ordered shallow to deep with the final classifier
// last. features[k] is the backbone representation head k reads.
struct ForwardResult {
  std::vector<Matrix> logits;
  std::vector<Matrix> features;
};

struct TapeForward {
  std::vector<Var> logits;
  std::vector<Var> features;
};

// Backbone of dense blocks with an internal classifier after every block and
// a final classifier on the last block.
//
//   x -> block_1 -> block_2 -> ... -> block_n
//          |          |                |    |
//        CLF_1      CLF_2            CLF_n  CLF_f
//
// Internal heads are two-layer MLPs (hidden width head_hidden, ReLU); the
// final head is a single affine layer, the plain network's own classifier.
// Parameters are initialised uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) from
// the config seed, in a fixed order, so construction is deterministic.
class MultiExitModel {
 public:
  explicit MultiExitModel(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  std::size_t num_exits() const { return config_.num_exits(); }

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Plain evaluation, no gradient bookkeeping.
  ForwardResult forward_all(const Matrix& batch) const;
  // Records the forward pass on `tape`, binding every parameter.
  TapeForward forward_all(Tape& tape, Var batch);

 private:
  struct Affine {
    std::size_t weight = 0;
    std::size_t bias = 0;
  };
  struct Head {
    Affine hidden;
    Affine out;
  };

  Affine add_affine(const std::string& prefix, std::size_t in, std::size_t out,
                    std::mt19937_64& rng);
  void check_input(const Matrix& batch) const;

  ModelConfig config_;
  ParamStore params_;
  std::vector<Affine> blocks_;
  std::vector<Head> heads_;
  Affine final_;
};

MultiExitModel build_model(const ModelConfig& config);

}  // namespace fairexit

#endif  // FAIREXIT_MODEL_HPP_

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

#ifndef FAIREXIT_RUN_CONFIG_HPP_
#define FAIREXIT_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "fairexit/dataset.hpp"
#include "fairexit/inference.hpp"
#include "fairexit/model.hpp"
#include "fairexit/training.hpp"
#include "json.hpp"

namespace fairexit {

struct DataSource {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  SynthSpec synthetic;
  std::string csv_path;
  // Gaussian feature jitter applied to the training split only.
  double augment_sigma = 0.0;
  std::size_t augment_copies = 0;
};

// Everything a `train` run needs. Seeds of the individual stages derive from
// `seed`: model init = seed, batch order = seed + 1, synthetic data = seed + 2,
// split = seed + 3.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  InferenceConfig inference;
  DataSource data;
  SplitFractions split;
  bool stratify = true;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  // [model] num_classes, when given; otherwise taken from the data.
  std::optional<int> num_classes;

  // Re-derives every stage seed from `seed`.
  void set_seed(std::uint64_t new_seed);
};

// Parses the INI-style config text:
//
//   # comment            ; comment
//   [section]
//   key = value
//
// Sections: run, model, train, inference, data, split. Unknown sections or
// keys are rejected. Missing keys keep their defaults. Throws ConfigError
// naming the offending "section.key".
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::ordered_json& j);

// Synthetic or CSV dataset described by `config.data`.
Dataset load_dataset(const RunConfig& config, Warnings* warnings = nullptr);

}  // namespace fairexit

#endif  // FAIREXIT_RUN_CONFIG_HPP_

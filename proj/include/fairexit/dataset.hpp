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

#ifndef FAIREXIT_DATASET_HPP_
#define FAIREXIT_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairexit/matrix.hpp"

namespace fairexit {

using Warnings = std::vector<std::string>;

// Features, class targets in [0, num_classes) and a binary sensitive
// attribute for every sample.
struct Dataset {
  Matrix features;
  std::vector<int> targets;
  std::vector<int> sensitive;
  int num_classes = 2;

  std::size_t size() const { return targets.size(); }
  std::size_t dim() const { return features.cols(); }
  bool has_both_groups() const;

  // Throws DataError on inconsistent lengths or out-of-range labels.
  void validate() const;
  Dataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Generative law of the synthetic biased dataset:
//   a ~ Bernoulli(1/2), y ~ Uniform{0..N-1}
//   signal  ~ Normal(class_separation * e_y, noise_a^2 I)   (e_y: unit class direction)
//   spurious: for a = 0, with probability spurious_strength, exactly
//             class_separation * onehot(y mod d_spurious); otherwise (and
//             always for a = 1) Normal(0, noise_a^2 I).
// The shortcut helps group 0 only, so a classifier that learns it is
// less accurate, and less fair, on group 1.
struct SynthSpec {
  std::size_t m = 4000;
  int num_classes = 3;
  std::size_t d_signal = 4;
  std::size_t d_spurious = 4;
  double spurious_strength = 0.8;
  double noise_g0 = 0.8;
  double noise_g1 = 1.2;
  double class_separation = 1.5;
  std::uint64_t seed = 0;

  std::size_t dim() const { return d_signal + d_spurious; }
  // Throws ConfigError for invalid fields, DataError when m < 2N.
  void validate() const;
};

Dataset generate_synthetic(const SynthSpec& spec);

// CSV schema: header "f0,...,f{d-1},target,sensitive", one sample per line.
// Floats are written in shortest round-trip form.
void save_csv(const Dataset& data, const std::filesystem::path& path);

// `num_classes` defaults to max(target) + 1 (at least 2). A file holding a
// single sensitive group loads with a warning.
Dataset load_csv(const std::filesystem::path& path, std::optional<int> num_classes = std::nullopt,
                 Warnings* warnings = nullptr);

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  void validate() const;
};

struct SplitResult {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Seeded partition. With `stratify`, each (target, sensitive) cell is split
// separately; cells with fewer than 3 samples go wholly to train with a
// warning. Indices keep their original relative order within each part.
SplitResult split(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed,
                  bool stratify, Warnings* warnings = nullptr);

// Original samples followed by `copies` blocks of Gaussian-jittered
// replicas (labels preserved).
Dataset augment_jitter(const Dataset& data, double sigma, std::size_t copies, std::uint64_t seed);

}  // namespace fairexit

#endif  // FAIREXIT_DATASET_HPP_

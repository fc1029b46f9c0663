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

#ifndef FAIREXIT_KERNELS_HPP_
#define FAIREXIT_KERNELS_HPP_

#include <optional>
#include <string>

#include "fairexit/matrix.hpp"

namespace fairexit {

enum class KernelKind { kLinear, kRbf };

// Kernel choice for the fairness regularizers. An rbf kernel without an
// explicit bandwidth resolves sigma per call with the median heuristic.
struct KernelSpec {
  KernelKind kind = KernelKind::kRbf;
  std::optional<double> bandwidth;

  static KernelSpec linear() { return {KernelKind::kLinear, std::nullopt}; }
  static KernelSpec rbf(double sigma) { return {KernelKind::kRbf, sigma}; }
  static KernelSpec rbf_median() { return {KernelKind::kRbf, std::nullopt}; }

  // Throws ConfigError for a non-positive or non-finite bandwidth.
  void validate() const;
  // "linear", "rbf:median" or "rbf:<sigma>".
  std::string to_string() const;
  static KernelSpec parse(const std::string& text);

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

// Location of the median-heuristic bandwidth: the lower median of all
// pairwise Euclidean distances among the rows of `z`. `first`/`second`
// identify the pair realising it; `from_pair` is false when sigma fell back
// to 1 (fewer than two rows, or a zero median).
struct MedianBandwidth {
  double sigma = 1.0;
  std::size_t first = 0;
  std::size_t second = 0;
  bool from_pair = false;
};

MedianBandwidth median_bandwidth(const Matrix& z);

// Bandwidth actually used for an rbf kernel over the rows of `z`.
double resolve_bandwidth(const KernelSpec& spec, const Matrix& z);

// K[i,j] = k(x_i, y_j). Linear: x.y. Rbf: exp(-|x-y|^2 / (2 sigma^2)), with
// "median" resolved over the row-concatenation of x and y.
Matrix kernel_matrix(const Matrix& x, const Matrix& y, const KernelSpec& spec);

// Squared Euclidean distances between all rows of z.
Matrix pairwise_sq_distances(const Matrix& z);

}  // namespace fairexit

#endif  // FAIREXIT_KERNELS_HPP_

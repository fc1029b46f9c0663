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

#ifndef FAIREXIT_SNNL_HPP_
#define FAIREXIT_SNNL_HPP_

#include <cstddef>
#include <span>

#include "fairexit/matrix.hpp"

namespace fairexit {

struct ProbeConfig {
  double temperature = 1.0;
  void validate() const;
};

inline constexpr double kSnnlEpsilon = 1e-30;

struct SnnlResult {
  double value = 0.0;
  // Samples without a same-label peer; each contributes -ln(kSnnlEpsilon).
  std::size_t unmatched = 0;
};

// Soft nearest neighbour loss of `labels` in the feature space `features`:
//   -(1/m) sum_i ln[ sum_{j!=i, y_j=y_i} e^{-|x_i-x_j|^2/T}
//                    / sum_{k!=i} e^{-|x_i-x_k|^2/T} ]
// Each log-ratio is floored at ln(kSnnlEpsilon). Low values mean the labels
// are well separated. Requires m >= 2.
SnnlResult snnl(const Matrix& features, std::span<const int> labels, const ProbeConfig& cfg);

}  // namespace fairexit

#endif  // FAIREXIT_SNNL_HPP_

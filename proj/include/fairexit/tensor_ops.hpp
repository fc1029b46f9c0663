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

#ifndef FAIREXIT_TENSOR_OPS_HPP_
#define FAIREXIT_TENSOR_OPS_HPP_

#include <span>
#include <vector>

#include "fairexit/matrix.hpp"

namespace fairexit {

// out[i,j] = sum_k input[i,k] * weights[k,j] + bias[j]. `bias` is 1 x out.
Matrix dense_forward(const Matrix& input, const Matrix& weights, const Matrix& bias);

Matrix relu(const Matrix& x);

// Max-subtracted softmax of a single logit vector.
std::vector<double> softmax(std::span<const double> logits);

// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

// Mean over the batch of -ln(max(probs[i, y_i], 1e-12)).
// Rows must sum to 1 within 1e-9.
double cross_entropy(const Matrix& probs, std::span<const int> targets);

// Mean over the batch of -log_softmax(logits)[i, y_i], via log-sum-exp.
double softmax_cross_entropy(const Matrix& logits, std::span<const int> targets);

inline constexpr double kProbabilityFloor = 1e-12;

}  // namespace fairexit

#endif  // FAIREXIT_TENSOR_OPS_HPP_

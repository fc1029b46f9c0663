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

#include "fairexit/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairexit/errors.hpp"

namespace fairexit {

namespace {

void check_targets(std::size_t rows, std::size_t classes, std::span<const int> targets) {
  if (targets.size() != rows) {
    throw DimensionError("targets length " + std::to_string(targets.size()) +
                         " != batch size " + std::to_string(rows));
  }
  for (int t : targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= classes) {
      throw DomainError("target index " + std::to_string(t) + " outside [0, " +
                        std::to_string(classes) + ")");
    }
  }
}

}  // namespace

Matrix dense_forward(const Matrix& input, const Matrix& weights, const Matrix& bias) {
  if (input.cols() != weights.rows()) {
    throw DimensionError("dense_forward: input has " + std::to_string(input.cols()) +
                         " features, weights expect " + std::to_string(weights.rows()));
  }
  if (bias.rows() != 1 || bias.cols() != weights.cols()) {
    throw DimensionError("dense_forward: bias must be 1x" +
                         std::to_string(weights.cols()));
  }
  Matrix out = matmul(input, weights);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += bias(0, j);
  }
  return out;
}

Matrix relu(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw DomainError("softmax of an empty vector");
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto p = softmax(logits.row(i));
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

double cross_entropy(const Matrix& probs, std::span<const int> targets) {
  check_targets(probs.rows(), probs.cols(), targets);
  if (probs.rows() == 0) throw DomainError("cross_entropy of an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    double row_sum = 0.0;
    for (double p : probs.row(i)) row_sum += p;
    if (std::abs(row_sum - 1.0) > 1e-9) {
      throw DomainError("cross_entropy: row " + std::to_string(i) +
                        " is not a probability distribution");
    }
    const double p = probs(i, static_cast<std::size_t>(targets[i]));
    total -= std::log(std::max(p, kProbabilityFloor));
  }
  return total / static_cast<double>(probs.rows());
}

double softmax_cross_entropy(const Matrix& logits, std::span<const int> targets) {
  check_targets(logits.rows(), logits.cols(), targets);
  if (logits.rows() == 0) throw DomainError("cross_entropy of an empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    const double max = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - max);
    const double log_z = max + std::log(sum);
    total += log_z - row[static_cast<std::size_t>(targets[i])];
  }
  return total / static_cast<double>(logits.rows());
}

}  // namespace fairexit

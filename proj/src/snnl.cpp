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

#include "fairexit/snnl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fairexit/errors.hpp"
#include "fairexit/kernels.hpp"

namespace fairexit {

void ProbeConfig::validate() const {
  if (!(std::isfinite(temperature) && temperature > 0.0)) {
    throw ConfigError("SNNL temperature must be finite and positive");
  }
}

SnnlResult snnl(const Matrix& features, std::span<const int> labels, const ProbeConfig& cfg) {
  cfg.validate();
  const std::size_t m = features.rows();
  if (m < 2) throw DegenerateInputError("snnl needs at least two samples");
  if (labels.size() != m) throw DimensionError("snnl: label count does not match rows");

  const Matrix dist = pairwise_sq_distances(features);
  const double log_floor = std::log(kSnnlEpsilon);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  SnnlResult result;
  std::vector<double> exponents(m);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    // Log-sum-exp over k != i, shifted by the largest exponent.
    double shift = kNegInf;
    for (std::size_t k = 0; k < m; ++k) {
      exponents[k] = -dist(i, k) / cfg.temperature;
      if (k != i) shift = std::max(shift, exponents[k]);
    }
    double num = 0.0;
    double den = 0.0;
    bool has_peer = false;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i) continue;
      const double e = std::exp(exponents[k] - shift);
      den += e;
      if (labels[k] == labels[i]) {
        num += e;
        has_peer = true;
      }
    }
    if (!has_peer) ++result.unmatched;
    const double log_ratio = num > 0.0 ? std::log(num) - std::log(den) : kNegInf;
    total -= std::max(log_ratio, log_floor);
  }
  result.value = total / static_cast<double>(m);
  return result;
}

}  // namespace fairexit

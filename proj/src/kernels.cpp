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

#include "fairexit/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <vector>

#include "fairexit/errors.hpp"
#include "fairexit/format.hpp"

namespace fairexit {

void KernelSpec::validate() const {
  if (kind == KernelKind::kRbf && bandwidth.has_value() &&
      !(std::isfinite(*bandwidth) && *bandwidth > 0.0)) {
    throw ConfigError("rbf bandwidth must be positive, got " + std::to_string(*bandwidth));
  }
}

std::string KernelSpec::to_string() const {
  if (kind == KernelKind::kLinear) return "linear";
  if (!bandwidth) return "rbf:median";
  return "rbf:" + format_double(*bandwidth);
}

KernelSpec KernelSpec::parse(const std::string& text) {
  if (text == "linear") return linear();
  if (text == "rbf" || text == "rbf:median") return rbf_median();
  if (text.rfind("rbf:", 0) == 0) {
    const std::string num = text.substr(4);
    double sigma = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), sigma);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      throw ConfigError("bad rbf bandwidth: " + num);
    }
    KernelSpec spec = rbf(sigma);
    spec.validate();
    return spec;
  }
  throw ConfigError("unknown kernel '" + text + "' (expected linear, rbf:median or rbf:<sigma>)");
}

Matrix pairwise_sq_distances(const Matrix& z) {
  const std::size_t m = z.rows();
  Matrix d(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto zi = z.row(i);
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto zj = z.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < zi.size(); ++k) {
        const double diff = zi[k] - zj[k];
        acc += diff * diff;
      }
      d(i, j) = acc;
      d(j, i) = acc;
    }
  }
  return d;
}

MedianBandwidth median_bandwidth(const Matrix& z) {
  const std::size_t m = z.rows();
  if (m < 2) return {};
  struct Pair {
    double sq;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    const auto zi = z.row(i);
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto zj = z.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < zi.size(); ++k) {
        const double diff = zi[k] - zj[k];
        acc += diff * diff;
      }
      pairs.push_back({acc, i, j});
    }
  }
  // Lower median; ties broken by pair index so the result is deterministic.
  auto mid = pairs.begin() + static_cast<std::ptrdiff_t>((pairs.size() - 1) / 2);
  std::nth_element(pairs.begin(), mid, pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.sq != b.sq) return a.sq < b.sq;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  if (mid->sq <= 0.0) return {};
  return {std::sqrt(mid->sq), mid->i, mid->j, true};
}

double resolve_bandwidth(const KernelSpec& spec, const Matrix& z) {
  spec.validate();
  if (spec.bandwidth) return *spec.bandwidth;
  return median_bandwidth(z).sigma;
}

Matrix kernel_matrix(const Matrix& x, const Matrix& y, const KernelSpec& spec) {
  spec.validate();
  if (x.cols() != y.cols()) {
    throw DimensionError("kernel_matrix: feature dims " + std::to_string(x.cols()) +
                         " vs " + std::to_string(y.cols()));
  }
  if (spec.kind == KernelKind::kLinear) return matmul_transposed(x, y);

  const double sigma = spec.bandwidth ? *spec.bandwidth : median_bandwidth(vstack(x, y)).sigma;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  Matrix k(x.rows(), y.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    for (std::size_t j = 0; j < y.rows(); ++j) {
      const auto yj = y.row(j);
      double acc = 0.0;
      for (std::size_t c = 0; c < xi.size(); ++c) {
        const double diff = xi[c] - yj[c];
        acc += diff * diff;
      }
      k(i, j) = std::exp(-acc * inv);
    }
  }
  return k;
}

}  // namespace fairexit

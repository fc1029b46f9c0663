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

#include "fairexit/regularizers.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "fairexit/errors.hpp"

namespace fairexit {

namespace {

void check_binary(std::span<const int> labels, std::size_t rows, const char* what) {
  if (labels.size() != rows) {
    throw DimensionError(std::string(what) + ": " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(rows) + " rows");
  }
  for (int a : labels) {
    if (a != 0 && a != 1) {
      throw DomainError(std::string(what) + ": group label " + std::to_string(a) +
                        " is not 0 or 1");
    }
  }
}

// Wraps a precomputed value/gradient pair as a tape node; the clamp at 0
// zeroes the gradient along with the value.
Var record_form(Var features, KernelFormResult form) {
  Tape& tape = *features.tape;
  if (form.value < 0.0) {
    form.value = 0.0;
    form.grad.fill(0.0);
  }
  return tape.record(Matrix(1, 1, form.value), {features},
                     [features, grad = std::move(form.grad)](Tape& t, const Matrix& g) {
                       Matrix scaled = grad;
                       for (double& v : scaled.data()) v *= g(0, 0);
                       t.accumulate(features, scaled);
                     });
}

}  // namespace

Matrix mmd2_weights(std::span<const int> groups) {
  std::size_t counts[2] = {0, 0};
  for (int a : groups) ++counts[a == 0 ? 0 : 1];
  if (counts[0] == 0 || counts[1] == 0) {
    throw DegenerateInputError("mmd2 needs both groups to be non-empty");
  }
  const double n0 = static_cast<double>(counts[0]);
  const double n1 = static_cast<double>(counts[1]);
  const std::size_t m = groups.size();
  Matrix w(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (groups[i] != groups[j]) {
        w(i, j) = -1.0 / (n0 * n1);
      } else {
        w(i, j) = groups[i] == 0 ? 1.0 / (n0 * n0) : 1.0 / (n1 * n1);
      }
    }
  }
  return w;
}

Matrix hsic_weights(std::span<const int> sensitive, const KernelSpec& sensitive_kernel) {
  const std::size_t m = sensitive.size();
  if (m < 2) throw DegenerateInputError("hsic needs at least two samples");
  Matrix a(m, 1);
  for (std::size_t i = 0; i < m; ++i) a(i, 0) = static_cast<double>(sensitive[i]);
  const Matrix l = kernel_matrix(a, a, sensitive_kernel);

  std::vector<double> row_mean(m, 0.0);
  std::vector<double> col_mean(m, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      row_mean[i] += l(i, j);
      col_mean[j] += l(i, j);
      grand += l(i, j);
    }
  }
  const double dm = static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    row_mean[i] /= dm;
    col_mean[i] /= dm;
  }
  grand /= dm * dm;
  const double norm = 1.0 / ((dm - 1.0) * (dm - 1.0));
  // trace(K H L H) = sum_ij K_ij (HLH)_ji; HLH is symmetric for symmetric L.
  Matrix w(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      w(i, j) = (l(j, i) - row_mean[j] - col_mean[i] + grand) * norm;
  return w;
}

KernelFormResult kernel_quadratic_form(const Matrix& z, const Matrix& weights,
                                       const KernelSpec& spec, bool with_grad) {
  spec.validate();
  const std::size_t m = z.rows();
  const std::size_t d = z.cols();
  if (weights.rows() != m || weights.cols() != m) {
    throw DimensionError("kernel_quadratic_form: weights must be " + std::to_string(m) +
                         "x" + std::to_string(m));
  }
  KernelFormResult out;
  if (with_grad) out.grad = Matrix(m, d);

  if (spec.kind == KernelKind::kLinear) {
    const Matrix k = matmul_transposed(z, z);
    for (std::size_t i = 0; i < k.size(); ++i) out.value += weights.data()[i] * k.data()[i];
    if (with_grad) {
      Matrix sym(m, m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) sym(i, j) = weights(i, j) + weights(j, i);
      out.grad = matmul(sym, z);
    }
    return out;
  }

  MedianBandwidth median;
  double sigma = 0.0;
  if (spec.bandwidth) {
    sigma = *spec.bandwidth;
  } else {
    median = median_bandwidth(z);
    sigma = median.sigma;
  }
  const Matrix dist = pairwise_sq_distances(z);
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  Matrix k(m, m);
  for (std::size_t i = 0; i < k.size(); ++i) k.data()[i] = std::exp(-dist.data()[i] * inv_two_sigma2);
  for (std::size_t i = 0; i < k.size(); ++i) out.value += weights.data()[i] * k.data()[i];
  if (!with_grad) return out;

  // d/dz_i = -(1/sigma^2) sum_j S_ij (z_i - z_j),  S = (W + W^T) o K.
  const double inv_sigma2 = 1.0 / (sigma * sigma);
  for (std::size_t i = 0; i < m; ++i) {
    auto gi = out.grad.row(i);
    const auto zi = z.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double s = (weights(i, j) + weights(j, i)) * k(i, j) * inv_sigma2;
      if (s == 0.0) continue;
      const auto zj = z.row(j);
      for (std::size_t c = 0; c < d; ++c) gi[c] -= s * (zi[c] - zj[c]);
    }
  }
  if (median.from_pair) {
    // sigma = |z_p - z_q| locally, so d(value)/d(sigma) routes into z_p, z_q.
    double dvalue_dsigma = 0.0;
    const double inv_sigma3 = inv_sigma2 / sigma;
    for (std::size_t i = 0; i < k.size(); ++i)
      dvalue_dsigma += weights.data()[i] * k.data()[i] * dist.data()[i] * inv_sigma3;
    const auto zp = z.row(median.first);
    const auto zq = z.row(median.second);
    auto gp = out.grad.row(median.first);
    auto gq = out.grad.row(median.second);
    for (std::size_t c = 0; c < d; ++c) {
      const double dir = (zp[c] - zq[c]) / sigma;
      gp[c] += dvalue_dsigma * dir;
      gq[c] -= dvalue_dsigma * dir;
    }
  }
  return out;
}

double mmd2(const Matrix& group0, const Matrix& group1, const KernelSpec& spec) {
  if (group0.rows() == 0 || group1.rows() == 0) {
    throw DegenerateInputError("mmd2 needs both groups to be non-empty");
  }
  if (group0.cols() != group1.cols()) throw DimensionError("mmd2: feature dims differ");
  std::vector<int> groups(group0.rows(), 0);
  groups.resize(group0.rows() + group1.rows(), 1);
  const double value =
      kernel_quadratic_form(vstack(group0, group1), mmd2_weights(groups), spec, false).value;
  return value < 0.0 ? 0.0 : value;
}

double hsic(const Matrix& features, std::span<const int> sensitive,
            const KernelSpec& feature_kernel, const KernelSpec& sensitive_kernel) {
  check_binary(sensitive, features.rows(), "hsic");
  const double value = kernel_quadratic_form(features, hsic_weights(sensitive, sensitive_kernel),
                                             feature_kernel, false)
                           .value;
  return value < 0.0 ? 0.0 : value;
}

Var mmd2(Var features, std::span<const int> groups, const KernelSpec& spec) {
  const Matrix& z = features.tape->value(features);
  check_binary(groups, z.rows(), "mmd2");
  return record_form(features,
                     kernel_quadratic_form(z, mmd2_weights(groups), spec,
                                           features.tape->requires_grad(features)));
}

Var hsic(Var features, std::span<const int> sensitive, const KernelSpec& feature_kernel,
         const KernelSpec& sensitive_kernel) {
  const Matrix& z = features.tape->value(features);
  check_binary(sensitive, z.rows(), "hsic");
  return record_form(features,
                     kernel_quadratic_form(z, hsic_weights(sensitive, sensitive_kernel),
                                           feature_kernel, features.tape->requires_grad(features)));
}

}  // namespace fairexit

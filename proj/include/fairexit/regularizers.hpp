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

#ifndef FAIREXIT_REGULARIZERS_HPP_
#define FAIREXIT_REGULARIZERS_HPP_

#include <span>

#include "fairexit/kernels.hpp"
#include "fairexit/matrix.hpp"
#include "fairexit/tape.hpp"

namespace fairexit {

// Biased (V-statistic) squared maximum mean discrepancy between two groups:
//   mean(K00) + mean(K11) - 2 mean(K01), clamped at 0.
// Throws DegenerateInputError if either group is empty.
double mmd2(const Matrix& group0, const Matrix& group1, const KernelSpec& spec);

// Biased HSIC between feature rows and the 0/1 sensitive attribute:
//   trace(K H L H) / (m-1)^2,  H = I - 11^T/m,
// with K from `features` under `feature_kernel` and L from the sensitive
// column under `sensitive_kernel`. Throws DegenerateInputError for m < 2.
double hsic(const Matrix& features, std::span<const int> sensitive,
            const KernelSpec& feature_kernel,
            const KernelSpec& sensitive_kernel = KernelSpec::linear());

// Differentiable versions on a tape; gradients flow into `features`.
// `groups` holds the 0/1 group of every feature row.
Var mmd2(Var features, std::span<const int> groups, const KernelSpec& spec);
Var hsic(Var features, std::span<const int> sensitive, const KernelSpec& feature_kernel,
         const KernelSpec& sensitive_kernel = KernelSpec::linear());

// Both regularizers are sum_ij W_ij k(z_i, z_j) for a fixed symmetric
// weight matrix W. Exposed for tests and reuse.
Matrix mmd2_weights(std::span<const int> groups);
Matrix hsic_weights(std::span<const int> sensitive, const KernelSpec& sensitive_kernel);

// Value and gradient d/dz of sum_ij W_ij k(z_i, z_j). When `spec` uses the
// median heuristic, the dependence of sigma on z is included.
struct KernelFormResult {
  double value = 0.0;
  Matrix grad;
};
KernelFormResult kernel_quadratic_form(const Matrix& z, const Matrix& weights,
                                       const KernelSpec& spec, bool with_grad);

}  // namespace fairexit

#endif  // FAIREXIT_REGULARIZERS_HPP_

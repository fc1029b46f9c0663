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

#include "fairexit/param_store.hpp"

#include <cmath>

#include "fairexit/errors.hpp"

namespace fairexit {

std::size_t ParamStore::add(std::string name, Matrix value) {
  for (const auto& p : params_) {
    if (p.name == name) throw ConfigError("duplicate parameter name: " + name);
  }
  Matrix grad(value.rows(), value.cols());
  params_.push_back({std::move(name), std::move(value), std::move(grad)});
  return params_.size() - 1;
}

std::size_t ParamStore::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw DomainError("no parameter named " + std::string(name));
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
  has_gradients_ = false;
}

Matrix uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in,
                    std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

void sgd_step(ParamStore& params, double lr) {
  if (!std::isfinite(lr) || lr < 0.0) {
    throw ConfigError("learning rate must be finite and non-negative, got " +
                      std::to_string(lr));
  }
  if (!params.has_gradients()) throw StateError("sgd_step called before backward");
  if (lr == 0.0) return;
  for (auto& p : params) {
    auto value = p.value.data();
    auto grad = p.grad.data();
    for (std::size_t i = 0; i < value.size(); ++i) value[i] -= lr * grad[i];
  }
}

}  // namespace fairexit

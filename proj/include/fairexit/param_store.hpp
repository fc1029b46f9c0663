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

#ifndef FAIREXIT_PARAM_STORE_HPP_
#define FAIREXIT_PARAM_STORE_HPP_

#include <cstddef>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fairexit/matrix.hpp"

namespace fairexit {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Ordered collection of named parameters with gradient buffers of the same
// shape. Iteration order is insertion order.
class ParamStore {
 public:
  // Returns the index of the new parameter. Names must be unique.
  std::size_t add(std::string name, Matrix value);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  // Index of the parameter called `name`; throws DomainError if absent.
  std::size_t index_of(std::string_view name) const;

  std::size_t scalar_count() const;
  void zero_grad();

  // True once a backward pass has written gradients since the last
  // zero_grad()/construction.
  bool has_gradients() const { return has_gradients_; }
  void mark_gradients_populated() { has_gradients_ = true; }

 private:
  std::vector<Parameter> params_;
  bool has_gradients_ = false;
};

// Fill with uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
Matrix uniform_init(std::size_t rows, std::size_t cols, std::size_t fan_in,
                    std::mt19937_64& rng);

// p <- p - lr * grad(p). lr must be finite and >= 0; lr == 0 is a no-op.
void sgd_step(ParamStore& params, double lr);

}  // namespace fairexit

#endif  // FAIREXIT_PARAM_STORE_HPP_

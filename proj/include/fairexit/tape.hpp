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

#ifndef FAIREXIT_TAPE_HPP_
#define FAIREXIT_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fairexit/matrix.hpp"
#include "fairexit/param_store.hpp"

namespace fairexit {

class Tape;

// Handle to a node recorded on a Tape. Only meaningful for that tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;
};

// Reverse-mode differentiation over matrix-valued nodes. Nodes are appended
// in evaluation order, so the recording order is a topological order and the
// backward sweep is a reverse scan.
class Tape {
 public:
  // Receives the node's own output gradient and pushes contributions into
  // its parents through Tape::accumulate.
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // Leaf whose gradient is tracked and readable through grad().
  Var variable(Matrix value);
  // Leaf bound to store[index]; backward() writes its gradient there.
  Var parameter(ParamStore& store, std::size_t index);

  // Appends an interior node. `backward` may be empty for nodes with no
  // differentiable parents.
  Var record(Matrix value, std::vector<Var> parents, BackwardFn backward);

  const Matrix& value(Var v) const;
  const Matrix& grad(Var v) const;
  bool requires_grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // Adds `g` into the gradient buffer of `v` (no-op if v does not require
  // gradients). Called from backward functions.
  void accumulate(Var v, const Matrix& g);

  // Resets every gradient, seeds d(loss)/d(loss) = 1, sweeps in reverse and
  // writes parameter gradients into their stores (overwriting them).
  // `loss` must be a 1x1 node of this tape.
  void backward(Var loss);

  void clear();

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<Var> parents;
    BackwardFn backward;
    bool requires_grad = false;
    ParamStore* store = nullptr;
    std::size_t param_index = 0;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
};

// Differentiable operations. Both operands must live on the same tape.
Var matmul(Var a, Var b);
// x (b x n) plus a 1 x n bias broadcast over rows.
Var add_bias(Var x, Var bias);
Var dense(Var x, Var weights, Var bias);
Var relu(Var x);
Var add(Var a, Var b);
Var scale(Var a, double factor);
Var hadamard(Var a, Var b);
// Sum of all entries as a 1x1 node.
Var sum(Var a);
// Fused mean softmax cross-entropy, 1x1. Gradient is (softmax - onehot)/b.
Var softmax_cross_entropy(Var logits, std::span<const int> targets);

// Scalar value of a 1x1 node.
double scalar(Var v);

}  // namespace fairexit

#endif  // FAIREXIT_TAPE_HPP_

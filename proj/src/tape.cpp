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

#include "fairexit/tape.hpp"

#include <string>

#include "fairexit/errors.hpp"
#include "fairexit/tensor_ops.hpp"

namespace fairexit {

const Tape::Node& Tape::node(Var v) const {
  if (v.tape != this || v.id >= nodes_.size()) throw StateError("variable not recorded on this tape");
  return nodes_[v.id];
}

Tape::Node& Tape::node(Var v) {
  if (v.tape != this || v.id >= nodes_.size()) throw StateError("variable not recorded on this tape");
  return nodes_[v.id];
}

Var Tape::constant(Matrix value) {
  require_finite(value, "tape constant");
  Node n;
  n.grad = Matrix(value.rows(), value.cols());
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::variable(Matrix value) {
  Var v = constant(std::move(value));
  nodes_.back().requires_grad = true;
  return v;
}

Var Tape::parameter(ParamStore& store, std::size_t index) {
  if (index >= store.size()) throw DomainError("parameter index out of range");
  Var v = variable(store[index].value);
  nodes_.back().store = &store;
  nodes_.back().param_index = index;
  return v;
}

Var Tape::record(Matrix value, std::vector<Var> parents, BackwardFn backward) {
  require_finite(value, "tape node");
  bool needs_grad = false;
  for (Var p : parents) needs_grad = needs_grad || node(p).requires_grad;
  Node n;
  n.grad = Matrix(value.rows(), value.cols());
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.requires_grad = needs_grad && static_cast<bool>(backward);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

const Matrix& Tape::value(Var v) const { return node(v).value; }
const Matrix& Tape::grad(Var v) const { return node(v).grad; }
bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = node(v);
  if (!n.requires_grad) return;
  if (!n.grad.same_shape(g)) throw DimensionError("gradient shape mismatch");
  auto dst = n.grad.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::backward(Var loss) {
  if (nodes_.empty()) throw StateError("backward called before any forward pass");
  const Node& root = node(loss);
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    throw StateError("backward requires a scalar (1x1) loss");
  }
  for (auto& n : nodes_) n.grad.fill(0.0);
  nodes_[loss.id].grad(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward) n.backward(*this, n.grad);
  }
  // Stores are zeroed once each, then every bound leaf adds into them.
  for (auto& n : nodes_) {
    if (n.store != nullptr) n.store->zero_grad();
  }
  for (auto& n : nodes_) {
    if (n.store == nullptr) continue;
    Parameter& p = (*n.store)[n.param_index];
    auto dst = p.grad.data();
    auto src = n.grad.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    n.store->mark_gradients_populated();
  }
}

void Tape::clear() { nodes_.clear(); }

namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape == nullptr || a.tape != b.tape) throw StateError("operands on different tapes");
  return *a.tape;
}

Tape& tape_of(Var a) {
  if (a.tape == nullptr) throw StateError("variable has no tape");
  return *a.tape;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  Matrix out = matmul(t.value(a), t.value(b));
  return t.record(std::move(out), {a, b}, [a, b](Tape& tape, const Matrix& g) {
    if (tape.requires_grad(a)) tape.accumulate(a, matmul_transposed(g, tape.value(b)));
    if (tape.requires_grad(b)) tape.accumulate(b, transposed_matmul(tape.value(a), g));
  });
}

Var add_bias(Var x, Var bias) {
  Tape& t = same_tape(x, bias);
  const Matrix& xv = t.value(x);
  const Matrix& bv = t.value(bias);
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw DimensionError("add_bias: bias must be 1x" + std::to_string(xv.cols()));
  }
  Matrix out = xv;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += bv(0, j);
  }
  return t.record(std::move(out), {x, bias}, [x, bias](Tape& tape, const Matrix& g) {
    tape.accumulate(x, g);
    if (tape.requires_grad(bias)) {
      Matrix gb(1, g.cols());
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
      tape.accumulate(bias, gb);
    }
  });
}

Var dense(Var x, Var weights, Var bias) { return add_bias(matmul(x, weights), bias); }

Var relu(Var x) {
  Tape& t = tape_of(x);
  return t.record(relu(t.value(x)), {x}, [x](Tape& tape, const Matrix& g) {
    const Matrix& in = tape.value(x);
    Matrix gx(g.rows(), g.cols());
    auto src = g.data();
    auto mask = in.data();
    auto dst = gx.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = mask[i] > 0.0 ? src[i] : 0.0;
    tape.accumulate(x, gx);
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (!av.same_shape(bv)) throw DimensionError("add: shape mismatch");
  Matrix out = av;
  auto dst = out.data();
  auto src = bv.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tape, const Matrix& g) {
    tape.accumulate(a, g);
    tape.accumulate(b, g);
  });
}

Var scale(Var a, double factor) {
  Tape& t = tape_of(a);
  Matrix out = t.value(a);
  for (double& v : out.data()) v *= factor;
  return t.record(std::move(out), {a}, [a, factor](Tape& tape, const Matrix& g) {
    Matrix ga = g;
    for (double& v : ga.data()) v *= factor;
    tape.accumulate(a, ga);
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Matrix& av = t.value(a);
  const Matrix& bv = t.value(b);
  if (!av.same_shape(bv)) throw DimensionError("hadamard: shape mismatch");
  Matrix out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= bv.data()[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tape, const Matrix& g) {
    const Matrix& x = tape.value(a);
    const Matrix& y = tape.value(b);
    Matrix ga = g;
    Matrix gb = g;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data()[i] *= y.data()[i];
      gb.data()[i] *= x.data()[i];
    }
    tape.accumulate(a, ga);
    tape.accumulate(b, gb);
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double total = 0.0;
  for (double v : t.value(a).data()) total += v;
  return t.record(Matrix(1, 1, total), {a}, [a](Tape& tape, const Matrix& g) {
    const Matrix& av = tape.value(a);
    tape.accumulate(a, Matrix(av.rows(), av.cols(), g(0, 0)));
  });
}

Var softmax_cross_entropy(Var logits, std::span<const int> targets) {
  Tape& t = tape_of(logits);
  const Matrix& lv = t.value(logits);
  const double loss = softmax_cross_entropy(lv, targets);
  std::vector<int> y(targets.begin(), targets.end());
  return t.record(Matrix(1, 1, loss), {logits},
                  [logits, y = std::move(y)](Tape& tape, const Matrix& g) {
                    Matrix grad = softmax_rows(tape.value(logits));
                    const double inv_b = g(0, 0) / static_cast<double>(grad.rows());
                    for (std::size_t i = 0; i < grad.rows(); ++i) {
                      grad(i, static_cast<std::size_t>(y[i])) -= 1.0;
                      for (double& v : grad.row(i)) v *= inv_b;
                    }
                    tape.accumulate(logits, grad);
                  });
}

double scalar(Var v) {
  const Matrix& m = tape_of(v).value(v);
  if (m.rows() != 1 || m.cols() != 1) throw DimensionError("scalar() on a non-1x1 node");
  return m(0, 0);
}

}  // namespace fairexit

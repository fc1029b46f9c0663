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

// Reference implementations used by the tests. Each one recomputes a
// quantity from its textbook definition with plain loops and shares no code
// with the library beyond the Matrix container.
#ifndef FAIREXIT_TESTS_ORACLES_HPP_
#define FAIREXIT_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "fairexit/matrix.hpp"
#include "fairexit/model.hpp"
#include "fairexit/tape.hpp"
#include "fairexit/training.hpp"

namespace oracle {

using fairexit::Matrix;

struct Counts {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Confusion counts of class `c` inside group `g`, by filtering the group first.
inline Counts confusion(const std::vector<int>& pred, const std::vector<int>& label,
                        const std::vector<int>& sens, int c, int g) {
  Counts k;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (sens[i] != g) continue;
    const bool p = pred[i] == c, y = label[i] == c;
    k.tp += p && y;
    k.fp += p && !y;
    k.fn += !p && y;
    k.tn += !p && !y;
  }
  return k;
}

inline std::optional<double> div(std::int64_t a, std::int64_t b) {
  if (b == 0) return std::nullopt;
  return static_cast<double>(a) / static_cast<double>(b);
}

struct Metrics {
  std::optional<double> eopp0, eopp1, eodd, dp_gap;
  std::optional<double> precision[2], recall[2], f1[2], accuracy[2];
  double overall_accuracy = 0.0;
  std::size_t skipped = 0;
};

// Class-mean aggregation; a class counts only when all six group rates exist.
inline Metrics metrics(const std::vector<int>& pred, const std::vector<int>& label,
                       const std::vector<int>& sens, int num_classes) {
  Metrics out;
  double s0 = 0, s1 = 0, sodd = 0;
  int used = 0;
  for (int c = 0; c < num_classes; ++c) {
    const Counts a = confusion(pred, label, sens, c, 0);
    const Counts b = confusion(pred, label, sens, c, 1);
    const auto tpr_a = div(a.tp, a.tp + a.fn), tpr_b = div(b.tp, b.tp + b.fn);
    const auto fpr_a = div(a.fp, a.fp + a.tn), fpr_b = div(b.fp, b.fp + b.tn);
    const auto tnr_a = div(a.tn, a.fp + a.tn), tnr_b = div(b.tn, b.fp + b.tn);
    if (!tpr_a || !tpr_b || !fpr_a || !fpr_b) {
      ++out.skipped;
      continue;
    }
    ++used;
    s1 += std::fabs(*tpr_a - *tpr_b);
    s0 += std::fabs(*tnr_a - *tnr_b);
    sodd += std::fabs(*tpr_a - *tpr_b) + std::fabs(*fpr_a - *fpr_b);
  }
  if (used > 0) {
    out.eopp0 = s0 / used;
    out.eopp1 = s1 / used;
    out.eodd = sodd / used;
  }

  std::int64_t n[2] = {0, 0};
  for (int s : sens) ++n[s];
  if (n[0] > 0 && n[1] > 0) {
    double dp = 0;
    for (int c = 0; c < num_classes; ++c) {
      std::int64_t hits[2] = {0, 0};
      for (std::size_t i = 0; i < pred.size(); ++i) hits[sens[i]] += pred[i] == c;
      dp += std::fabs(static_cast<double>(hits[0]) / n[0] - static_cast<double>(hits[1]) / n[1]);
    }
    out.dp_gap = dp / num_classes;
  }

  for (int g = 0; g < 2; ++g) {
    double ps = 0, rs = 0, fs = 0;
    int pn = 0, rn = 0, fn = 0;
    std::int64_t correct = 0;
    for (int c = 0; c < num_classes; ++c) {
      const Counts k = confusion(pred, label, sens, c, g);
      correct += k.tp;
      const auto p = div(k.tp, k.tp + k.fp);
      const auto r = div(k.tp, k.tp + k.fn);
      if (p) ps += *p, ++pn;
      if (r) rs += *r, ++rn;
      if (p && r) fs += (*p + *r > 0 ? 2 * *p * *r / (*p + *r) : 0.0), ++fn;
    }
    if (pn) out.precision[g] = ps / pn;
    if (rn) out.recall[g] = rs / rn;
    if (fn) out.f1[g] = fs / fn;
    out.accuracy[g] = div(correct, n[g]);
  }
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == label[i];
  out.overall_accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());
  return out;
}

inline double sq_dist(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
  double s = 0;
  for (std::size_t k = 0; k < a.cols(); ++k) s += (a(i, k) - b(j, k)) * (a(i, k) - b(j, k));
  return s;
}

// Lower median of the pairwise Euclidean distances; 1 when that median is 0.
inline double median_sigma(const Matrix& z) {
  std::vector<double> d;
  for (std::size_t i = 0; i < z.rows(); ++i)
    for (std::size_t j = i + 1; j < z.rows(); ++j) d.push_back(std::sqrt(sq_dist(z, i, z, j)));
  if (d.empty()) return 1.0;
  std::sort(d.begin(), d.end());
  const double med = d[(d.size() - 1) / 2];
  return med > 0 ? med : 1.0;
}

// sigma <= 0 selects the linear kernel.
inline double kernel(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j,
                     double sigma) {
  if (sigma <= 0) {
    double s = 0;
    for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
    return s;
  }
  return std::exp(-sq_dist(a, i, b, j) / (2 * sigma * sigma));
}

// Biased MMD^2: mean k(x,x') + mean k(y,y') - 2 mean k(x,y).
inline double mmd2(const Matrix& x, const Matrix& y, double sigma) {
  double kxx = 0, kyy = 0, kxy = 0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.rows(); ++j) kxx += kernel(x, i, x, j, sigma);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) kyy += kernel(y, i, y, j, sigma);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) kxy += kernel(x, i, y, j, sigma);
  const double nx = static_cast<double>(x.rows()), ny = static_cast<double>(y.rows());
  return kxx / (nx * nx) + kyy / (ny * ny) - 2 * kxy / (nx * ny);
}

// trace(K H L H) / (m-1)^2 with L = a a^T on the 0/1 attribute.
inline double hsic(const Matrix& z, const std::vector<int>& a, double sigma) {
  const std::size_t m = z.rows();
  std::vector<double> K(m * m), L(m * m), H(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      K[i * m + j] = kernel(z, i, z, j, sigma);
      L[i * m + j] = static_cast<double>(a[i] * a[j]);
      H[i * m + j] = (i == j ? 1.0 : 0.0) - 1.0 / static_cast<double>(m);
    }
  auto mul = [m](const std::vector<double>& p, const std::vector<double>& q) {
    std::vector<double> r(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t j = 0; j < m; ++j) r[i * m + j] += p[i * m + k] * q[k * m + j];
    return r;
  };
  const auto prod = mul(mul(mul(K, H), L), H);
  double tr = 0;
  for (std::size_t i = 0; i < m; ++i) tr += prod[i * m + i];
  const double d = static_cast<double>(m - 1);
  return tr / (d * d);
}

// Soft nearest neighbour loss with squared Euclidean distances.
inline double snnl(const Matrix& z, const std::vector<int>& y, double temperature) {
  const std::size_t m = z.rows();
  double total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    long double num = 0, den = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i) continue;
      const long double e = std::exp(-static_cast<long double>(sq_dist(z, i, z, k)) / temperature);
      den += e;
      if (y[k] == y[i]) num += e;
    }
    total -= std::log(std::max<double>(static_cast<double>(num / den), 1e-30));
  }
  return total / static_cast<double>(m);
}

struct GradReport {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_abs = 0.0;
  double worst_rel = 0.0;
};

// Central differences of the joint loss over every scalar parameter,
// compared with the reverse-mode gradient. An entry passes when it is within
// `abs_tol` absolutely or `rel_tol` relatively.
inline GradReport check_gradients(fairexit::MultiExitModel& model, const Matrix& x,
                                  const std::vector<int>& y, const std::vector<int>& a,
                                  const fairexit::TrainConfig& cfg, double h = 1e-5,
                                  double rel_tol = 1e-4, double abs_tol = 1e-7) {
  using namespace fairexit;
  {
    Tape tape;
    const TapeForward fwd = model.forward_all(tape, tape.constant(x));
    tape.backward(joint_loss(fwd, y, a, cfg).total);
  }
  auto loss = [&] { return joint_loss(model.forward_all(x), y, a, cfg).total; };
  GradReport r;
  for (auto& p : model.params()) {
    for (std::size_t i = 0; i < p.value.rows(); ++i) {
      for (std::size_t j = 0; j < p.value.cols(); ++j) {
        const double orig = p.value(i, j);
        p.value(i, j) = orig + h;
        const double up = loss();
        p.value(i, j) = orig - h;
        const double down = loss();
        p.value(i, j) = orig;
        const double numeric = (up - down) / (2 * h);
        const double analytic = p.grad(i, j);
        const double err = std::fabs(numeric - analytic);
        const double rel = err / std::max(std::fabs(numeric), std::fabs(analytic));
        ++r.checked;
        if (err > abs_tol && rel > rel_tol) ++r.failures;
        r.worst_abs = std::max(r.worst_abs, err);
        if (err > abs_tol) r.worst_rel = std::max(r.worst_rel, rel);
      }
    }
  }
  return r;
}

}  // namespace oracle

#endif  // FAIREXIT_TESTS_ORACLES_HPP_

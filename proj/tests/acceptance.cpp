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

// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fairexit/checkpoint.hpp"
#include "fairexit/commands.hpp"
#include "fairexit/dataset.hpp"
#include "fairexit/errors.hpp"
#include "fairexit/inference.hpp"
#include "fairexit/metrics.hpp"
#include "fairexit/regularizers.hpp"
#include "fairexit/snnl.hpp"
#include "fairexit/training.hpp"
#include "oracles.hpp"

using namespace fairexit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.data()) v = n(rng);
  return m;
}

// 1. Reverse-mode gradients of the joint loss against central differences.
Outcome gradient_correctness() {
  const auto start = Clock::now();
  std::size_t checked = 0, failures = 0;
  double worst_abs = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    std::mt19937_64 rng(1000 + s);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    ModelConfig mc;
    mc.input_dim = static_cast<std::size_t>(pick(2, 8));
    mc.num_classes = pick(2, 4);
    mc.block_widths.assign(static_cast<std::size_t>(pick(1, 4)), 0);
    for (auto& w : mc.block_widths) w = static_cast<std::size_t>(pick(3, 6));
    mc.head_hidden = static_cast<std::size_t>(pick(3, 6));
    mc.seed = 2000 + s;
    MultiExitModel model(mc);

    const std::size_t b = static_cast<std::size_t>(pick(4, 16));
    const Matrix x = random_matrix(b, mc.input_dim, rng);
    std::vector<int> y(b), a(b);
    for (std::size_t i = 0; i < b; ++i) {
      y[i] = pick(0, mc.num_classes - 1);
      a[i] = static_cast<int>(i % 2);
    }
    std::shuffle(a.begin(), a.end(), rng);

    for (RegularizerKind reg : {RegularizerKind::kNone, RegularizerKind::kMmd, RegularizerKind::kHsic}) {
      TrainConfig tc;
      tc.alphas = default_alphas(mc.num_internal_exits());
      tc.lambda = 0.01;
      tc.regularizer = reg;
      tc.kernel = KernelSpec::rbf_median();
      const auto r = oracle::check_gradients(model, x, y, a, tc);
      checked += r.checked;
      failures += r.failures;
      worst_abs = std::max(worst_abs, r.worst_abs);
    }
  }
  const double secs = seconds_since(start);
  return {failures == 0 && secs < 60.0,
          std::to_string(checked) + " partials, " + std::to_string(failures) + " outside tolerance, " +
              fmt("worst abs err %.2e, %.1f s", worst_abs, secs)};
}

bool close(std::optional<double> a, std::optional<double> b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::fabs(*a - *b) <= 1e-12;
}

// 2. Metrics against a brute-force confusion-matrix oracle.
Outcome metric_oracle() {
  std::mt19937_64 rng(77);
  std::size_t mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const int m = std::uniform_int_distribution<int>(1, 64)(rng);
    const int n = std::uniform_int_distribution<int>(2, 5)(rng);
    std::uniform_int_distribution<int> cls(0, n - 1), grp(0, 1);
    std::vector<int> pred(m), label(m), sens(m);
    for (int i = 0; i < m; ++i) pred[i] = cls(rng), label[i] = cls(rng), sens[i] = grp(rng);

    const GroupRates rates = group_rates(pred, label, sens, n);
    for (int c = 0; c < n; ++c)
      for (int g = 0; g < 2; ++g) {
        const auto k = oracle::confusion(pred, label, sens, c, g);
        const auto& cell = rates.cell(c, g);
        if (cell.tp != k.tp || cell.fp != k.fp || cell.tn != k.tn || cell.fn != k.fn) ++mismatches;
      }

    const FairnessReport rep = evaluate(pred, label, sens, n);
    const oracle::Metrics ref = oracle::metrics(pred, label, sens, n);
    bool ok = close(rep.eopp0, ref.eopp0) && close(rep.eopp1, ref.eopp1) &&
              close(rep.eodd, ref.eodd) && close(rep.dp_gap, ref.dp_gap) &&
              rep.skipped_classes == ref.skipped &&
              std::fabs(rep.prf.overall_accuracy - ref.overall_accuracy) <= 1e-12;
    ok = ok && close(rep.prf.precision.g0, ref.precision[0]) && close(rep.prf.precision.g1, ref.precision[1]);
    ok = ok && close(rep.prf.recall.g0, ref.recall[0]) && close(rep.prf.recall.g1, ref.recall[1]);
    ok = ok && close(rep.prf.f1.g0, ref.f1[0]) && close(rep.prf.f1.g1, ref.f1[1]);
    ok = ok && close(rep.prf.accuracy.g0, ref.accuracy[0]) && close(rep.prf.accuracy.g1, ref.accuracy[1]);
    if (!ok) ++mismatches;
  }
  return {mismatches == 0, "200 instances, " + std::to_string(mismatches) + " mismatches"};
}

struct ToyRun {
  SplitResult parts;
  MultiExitModel model;
};

// Shared by criteria 3-5: the synthetic biased dataset, stratified 60/20/20.
Dataset biased_dataset(std::uint64_t seed) {
  SynthSpec spec;
  spec.m = 4000;
  spec.num_classes = 3;
  spec.spurious_strength = 0.8;
  spec.noise_g0 = 0.8;
  spec.noise_g1 = 1.2;
  spec.seed = 100 + seed;
  return generate_synthetic(spec);
}

// Desk-scale protocol: the library defaults except batch 32 (2,400 training
// rows give too few steps per epoch at batch 256).
TrainConfig protocol(std::uint64_t seed, bool multi_exit) {
  TrainConfig tc;
  tc.lambda = 0.01;
  tc.regularizer = RegularizerKind::kMmd;
  tc.learning_rate = 1e-2;
  tc.epochs = 100;
  tc.batch_size = 32;
  tc.seed = 400 + seed;
  if (!multi_exit) tc.alphas = {0.0, 0.0, 0.0, 0.0, 1.0};
  return tc;
}

MultiExitModel fresh_model(const Dataset& d, std::uint64_t seed) {
  ModelConfig mc;
  mc.input_dim = d.dim();
  mc.num_classes = d.num_classes;
  mc.seed = 300 + seed;
  return MultiExitModel(mc);
}

// 3. Exit index monotone in theta; boundary policies coincide.
Outcome exit_policy_invariants() {
  const Dataset d = biased_dataset(9);
  MultiExitModel model = fresh_model(d, 9);
  TrainConfig tc = protocol(9, true);
  tc.epochs = 5;
  train(model, d.subset(std::vector<std::size_t>([] {
          std::vector<std::size_t> i(3000);
          for (std::size_t k = 0; k < i.size(); ++k) i[k] = k;
          return i;
        }())),
        tc);
  std::vector<std::size_t> held(1000);
  for (std::size_t k = 0; k < held.size(); ++k) held[k] = 3000 + k;
  const Dataset test = d.subset(held);

  const ExitOutputs out = compute_exit_outputs(model, test.features);
  const std::vector<double> grid = {0.0, 0.5, 0.9, 0.99, 0.999, 1.0};
  std::size_t violations = 0;
  std::vector<std::size_t> prev(test.size(), 0);
  for (double theta : grid) {
    const Predictions p = apply_policy(out, InferenceConfig::early_exit(theta));
    for (std::size_t i = 0; i < test.size(); ++i) {
      if (p.trace.entries[i].exit < prev[i]) ++violations;
      prev[i] = p.trace.entries[i].exit;
    }
  }
  const std::size_t f = model.num_exits() - 1;
  const auto zero = predict_batch(model, test.features, InferenceConfig::early_exit(0.0));
  const auto first = predict_batch(model, test.features, InferenceConfig::fixed(0));
  const auto final_only = predict_batch(model, test.features, InferenceConfig::final_only());
  const auto last = predict_batch(model, test.features, InferenceConfig::fixed(f));
  const bool eq1 = zero.labels == first.labels;
  const bool eq2 = final_only.labels == last.labels;
  return {violations == 0 && eq1 && eq2,
          std::to_string(violations) + " monotonicity violations over 1000 samples; theta=0 == exit 1: " +
              (eq1 ? "yes" : "no") + "; final_only == exit f: " + (eq2 ? "yes" : "no")};
}

struct FairnessRun {
  double eodd_me = 0, eodd_base = 0, acc_me = 0, acc_base = 0;
  double snnl_shallow = 0, snnl_deep = 0;
};

std::vector<FairnessRun> fairness_runs;
double fairness_seconds = 0;

void run_fairness_experiment() {
  const auto start = Clock::now();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Dataset d = biased_dataset(s);
    const SplitResult parts = split(d, SplitFractions{}, 200 + s, true);
    FairnessRun run;

    MultiExitModel me = fresh_model(d, s);
    train(me, parts.train, protocol(s, true));
    const auto p_me = predict_batch(me, parts.test.features, InferenceConfig::early_exit(0.999));
    const auto r_me = evaluate(p_me.labels, parts.test.targets, parts.test.sensitive, d.num_classes);
    run.eodd_me = r_me.eodd.value();
    run.acc_me = r_me.prf.overall_accuracy;

    const ForwardResult fwd = me.forward_all(parts.test.features);
    run.snnl_shallow = snnl(fwd.features.front(), parts.test.targets, ProbeConfig{}).value;
    run.snnl_deep = snnl(fwd.features.back(), parts.test.targets, ProbeConfig{}).value;

    MultiExitModel base = fresh_model(d, s);
    train(base, parts.train, protocol(s, false));
    const auto p_base = predict_batch(base, parts.test.features, InferenceConfig::final_only());
    const auto r_base = evaluate(p_base.labels, parts.test.targets, parts.test.sensitive, d.num_classes);
    run.eodd_base = r_base.eodd.value();
    run.acc_base = r_base.prf.overall_accuracy;

    std::printf("  seed %llu: eodd me %.4f base %.4f | acc me %.4f base %.4f | snnl 1 %.4f f %.4f\n",
                static_cast<unsigned long long>(s), run.eodd_me, run.eodd_base, run.acc_me,
                run.acc_base, run.snnl_shallow, run.snnl_deep);
    fairness_runs.push_back(run);
  }
  fairness_seconds = seconds_since(start);
}

// 4. Multi-exit model is fairer than the single-exit baseline.
Outcome fairness_effect() {
  std::vector<double> em, eb, am, ab;
  for (const auto& r : fairness_runs) {
    em.push_back(r.eodd_me), eb.push_back(r.eodd_base);
    am.push_back(r.acc_me), ab.push_back(r.acc_base);
  }
  const double drop = median(ab) - median(am);
  const bool pass = median(em) < median(eb) && drop <= 0.02 && fairness_seconds < 600.0;
  return {pass, fmt("median eodd me %.4f vs base %.4f; accuracy drop %.4f; %.0f s", median(em),
                    median(eb), drop, fairness_seconds)};
}

// 5. Target SNNL falls from the shallowest to the deepest exit.
Outcome snnl_shape() {
  std::vector<double> shallow, deep;
  for (const auto& r : fairness_runs) shallow.push_back(r.snnl_shallow), deep.push_back(r.snnl_deep);
  return {median(deep) < median(shallow),
          fmt("median target snnl shallow %.4f deep %.4f", median(shallow), median(deep))};
}

// 6. Regularizer hand cases and non-negativity.
Outcome regularizer_analytics() {
  const auto lin = KernelSpec::linear();
  const double equal_means = mmd2(Matrix{{0.0}, {2.0}}, Matrix{{1.0}, {1.0}}, lin);
  const double distance_two = mmd2(Matrix{{0.0}}, Matrix{{2.0}}, lin);
  const std::vector<int> a = {0, 1};
  const double h = hsic(Matrix{{0.0}, {1.0}}, a, lin, lin);
  bool ok = std::fabs(equal_means) <= 1e-12 && std::fabs(distance_two - 4.0) <= 1e-12 &&
            std::fabs(h - 0.25) <= 1e-12;

  std::mt19937_64 rng(5);
  std::size_t negatives = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(2, 12)(rng);
    const std::size_t d = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const Matrix z = random_matrix(m, d, rng);
    std::vector<int> s(m);
    for (std::size_t i = 0; i < m; ++i) s[i] = static_cast<int>(i % 2);
    std::shuffle(s.begin(), s.end(), rng);
    std::vector<std::size_t> i0, i1;
    for (std::size_t i = 0; i < m; ++i) (s[i] ? i1 : i0).push_back(i);
    const KernelSpec spec = t % 2 ? KernelSpec::rbf_median() : lin;
    if (mmd2(z.gather_rows(i0), z.gather_rows(i1), spec) < 0.0) ++negatives;
    if (hsic(z, s, spec) < 0.0) ++negatives;
  }
  ok = ok && negatives == 0;
  return {ok, fmt("mmd2 equal means %.3g, distance two %.17g, hsic %.17g; ", equal_means,
                  distance_two, h) +
                  std::to_string(negatives) + " negative values in 2000 random evaluations"};
}

// 7. Checkpoint round trip and seeded determinism.
Outcome persistence() {
  SynthSpec spec;
  spec.m = 400;
  spec.seed = 3;
  const Dataset d = generate_synthetic(spec);
  RunConfig cfg;
  cfg.set_seed(11);
  cfg.model.input_dim = d.dim();
  cfg.model.num_classes = d.num_classes;
  cfg.train.epochs = 3;
  cfg.train.batch_size = 64;

  auto run = [&] {
    MultiExitModel m(cfg.model);
    auto hist = train(m, d, cfg.train);
    return std::make_pair(std::move(m), loss_history_csv(hist));
  };
  auto [model, history1] = run();
  auto [model2, history2] = run();
  const std::string ckpt = checkpoint_json(cfg, model, 3);
  const bool same_ckpt = ckpt == checkpoint_json(cfg, model2, 3);
  const LoadedCheckpoint loaded = parse_checkpoint(ckpt);

  std::mt19937_64 rng(99);
  const Matrix probe = random_matrix(100, d.dim(), rng);
  const ForwardResult a = model.forward_all(probe), b = loaded.model.forward_all(probe);
  bool identical = a.logits.size() == b.logits.size();
  for (std::size_t k = 0; identical && k < a.logits.size(); ++k) identical = a.logits[k] == b.logits[k];
  const bool same_history = history1 == history2;
  return {identical && same_history && same_ckpt,
          std::string("round-trip logits bit-identical: ") + (identical ? "yes" : "no") +
              "; loss histories byte-identical: " + (same_history ? "yes" : "no") +
              "; checkpoints byte-identical: " + (same_ckpt ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"1 gradient correctness", gradient_correctness},
      {"2 metric oracle equivalence", metric_oracle},
      {"3 exit-policy invariants", exit_policy_invariants},
      {"4 desk-scale fairness effect", [] {
         run_fairness_experiment();
         return fairness_effect();
       }},
      {"5 snnl depth shape", snnl_shape},
      {"6 regularizer analytics", regularizer_analytics},
      {"7 persistence and determinism", persistence},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %s: %s\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}

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

// fair_exit: train, evaluate and probe multi-exit models from the shell.

#include <iostream>

#include "CLI11.hpp"
#include "fairexit/commands.hpp"

namespace {

void add_eval_flags(CLI::App* sub, fairexit::CommandOptions& opts) {
  sub->add_option("--checkpoint", opts.checkpoint, "checkpoint JSON")->required();
  sub->add_option("--data", opts.data, "CSV to evaluate; default regenerates the run's split");
  sub->add_option("--split", opts.split, "split used without --data")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  sub->add_option("--out", opts.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fair_exit: fairness-aware multi-exit networks"};
  app.require_subcommand(1);
  fairexit::CommandOptions opts;

  auto* train = app.add_subcommand("train", "train a model from an INI config");
  train->add_option("--config", opts.config, "INI run config")->required();
  train->add_option("--out", opts.out, "output directory");
  train->add_option("--seed", opts.seed, "override run.seed");

  auto* eval = app.add_subcommand("eval", "write a fairness report");
  add_eval_flags(eval, opts);
  eval->add_option("--theta", opts.theta, "override the confidence threshold");

  auto* sweep = app.add_subcommand("sweep-theta", "evaluate a grid of thresholds");
  add_eval_flags(sweep, opts);
  sweep->add_option("--grid", opts.grid, "thresholds, ascending")->delimiter(',');

  auto* per_exit = app.add_subcommand("per-exit", "evaluate each exit on its own");
  add_eval_flags(per_exit, opts);
  per_exit->add_option("--theta", opts.theta, "threshold for the policy row");

  auto* probe = app.add_subcommand("snnl-probe", "SNNL of target and sensitive labels per exit");
  add_eval_flags(probe, opts);
  probe->add_option("--temperature", opts.temperature, "SNNL temperature");

  auto* gen = app.add_subcommand("gen-data", "write the configured synthetic dataset as CSV");
  gen->add_option("--config", opts.config, "INI run config")->required();
  gen->add_option("--out", opts.out, "CSV path")->required();
  gen->add_option("--seed", opts.seed, "override run.seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fairexit::kStatusConfig;
  }

  opts.threads = fairexit::evaluation_threads();
  if (*train) return fairexit::cmd_train(opts, std::cout, std::cerr);
  if (*eval) return fairexit::cmd_eval(opts, std::cout, std::cerr);
  if (*sweep) return fairexit::cmd_sweep_theta(opts, std::cout, std::cerr);
  if (*per_exit) return fairexit::cmd_per_exit(opts, std::cout, std::cerr);
  if (*probe) return fairexit::cmd_snnl_probe(opts, std::cout, std::cerr);
  return fairexit::cmd_gen_data(opts, std::cout, std::cerr);
}

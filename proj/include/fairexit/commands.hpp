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

#ifndef FAIREXIT_COMMANDS_HPP_
#define FAIREXIT_COMMANDS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fairexit/training.hpp"

namespace fairexit {

// Process exit statuses of the fair_exit tool.
enum ExitStatus : int {
  kStatusOk = 0,
  kStatusFailure = 1,
  kStatusConfig = 2,
  kStatusData = 3,
  kStatusCheckpoint = 4,
};

struct CommandOptions {
  std::string config;
  std::string checkpoint;
  std::string data;        // CSV; empty means regenerate from the checkpoint config
  std::string split = "test";  // train | val | test | all, used when `data` is empty
  std::optional<double> theta;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::vector<double> grid = {0.5, 0.9, 0.99, 0.999};
  double temperature = 1.0;
  std::size_t threads = 1;
};

// Each command returns an ExitStatus and reports errors on `err`.
int cmd_train(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_eval(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep_theta(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_per_exit(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_snnl_probe(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_gen_data(const CommandOptions& opts, std::ostream& out, std::ostream& err);

// CSV: epoch,total,l_t_1..l_t_f,l_s_1..l_s_f,degenerate_batches
std::string loss_history_csv(const std::vector<EpochRecord>& history);

// Evaluation parallelism: hardware concurrency, capped by FAIR_EXIT_THREADS.
std::size_t evaluation_threads();

}  // namespace fairexit

#endif  // FAIREXIT_COMMANDS_HPP_

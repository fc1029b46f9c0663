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

#ifndef FAIREXIT_CHECKPOINT_HPP_
#define FAIREXIT_CHECKPOINT_HPP_

#include <filesystem>
#include <string>

#include "fairexit/model.hpp"
#include "fairexit/run_config.hpp"

namespace fairexit {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointFormat = "fair-exit-checkpoint";

// Versioned JSON checkpoint:
//   { "format": "fair-exit-checkpoint", "version": 1,
//     "config": <RunConfig>, "epochs_trained": E, "seed": S,
//     "parameters": [ {"name": ..., "shape": [rows, cols], "values": [...]}, ... ] }
// Values are row-major decimal floats in shortest round-trip form, so a
// reload reproduces every weight bit for bit.
std::string checkpoint_json(const RunConfig& config, const MultiExitModel& model,
                            std::size_t epochs_trained);
void save_checkpoint(const std::filesystem::path& path, const RunConfig& config,
                     const MultiExitModel& model, std::size_t epochs_trained);

struct LoadedCheckpoint {
  RunConfig config;
  MultiExitModel model;
  std::size_t epochs_trained = 0;
};

// Throws CheckpointError on unreadable files, a wrong format/version (checked
// before any weight is read), or parameter names/shapes that do not match
// the architecture in the stored config.
LoadedCheckpoint parse_checkpoint(const std::string& text);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fairexit

#endif  // FAIREXIT_CHECKPOINT_HPP_

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

#include "fairexit/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "fairexit/errors.hpp"

namespace fairexit {

std::string checkpoint_json(const RunConfig& config, const MultiExitModel& model,
                            std::size_t epochs_trained) {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  RunConfig snapshot = config;
  snapshot.model = model.config();
  j["config"] = to_json(snapshot);
  j["epochs_trained"] = epochs_trained;
  j["seed"] = config.seed;
  auto params = nlohmann::ordered_json::array();
  for (const auto& p : model.params()) {
    nlohmann::ordered_json entry;
    entry["name"] = p.name;
    entry["shape"] = {p.value.rows(), p.value.cols()};
    entry["values"] = std::vector<double>(p.value.data().begin(), p.value.data().end());
    params.push_back(std::move(entry));
  }
  j["parameters"] = std::move(params);
  return j.dump(1) + "\n";
}

void save_checkpoint(const std::filesystem::path& path, const RunConfig& config,
                     const MultiExitModel& model, std::size_t epochs_trained) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << checkpoint_json(config, model, epochs_trained);
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint parse_checkpoint(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
    throw CheckpointError("not a fair-exit checkpoint");
  }
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          (j.contains("version") ? j["version"].dump() : std::string("<missing>")) +
                          " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  RunConfig config = run_config_from_json(j.at("config"));
  std::optional<MultiExitModel> model;
  try {
    model.emplace(config.model);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint model config: ") + e.what());
  }
  try {
    const auto& params = j.at("parameters");
    ParamStore& store = model->params();
    if (params.size() != store.size()) {
      throw CheckpointError("checkpoint has " + std::to_string(params.size()) +
                            " parameters, architecture needs " + std::to_string(store.size()));
    }
    for (std::size_t i = 0; i < store.size(); ++i) {
      const auto& entry = params[i];
      Parameter& p = store[i];
      if (entry.at("name").get<std::string>() != p.name) {
        throw CheckpointError("parameter " + std::to_string(i) + " is '" +
                              entry.at("name").get<std::string>() + "', expected '" + p.name + "'");
      }
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      if (shape.size() != 2 || shape[0] != p.value.rows() || shape[1] != p.value.cols()) {
        throw CheckpointError("parameter " + p.name + " has the wrong shape");
      }
      auto values = entry.at("values").get<std::vector<double>>();
      p.value = Matrix(shape[0], shape[1], std::move(values));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint parameters: ") + e.what());
  } catch (const DimensionError& e) {
    throw CheckpointError(std::string("malformed checkpoint parameters: ") + e.what());
  }
  const auto epochs = j.value("epochs_trained", std::size_t{0});
  return {std::move(config), std::move(*model), epochs};
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace fairexit

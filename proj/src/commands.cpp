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

#include "fairexit/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "fairexit/checkpoint.hpp"
#include "fairexit/errors.hpp"
#include "fairexit/format.hpp"
#include "fairexit/inference.hpp"
#include "fairexit/metrics.hpp"
#include "fairexit/run_config.hpp"
#include "fairexit/snnl.hpp"

namespace fairexit {

namespace fs = std::filesystem;

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kStatusConfig;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kStatusCheckpoint;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kStatusData;
  } catch (const DomainError& e) {
    err << "data error: " << e.what() << '\n';
    return kStatusData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kStatusFailure;
  }
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
  if (!out) throw DataError("failed writing " + path.string());
}

fs::path prepare_output_dir(const CommandOptions& opts, const RunConfig& config) {
  const fs::path dir = opts.out.value_or(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void report_warnings(const Warnings& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

LoadedCheckpoint load_required_checkpoint(const CommandOptions& opts) {
  if (opts.checkpoint.empty()) throw ConfigError("--checkpoint is required");
  return load_checkpoint(opts.checkpoint);
}

// Evaluation data: an explicit CSV, or the checkpoint's own data source
// regenerated and split exactly as during training.
Dataset evaluation_data(const CommandOptions& opts, const LoadedCheckpoint& ckpt,
                        std::ostream& err) {
  Warnings warnings;
  Dataset data;
  if (!opts.data.empty()) {
    data = load_csv(opts.data, ckpt.model.config().num_classes, &warnings);
  } else {
    const RunConfig& cfg = ckpt.config;
    const Dataset full = load_dataset(cfg, &warnings);
    if (opts.split == "all") {
      data = full;
    } else {
      SplitResult parts = split(full, cfg.split, cfg.seed + 3, cfg.stratify, &warnings);
      if (opts.split == "train") {
        data = std::move(parts.train);
      } else if (opts.split == "val") {
        data = std::move(parts.val);
      } else if (opts.split == "test") {
        data = std::move(parts.test);
      } else {
        throw ConfigError("--split must be train, val, test or all");
      }
    }
  }
  report_warnings(warnings, err);
  if (data.size() == 0) throw DataError("evaluation dataset is empty");
  if (data.dim() != ckpt.model.config().input_dim) {
    throw DataError("evaluation data has " + std::to_string(data.dim()) +
                    " features, model expects " + std::to_string(ckpt.model.config().input_dim));
  }
  return data;
}

InferenceConfig inference_config(const CommandOptions& opts, const LoadedCheckpoint& ckpt) {
  InferenceConfig cfg = ckpt.config.inference;
  if (opts.theta) cfg.theta = *opts.theta;
  cfg.validate(ckpt.model.num_exits());
  return cfg;
}

}  // namespace

std::size_t evaluation_threads() {
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FAIR_EXIT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) threads = std::min(threads, static_cast<std::size_t>(cap));
  }
  return threads;
}

std::string loss_history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  const std::size_t exits = history.empty() ? 0 : history.front().loss.target_loss.size();
  out << "epoch,total";
  for (std::size_t k = 0; k < exits; ++k) out << ",l_t_" << exit_label(k, exits);
  for (std::size_t k = 0; k < exits; ++k) out << ",l_s_" << exit_label(k, exits);
  out << ",degenerate_batches\n";
  for (const auto& rec : history) {
    out << rec.epoch << ',' << format_double(rec.loss.total);
    for (double v : rec.loss.target_loss) out << ',' << format_double(v);
    for (double v : rec.loss.fairness_loss) out << ',' << format_double(v);
    out << ',' << rec.degenerate_batches << '\n';
  }
  return out.str();
}

int cmd_train(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.config.empty()) throw ConfigError("--config is required");
    RunConfig cfg = load_run_config(opts.config);
    if (opts.seed) cfg.set_seed(*opts.seed);
    if (opts.out) cfg.output_dir = *opts.out;

    Warnings warnings;
    const Dataset data = load_dataset(cfg, &warnings);
    SplitResult parts = split(data, cfg.split, cfg.seed + 3, cfg.stratify, &warnings);
    Dataset train_set = std::move(parts.train);
    if (cfg.data.augment_copies > 0) {
      train_set = augment_jitter(train_set, cfg.data.augment_sigma, cfg.data.augment_copies,
                                 cfg.seed + 4);
    }
    if (train_set.size() == 0) throw DataError("training split is empty");
    if (!train_set.has_both_groups()) warnings.push_back("training split holds one sensitive group");
    report_warnings(warnings, err);

    cfg.model.input_dim = data.dim();
    cfg.model.num_classes = data.num_classes;
    MultiExitModel model = build_model(cfg.model);
    const std::vector<EpochRecord> history = train(model, train_set, cfg.train);

    const fs::path dir = prepare_output_dir(opts, cfg);
    save_checkpoint(dir / "model.ckpt.json", cfg, model, history.size());
    write_file(dir / "loss_history.csv", loss_history_csv(history));
    out << "trained " << history.size() << " epochs on " << train_set.size()
        << " samples; final total loss " << format_double(history.back().loss.total) << '\n'
        << "checkpoint: " << (dir / "model.ckpt.json").string() << '\n';
    return kStatusOk;
  });
}

int cmd_eval(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LoadedCheckpoint ckpt = load_required_checkpoint(opts);
    const InferenceConfig inf = inference_config(opts, ckpt);
    const Dataset data = evaluation_data(opts, ckpt, err);
    const Predictions preds = predict_batch(ckpt.model, data.features, inf, opts.threads);
    const FairnessReport report =
        evaluate(preds.labels, data.targets, data.sensitive, data.num_classes);

    const std::size_t exits = ckpt.model.num_exits();
    nlohmann::ordered_json j = to_json(report);
    j["theta"] = inf.theta;
    j["num_samples"] = data.size();
    nlohmann::ordered_json hist;
    for (std::size_t k = 0; k < exits; ++k) hist[exit_label(k, exits)] = preds.trace.histogram[k];
    j["exit_histogram"] = hist;

    std::string text = to_text(report);
    text += "theta=" + format_double(inf.theta) + "\n";
    text += "num_samples=" + std::to_string(data.size()) + "\n";
    for (std::size_t k = 0; k < exits; ++k)
      text += "hist_" + exit_label(k, exits) + "=" + std::to_string(preds.trace.histogram[k]) + "\n";

    const fs::path dir = prepare_output_dir(opts, ckpt.config);
    write_file(dir / "report.json", j.dump(2) + "\n");
    write_file(dir / "report.txt", text);
    out << text;
    return kStatusOk;
  });
}

int cmd_sweep_theta(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LoadedCheckpoint ckpt = load_required_checkpoint(opts);
    const Dataset data = evaluation_data(opts, ckpt, err);
    const auto rows = sweep_theta(ckpt.model, data, opts.grid, opts.threads);
    const std::string csv = rows_to_csv(rows, "theta", ckpt.model.num_exits());
    const fs::path dir = prepare_output_dir(opts, ckpt.config);
    write_file(dir / "sweep_theta.csv", csv);
    out << csv;
    return kStatusOk;
  });
}

int cmd_per_exit(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LoadedCheckpoint ckpt = load_required_checkpoint(opts);
    const InferenceConfig inf = inference_config(opts, ckpt);
    const Dataset data = evaluation_data(opts, ckpt, err);
    const auto rows = per_exit_eval(ckpt.model, data, inf.theta, opts.threads);
    const std::string csv = rows_to_csv(rows, "exit", ckpt.model.num_exits());
    const fs::path dir = prepare_output_dir(opts, ckpt.config);
    write_file(dir / "per_exit.csv", csv);
    out << csv;
    return kStatusOk;
  });
}

int cmd_snnl_probe(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LoadedCheckpoint ckpt = load_required_checkpoint(opts);
    const ProbeConfig probe{opts.temperature};
    probe.validate();
    const Dataset data = evaluation_data(opts, ckpt, err);
    const ForwardResult fwd = ckpt.model.forward_all(data.features);
    const std::size_t exits = ckpt.model.num_exits();
    std::ostringstream csv;
    csv << "position,snnl_target,snnl_sensitive\n";
    for (std::size_t k = 0; k < exits; ++k) {
      const SnnlResult target = snnl(fwd.features[k], data.targets, probe);
      const SnnlResult sensitive = snnl(fwd.features[k], data.sensitive, probe);
      csv << exit_label(k, exits) << ',' << format_double(target.value) << ','
          << format_double(sensitive.value) << '\n';
    }
    const fs::path dir = prepare_output_dir(opts, ckpt.config);
    write_file(dir / "snnl_probe.csv", csv.str());
    out << csv.str();
    return kStatusOk;
  });
}

int cmd_gen_data(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opts.config.empty()) throw ConfigError("--config is required");
    if (!opts.out) throw ConfigError("--out (CSV path) is required");
    RunConfig cfg = load_run_config(opts.config);
    if (opts.seed) cfg.set_seed(*opts.seed);
    if (cfg.data.kind != DataSource::Kind::kSynthetic) {
      throw ConfigError("data.source must be synthetic for gen-data");
    }
    const Dataset data = load_dataset(cfg);
    const fs::path path = *opts.out;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    save_csv(data, path);
    out << "wrote " << data.size() << " samples to " << path.string() << '\n';
    return kStatusOk;
  });
}

}  // namespace fairexit

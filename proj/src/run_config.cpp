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

#include "fairexit/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "fairexit/errors.hpp"

namespace fairexit {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_value(const std::string& field, const std::string& raw) {
  const std::string text = trim(raw);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(field + ": cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& field, const std::string& raw) {
  const std::string text = trim(raw);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(field + ": expected true or false, got '" + text + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& field, const std::string& raw) {
  std::vector<T> out;
  std::stringstream in(raw);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_value<T>(field, item));
  if (out.empty()) throw ConfigError(field + ": empty list");
  return out;
}

ExitMode parse_mode(const std::string& raw, std::size_t& fixed_exit) {
  const std::string text = trim(raw);
  if (text == "early_exit") return ExitMode::kEarlyExit;
  if (text == "final_only") return ExitMode::kFinalOnly;
  if (text.rfind("fixed_exit:", 0) == 0) {
    const auto k = parse_value<std::size_t>("inference.mode", text.substr(11));
    if (k == 0) throw ConfigError("inference.mode: fixed exits are numbered from 1");
    fixed_exit = k - 1;
    return ExitMode::kFixedExit;
  }
  throw ConfigError("inference.mode: expected early_exit, final_only or fixed_exit:<k>, got '" +
                    text + "'");
}

std::string mode_string(const InferenceConfig& cfg) {
  switch (cfg.mode) {
    case ExitMode::kEarlyExit:
      return "early_exit";
    case ExitMode::kFinalOnly:
      return "final_only";
    case ExitMode::kFixedExit:
      return "fixed_exit:" + std::to_string(cfg.fixed_exit + 1);
  }
  return "early_exit";
}

}  // namespace

void RunConfig::set_seed(std::uint64_t new_seed) {
  seed = new_seed;
  model.seed = new_seed;
  train.seed = new_seed + 1;
  data.synthetic.seed = new_seed + 2;
}

RunConfig parse_run_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig cfg;
  std::optional<std::string> alphas_text;
  std::optional<std::uint64_t> seed;
  for (const auto& [section, body] : tree) {
    static const std::set<std::string> kSections = {"run",  "model", "train",
                                                    "inference", "data", "split"};
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config: key '" + section + "' must appear inside a [section]");
    }
    if (!kSections.contains(section)) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, node] : body) {
      const std::string field = section + "." + key;
      const std::string value = node.get_value<std::string>();
      if (section == "run") {
        if (key == "seed") {
          seed = parse_value<std::uint64_t>(field, value);
        } else if (key == "output_dir") {
          cfg.output_dir = trim(value);
        } else {
          throw ConfigError("unknown config key " + field);
        }
      } else if (section == "model") {
        if (key == "block_widths") {
          cfg.model.block_widths = parse_list<std::size_t>(field, value);
        } else if (key == "head_hidden") {
          cfg.model.head_hidden = parse_value<std::size_t>(field, value);
        } else if (key == "num_classes") {
          cfg.num_classes = parse_value<int>(field, value);
        } else {
          throw ConfigError("unknown config key " + field);
        }
      } else if (section == "train") {
        if (key == "alphas") {
          alphas_text = value;
        } else if (key == "lambda") {
          cfg.train.lambda = parse_value<double>(field, value);
        } else if (key == "regularizer") {
          cfg.train.regularizer = parse_regularizer(trim(value));
        } else if (key == "kernel") {
          try {
            cfg.train.kernel = KernelSpec::parse(trim(value));
          } catch (const ConfigError& e) {
            throw ConfigError(field + ": " + e.what());
          }
        } else if (key == "learning_rate") {
          cfg.train.learning_rate = parse_value<double>(field, value);
        } else if (key == "epochs") {
          cfg.train.epochs = parse_value<std::size_t>(field, value);
        } else if (key == "batch_size") {
          cfg.train.batch_size = parse_value<std::size_t>(field, value);
        } else {
          throw ConfigError("unknown config key " + field);
        }
      } else if (section == "inference") {
        if (key == "theta") {
          cfg.inference.theta = parse_value<double>(field, value);
        } else if (key == "mode") {
          cfg.inference.mode = parse_mode(value, cfg.inference.fixed_exit);
        } else {
          throw ConfigError("unknown config key " + field);
        }
      } else if (section == "data") {
        auto& s = cfg.data.synthetic;
        if (key == "source") {
          const std::string src = trim(value);
          if (src == "synthetic") {
            cfg.data.kind = DataSource::Kind::kSynthetic;
          } else if (src == "csv") {
            cfg.data.kind = DataSource::Kind::kCsv;
          } else {
            throw ConfigError(field + ": expected synthetic or csv, got '" + src + "'");
          }
        } else if (key == "path") {
          cfg.data.csv_path = trim(value);
        } else if (key == "m") {
          s.m = parse_value<std::size_t>(field, value);
        } else if (key == "num_classes") {
          s.num_classes = parse_value<int>(field, value);
        } else if (key == "d_signal") {
          s.d_signal = parse_value<std::size_t>(field, value);
        } else if (key == "d_spurious") {
          s.d_spurious = parse_value<std::size_t>(field, value);
        } else if (key == "spurious_strength") {
          s.spurious_strength = parse_value<double>(field, value);
        } else if (key == "noise_g0") {
          s.noise_g0 = parse_value<double>(field, value);
        } else if (key == "noise_g1") {
          s.noise_g1 = parse_value<double>(field, value);
        } else if (key == "class_separation") {
          s.class_separation = parse_value<double>(field, value);
        } else if (key == "augment_sigma") {
          cfg.data.augment_sigma = parse_value<double>(field, value);
        } else if (key == "augment_copies") {
          cfg.data.augment_copies = parse_value<std::size_t>(field, value);
        } else {
          throw ConfigError("unknown config key " + field);
        }
      } else if (section == "split") {
        if (key == "train") {
          cfg.split.train = parse_value<double>(field, value);
        } else if (key == "val") {
          cfg.split.val = parse_value<double>(field, value);
        } else if (key == "test") {
          cfg.split.test = parse_value<double>(field, value);
        } else if (key == "stratify") {
          cfg.stratify = parse_bool(field, value);
        } else {
          throw ConfigError("unknown config key " + field);
        }
      } else {
        throw ConfigError("unknown config section [" + section + "]");
      }
    }
  }

  cfg.set_seed(seed.value_or(0));
  cfg.train.alphas = alphas_text ? parse_list<double>("train.alphas", *alphas_text)
                                 : default_alphas(cfg.model.num_internal_exits());

  if (cfg.model.block_widths.empty()) throw ConfigError("model.block_widths: need at least one block");
  for (std::size_t w : cfg.model.block_widths) {
    if (w == 0) throw ConfigError("model.block_widths: widths must be positive");
  }
  if (cfg.model.head_hidden == 0) throw ConfigError("model.head_hidden must be positive");
  if (cfg.num_classes && *cfg.num_classes < 2) throw ConfigError("model.num_classes must be >= 2");
  cfg.train.validate(cfg.model.num_exits());
  cfg.inference.validate(cfg.model.num_exits());
  try {
    cfg.split.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("split: ") + e.what());
  }
  if (cfg.data.kind == DataSource::Kind::kCsv && cfg.data.csv_path.empty()) {
    throw ConfigError("data.path is required when data.source = csv");
  }
  if (!(cfg.data.augment_sigma >= 0.0)) throw ConfigError("data.augment_sigma must be >= 0");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["model"] = {{"input_dim", c.model.input_dim},
                {"num_classes", c.model.num_classes},
                {"block_widths", c.model.block_widths},
                {"head_hidden", c.model.head_hidden},
                {"seed", c.model.seed}};
  if (c.num_classes) j["model"]["configured_num_classes"] = *c.num_classes;
  j["train"] = {{"alphas", c.train.alphas},
                {"lambda", c.train.lambda},
                {"regularizer", to_string(c.train.regularizer)},
                {"kernel", c.train.kernel.to_string()},
                {"learning_rate", c.train.learning_rate},
                {"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"seed", c.train.seed}};
  j["inference"] = {{"theta", c.inference.theta}, {"mode", mode_string(c.inference)}};
  const auto& s = c.data.synthetic;
  j["data"] = {{"source", c.data.kind == DataSource::Kind::kCsv ? "csv" : "synthetic"},
               {"path", c.data.csv_path},
               {"m", s.m},
               {"num_classes", s.num_classes},
               {"d_signal", s.d_signal},
               {"d_spurious", s.d_spurious},
               {"spurious_strength", s.spurious_strength},
               {"noise_g0", s.noise_g0},
               {"noise_g1", s.noise_g1},
               {"class_separation", s.class_separation},
               {"seed", s.seed},
               {"augment_sigma", c.data.augment_sigma},
               {"augment_copies", c.data.augment_copies}};
  j["split"] = {{"train", c.split.train},
                {"val", c.split.val},
                {"test", c.split.test},
                {"stratify", c.stratify}};
  return j;
}

RunConfig run_config_from_json(const nlohmann::ordered_json& j) {
  RunConfig c;
  try {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.output_dir = j.at("output_dir").get<std::string>();
    const auto& m = j.at("model");
    c.model.input_dim = m.at("input_dim").get<std::size_t>();
    c.model.num_classes = m.at("num_classes").get<int>();
    c.model.block_widths = m.at("block_widths").get<std::vector<std::size_t>>();
    c.model.head_hidden = m.at("head_hidden").get<std::size_t>();
    c.model.seed = m.at("seed").get<std::uint64_t>();
    if (m.contains("configured_num_classes")) c.num_classes = m["configured_num_classes"].get<int>();
    const auto& t = j.at("train");
    c.train.alphas = t.at("alphas").get<std::vector<double>>();
    c.train.lambda = t.at("lambda").get<double>();
    c.train.regularizer = parse_regularizer(t.at("regularizer").get<std::string>());
    c.train.kernel = KernelSpec::parse(t.at("kernel").get<std::string>());
    c.train.learning_rate = t.at("learning_rate").get<double>();
    c.train.epochs = t.at("epochs").get<std::size_t>();
    c.train.batch_size = t.at("batch_size").get<std::size_t>();
    c.train.seed = t.at("seed").get<std::uint64_t>();
    const auto& inf = j.at("inference");
    c.inference.theta = inf.at("theta").get<double>();
    c.inference.mode = parse_mode(inf.at("mode").get<std::string>(), c.inference.fixed_exit);
    const auto& d = j.at("data");
    c.data.kind = d.at("source").get<std::string>() == "csv" ? DataSource::Kind::kCsv
                                                             : DataSource::Kind::kSynthetic;
    c.data.csv_path = d.at("path").get<std::string>();
    auto& s = c.data.synthetic;
    s.m = d.at("m").get<std::size_t>();
    s.num_classes = d.at("num_classes").get<int>();
    s.d_signal = d.at("d_signal").get<std::size_t>();
    s.d_spurious = d.at("d_spurious").get<std::size_t>();
    s.spurious_strength = d.at("spurious_strength").get<double>();
    s.noise_g0 = d.at("noise_g0").get<double>();
    s.noise_g1 = d.at("noise_g1").get<double>();
    s.class_separation = d.at("class_separation").get<double>();
    s.seed = d.at("seed").get<std::uint64_t>();
    c.data.augment_sigma = d.at("augment_sigma").get<double>();
    c.data.augment_copies = d.at("augment_copies").get<std::size_t>();
    const auto& sp = j.at("split");
    c.split.train = sp.at("train").get<double>();
    c.split.val = sp.at("val").get<double>();
    c.split.test = sp.at("test").get<double>();
    c.stratify = sp.at("stratify").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint config: ") + e.what());
  }
  return c;
}

Dataset load_dataset(const RunConfig& config, Warnings* warnings) {
  if (config.data.kind == DataSource::Kind::kCsv) {
    return load_csv(config.data.csv_path, config.num_classes, warnings);
  }
  SynthSpec spec = config.data.synthetic;
  if (config.num_classes) spec.num_classes = *config.num_classes;
  return generate_synthetic(spec);
}

}  // namespace fairexit

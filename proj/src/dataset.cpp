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

#include "fairexit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "fairexit/errors.hpp"
#include "fairexit/format.hpp"

namespace fairexit {

bool Dataset::has_both_groups() const {
  bool seen[2] = {false, false};
  for (int a : sensitive) seen[a == 0 ? 0 : 1] = true;
  return seen[0] && seen[1];
}

void Dataset::validate() const {
  if (num_classes < 2) throw DataError("num_classes must be >= 2");
  if (features.rows() != targets.size() || targets.size() != sensitive.size()) {
    throw DataError("dataset arrays have inconsistent lengths");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= num_classes) {
      throw DataError("target " + std::to_string(targets[i]) + " at row " + std::to_string(i) +
                      " outside [0, " + std::to_string(num_classes) + ")");
    }
    if (sensitive[i] != 0 && sensitive[i] != 1) {
      throw DataError("sensitive value " + std::to_string(sensitive[i]) + " at row " +
                      std::to_string(i) + " is not 0 or 1");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.num_classes = num_classes;
  out.features = features.gather_rows(indices);
  out.targets.reserve(indices.size());
  out.sensitive.reserve(indices.size());
  for (std::size_t i : indices) {
    out.targets.push_back(targets[i]);
    out.sensitive.push_back(sensitive[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic generator

void SynthSpec::validate() const {
  if (num_classes < 2) throw ConfigError("synthetic num_classes must be >= 2");
  if (d_signal == 0) throw ConfigError("synthetic d_signal must be >= 1");
  if (d_signal == 1 && num_classes > 2) {
    throw ConfigError("synthetic d_signal = 1 supports only two classes");
  }
  if (!(spurious_strength >= 0.0 && spurious_strength <= 1.0)) {
    throw ConfigError("synthetic spurious_strength must lie in [0, 1]");
  }
  if (!(noise_g0 >= 0.0) || !(noise_g1 >= 0.0) || !std::isfinite(noise_g0) ||
      !std::isfinite(noise_g1)) {
    throw ConfigError("synthetic group noise must be finite and non-negative");
  }
  if (!std::isfinite(class_separation)) throw ConfigError("class_separation must be finite");
  if (m < 2 * static_cast<std::size_t>(num_classes)) {
    throw DataError("synthetic m = " + std::to_string(m) + " is below 2N = " +
                    std::to_string(2 * num_classes));
  }
}

namespace {

// Unit direction for class y in the signal subspace.
std::vector<double> class_direction(int y, int num_classes, std::size_t d_signal) {
  std::vector<double> mu(d_signal, 0.0);
  if (d_signal >= static_cast<std::size_t>(num_classes)) {
    mu[static_cast<std::size_t>(y)] = 1.0;
  } else if (d_signal == 1) {
    mu[0] = y == 0 ? 1.0 : -1.0;
  } else {
    const double angle = 2.0 * M_PI * y / num_classes;
    mu[0] = std::cos(angle);
    mu[1] = std::sin(angle);
  }
  return mu;
}

}  // namespace

Dataset generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution group_dist(0.5);
  std::uniform_int_distribution<int> class_dist(0, spec.num_classes - 1);
  std::bernoulli_distribution shortcut_dist(spec.spurious_strength);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::vector<double>> directions;
  for (int y = 0; y < spec.num_classes; ++y)
    directions.push_back(class_direction(y, spec.num_classes, spec.d_signal));

  Dataset data;
  data.num_classes = spec.num_classes;
  data.features = Matrix(spec.m, spec.dim());
  data.targets.resize(spec.m);
  data.sensitive.resize(spec.m);
  for (std::size_t i = 0; i < spec.m; ++i) {
    const int a = group_dist(rng) ? 1 : 0;
    const int y = class_dist(rng);
    const double noise = a == 0 ? spec.noise_g0 : spec.noise_g1;
    auto row = data.features.row(i);
    const auto& mu = directions[static_cast<std::size_t>(y)];
    for (std::size_t k = 0; k < spec.d_signal; ++k)
      row[k] = spec.class_separation * mu[k] + noise * normal(rng);
    if (spec.d_spurious > 0) {
      // Drawn for both groups so group 1 consumes the same random stream.
      const bool shortcut = shortcut_dist(rng) && a == 0;
      const std::size_t code = static_cast<std::size_t>(y) % spec.d_spurious;
      for (std::size_t k = 0; k < spec.d_spurious; ++k) {
        const double n = normal(rng);
        row[spec.d_signal + k] = shortcut ? (k == code ? spec.class_separation : 0.0) : noise * n;
      }
    }
    data.targets[i] = y;
    data.sensitive[i] = a;
  }
  return data;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, std::size_t column) {
  field = trim(field);
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column + 1) +
                         ": cannot parse '" + std::string(field) + "'",
                     line);
  }
  return value;
}

}  // namespace

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  data.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  for (std::size_t k = 0; k < data.dim(); ++k) out << 'f' << k << ',';
  out << "target,sensitive\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.features.row(i)) out << format_double(v) << ',';
    out << data.targets[i] << ',' << data.sensitive[i] << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

Dataset load_csv(const std::filesystem::path& path, std::optional<int> num_classes,
                 Warnings* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("line 1: missing header", 1);

  const auto header = split_fields(trim(line));
  if (header.size() < 3 || trim(header[header.size() - 2]) != "target" ||
      trim(header.back()) != "sensitive") {
    throw SchemaError("line 1: header must be f0,...,f{d-1},target,sensitive", 1);
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t k = 0; k < d; ++k) {
    if (trim(header[k]) != "f" + std::to_string(k)) {
      throw SchemaError("line 1: expected column 'f" + std::to_string(k) + "', found '" +
                            std::string(trim(header[k])) + "'",
                        1);
    }
  }

  std::vector<double> values;
  Dataset data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split_fields(view);
    if (fields.size() != d + 2) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(d + 2) + " columns, found " +
                            std::to_string(fields.size()),
                        line_no);
    }
    for (std::size_t k = 0; k < d; ++k) {
      const double v = parse_number<double>(fields[k], line_no, k);
      if (!std::isfinite(v)) {
        throw ParseError("line " + std::to_string(line_no) + ": non-finite feature", line_no);
      }
      values.push_back(v);
    }
    const int target = parse_number<int>(fields[d], line_no, d);
    const int sensitive = parse_number<int>(fields[d + 1], line_no, d + 1);
    if (target < 0 || (num_classes && target >= *num_classes)) {
      throw SchemaError("line " + std::to_string(line_no) + ": target " +
                            std::to_string(target) + " out of range",
                        line_no);
    }
    if (sensitive != 0 && sensitive != 1) {
      throw SchemaError("line " + std::to_string(line_no) + ": sensitive value " +
                            std::to_string(sensitive) + " is not 0 or 1",
                        line_no);
    }
    data.targets.push_back(target);
    data.sensitive.push_back(sensitive);
  }
  if (data.targets.empty()) throw DataError(path.string() + ": no data rows");

  data.features = Matrix(data.targets.size(), d, std::move(values));
  const int max_target = *std::max_element(data.targets.begin(), data.targets.end());
  data.num_classes = num_classes.value_or(std::max(2, max_target + 1));
  data.validate();
  if (!data.has_both_groups() && warnings != nullptr) {
    warnings->push_back(path.string() + ": only one sensitive group present");
  }
  return data;
}

// ---------------------------------------------------------------------------
// Split and augmentation

void SplitFractions::validate() const {
  for (double f : {train, val, test}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("split fractions must lie in [0, 1]");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
}

namespace {

// Cumulative rounding keeps each part within 1 of its exact share.
void assign_cell(const std::vector<std::size_t>& cell, const SplitFractions& f,
                 std::vector<std::size_t>& train, std::vector<std::size_t>& val,
                 std::vector<std::size_t>& test) {
  const double c = static_cast<double>(cell.size());
  const auto n_train = std::min(cell.size(), static_cast<std::size_t>(std::llround(f.train * c)));
  const auto n_train_val = std::clamp(static_cast<std::size_t>(std::llround((f.train + f.val) * c)),
                                      n_train, cell.size());
  for (std::size_t i = 0; i < cell.size(); ++i) {
    if (i < n_train) {
      train.push_back(cell[i]);
    } else if (i < n_train_val) {
      val.push_back(cell[i]);
    } else {
      test.push_back(cell[i]);
    }
  }
}

}  // namespace

SplitResult split(const Dataset& data, const SplitFractions& fractions, std::uint64_t seed,
                  bool stratify, Warnings* warnings) {
  fractions.validate();
  data.validate();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train, val, test;

  if (!stratify) {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::shuffle(all.begin(), all.end(), rng);
    assign_cell(all, fractions, train, val, test);
  } else {
    const auto classes = static_cast<std::size_t>(data.num_classes);
    std::vector<std::vector<std::size_t>> cells(classes * 2);
    for (std::size_t i = 0; i < data.size(); ++i)
      cells[static_cast<std::size_t>(data.targets[i]) * 2 +
            static_cast<std::size_t>(data.sensitive[i])]
          .push_back(i);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      auto& cell = cells[c];
      if (cell.empty()) continue;
      std::shuffle(cell.begin(), cell.end(), rng);
      if (cell.size() < 3) {
        if (warnings != nullptr) {
          warnings->push_back("split: cell (target=" + std::to_string(c / 2) + ", sensitive=" +
                              std::to_string(c % 2) + ") has " + std::to_string(cell.size()) +
                              " samples; assigned to train");
        }
        train.insert(train.end(), cell.begin(), cell.end());
        continue;
      }
      assign_cell(cell, fractions, train, val, test);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(val), data.subset(test)};
}

Dataset augment_jitter(const Dataset& data, double sigma, std::size_t copies, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("jitter sigma must be >= 0");
  data.validate();
  Dataset out;
  out.num_classes = data.num_classes;
  const std::size_t m = data.size();
  const std::size_t d = data.dim();
  std::vector<double> values(data.features.data().begin(), data.features.data().end());
  values.reserve(m * d * (copies + 1));
  out.targets = data.targets;
  out.sensitive = data.sensitive;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t c = 0; c < copies; ++c) {
    for (std::size_t i = 0; i < m; ++i) {
      for (double v : data.features.row(i)) values.push_back(v + sigma * normal(rng));
      out.targets.push_back(data.targets[i]);
      out.sensitive.push_back(data.sensitive[i]);
    }
  }
  out.features = Matrix(m * (copies + 1), d, std::move(values));
  return out;
}

}  // namespace fairexit

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

#include "fairexit/metrics.hpp"

#include <cmath>
#include <sstream>

#include "fairexit/errors.hpp"
#include "fairexit/format.hpp"

namespace fairexit {

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

void check_inputs(std::span<const int> predictions, std::span<const int> labels,
                  std::span<const int> sensitive, int num_classes) {
  if (num_classes < 2) throw DataError("metrics: num_classes must be >= 2");
  if (predictions.empty()) throw DataError("metrics: no samples");
  if (predictions.size() != sensitive.size() ||
      (!labels.empty() && predictions.size() != labels.size())) {
    throw DataError("metrics: predictions, labels and sensitive differ in length");
  }
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] < 0 || predictions[i] >= num_classes ||
        (!labels.empty() && (labels[i] < 0 || labels[i] >= num_classes))) {
      throw DataError("metrics: class index out of range at sample " + std::to_string(i));
    }
    if (sensitive[i] != 0 && sensitive[i] != 1) {
      throw DataError("metrics: sensitive value at sample " + std::to_string(i) + " is not 0/1");
    }
  }
}

double aggregate(double sum, std::size_t count, ClassAggregation aggregation) {
  return aggregation == ClassAggregation::kSum ? sum : sum / static_cast<double>(count);
}

GroupScore combine(std::optional<double> g0, std::optional<double> g1) {
  GroupScore s{g0, g1, std::nullopt, std::nullopt};
  if (g0 && g1) {
    s.avg = (*g0 + *g1) / 2.0;
    s.diff = std::abs(*g0 - *g1);
  }
  return s;
}

}  // namespace

GroupRates::GroupRates(int num_classes)
    : num_classes_(num_classes), cells_(static_cast<std::size_t>(num_classes)) {}

const ConfusionCell& GroupRates::cell(int cls, int group) const {
  return cells_.at(static_cast<std::size_t>(cls)).at(static_cast<std::size_t>(group));
}

ConfusionCell& GroupRates::cell(int cls, int group) {
  return cells_.at(static_cast<std::size_t>(cls)).at(static_cast<std::size_t>(group));
}

std::optional<double> GroupRates::tpr(int cls, int group) const {
  const auto& c = cell(cls, group);
  return ratio(c.tp, c.positives());
}

std::optional<double> GroupRates::fpr(int cls, int group) const {
  const auto& c = cell(cls, group);
  return ratio(c.fp, c.negatives());
}

std::optional<double> GroupRates::tnr(int cls, int group) const {
  const auto& c = cell(cls, group);
  return ratio(c.tn, c.negatives());
}

GroupRates& GroupRates::merge(const GroupRates& other) {
  if (other.num_classes_ != num_classes_) throw DimensionError("merge: class count differs");
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (std::size_t g = 0; g < 2; ++g) {
      cells_[c][g].tp += other.cells_[c][g].tp;
      cells_[c][g].fp += other.cells_[c][g].fp;
      cells_[c][g].tn += other.cells_[c][g].tn;
      cells_[c][g].fn += other.cells_[c][g].fn;
    }
  }
  group_size_[0] += other.group_size_[0];
  group_size_[1] += other.group_size_[1];
  return *this;
}

GroupRates group_rates(std::span<const int> predictions, std::span<const int> labels,
                       std::span<const int> sensitive, int num_classes) {
  if (labels.size() != predictions.size()) throw DataError("metrics: label count mismatch");
  check_inputs(predictions, labels, sensitive, num_classes);
  GroupRates rates(num_classes);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int g = sensitive[i];
    ++rates.group_size(g);
    for (int c = 0; c < num_classes; ++c) {
      auto& cell = rates.cell(c, g);
      const bool predicted = predictions[i] == c;
      const bool actual = labels[i] == c;
      if (predicted && actual) {
        ++cell.tp;
      } else if (predicted) {
        ++cell.fp;
      } else if (actual) {
        ++cell.fn;
      } else {
        ++cell.tn;
      }
    }
  }
  return rates;
}

FairnessGaps fairness_metrics(const GroupRates& rates, ClassAggregation aggregation) {
  FairnessGaps gaps;
  double tpr_sum = 0.0, tnr_sum = 0.0, odds_sum = 0.0;
  for (int c = 0; c < rates.num_classes(); ++c) {
    const auto tpr0 = rates.tpr(c, 0), tpr1 = rates.tpr(c, 1);
    const auto fpr0 = rates.fpr(c, 0), fpr1 = rates.fpr(c, 1);
    const auto tnr0 = rates.tnr(c, 0), tnr1 = rates.tnr(c, 1);
    if (!(tpr0 && tpr1 && fpr0 && fpr1 && tnr0 && tnr1)) {
      ++gaps.skipped_classes;
      continue;
    }
    ClassGap gap{c, std::abs(*tpr0 - *tpr1), std::abs(*fpr0 - *fpr1), std::abs(*tnr0 - *tnr1)};
    tpr_sum += gap.tpr;
    tnr_sum += gap.tnr;
    odds_sum += gap.tpr + gap.fpr;
    gaps.per_class.push_back(gap);
  }
  if (gaps.per_class.empty()) {
    throw MetricUndefinedError("fairness metrics undefined: every class lacks support in a group");
  }
  const std::size_t used = gaps.per_class.size();
  gaps.eopp1 = aggregate(tpr_sum, used, aggregation);
  gaps.eopp0 = aggregate(tnr_sum, used, aggregation);
  gaps.eodd = aggregate(odds_sum, used, aggregation);
  return gaps;
}

double dp_gap(std::span<const int> predictions, std::span<const int> sensitive, int num_classes,
              ClassAggregation aggregation) {
  check_inputs(predictions, {}, sensitive, num_classes);
  std::vector<std::array<std::int64_t, 2>> counts(static_cast<std::size_t>(num_classes), {0, 0});
  std::int64_t sizes[2] = {0, 0};
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    ++counts[static_cast<std::size_t>(predictions[i])][static_cast<std::size_t>(sensitive[i])];
    ++sizes[sensitive[i]];
  }
  if (sizes[0] == 0 || sizes[1] == 0) {
    throw MetricUndefinedError("demographic parity gap undefined: single sensitive group");
  }
  double sum = 0.0;
  for (const auto& c : counts) {
    sum += std::abs(static_cast<double>(c[0]) / static_cast<double>(sizes[0]) -
                    static_cast<double>(c[1]) / static_cast<double>(sizes[1]));
  }
  return aggregate(sum, counts.size(), aggregation);
}

PrfReport prf_report(std::span<const int> predictions, std::span<const int> labels,
                     std::span<const int> sensitive, int num_classes) {
  const GroupRates rates = group_rates(predictions, labels, sensitive, num_classes);
  std::optional<double> precision[2], recall[2], f1[2], accuracy[2];
  for (int g = 0; g < 2; ++g) {
    double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
    std::size_t p_n = 0, r_n = 0, f_n = 0;
    std::int64_t correct = 0;
    for (int c = 0; c < num_classes; ++c) {
      const auto& cell = rates.cell(c, g);
      correct += cell.tp;
      const auto p = ratio(cell.tp, cell.tp + cell.fp);
      const auto r = ratio(cell.tp, cell.positives());
      if (p) {
        p_sum += *p;
        ++p_n;
      }
      if (r) {
        r_sum += *r;
        ++r_n;
      }
      if (p && r) {
        f_sum += (*p + *r) > 0.0 ? 2.0 * *p * *r / (*p + *r) : 0.0;
        ++f_n;
      }
    }
    if (p_n > 0) precision[g] = p_sum / static_cast<double>(p_n);
    if (r_n > 0) recall[g] = r_sum / static_cast<double>(r_n);
    if (f_n > 0) f1[g] = f_sum / static_cast<double>(f_n);
    accuracy[g] = ratio(correct, rates.group_size(g));
  }
  PrfReport report;
  report.precision = combine(precision[0], precision[1]);
  report.recall = combine(recall[0], recall[1]);
  report.f1 = combine(f1[0], f1[1]);
  report.accuracy = combine(accuracy[0], accuracy[1]);
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) correct += predictions[i] == labels[i];
  report.overall_accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());
  return report;
}

FairnessReport evaluate(std::span<const int> predictions, std::span<const int> labels,
                        std::span<const int> sensitive, int num_classes,
                        ClassAggregation aggregation) {
  FairnessReport report;
  report.prf = prf_report(predictions, labels, sensitive, num_classes);
  const GroupRates rates = group_rates(predictions, labels, sensitive, num_classes);
  try {
    const FairnessGaps gaps = fairness_metrics(rates, aggregation);
    report.eopp0 = gaps.eopp0;
    report.eopp1 = gaps.eopp1;
    report.eodd = gaps.eodd;
    report.skipped_classes = gaps.skipped_classes;
    report.per_class = gaps.per_class;
  } catch (const MetricUndefinedError&) {
    report.skipped_classes = static_cast<std::size_t>(num_classes);
  }
  try {
    report.dp_gap = dp_gap(predictions, sensitive, num_classes, aggregation);
  } catch (const MetricUndefinedError&) {
  }
  return report;
}

nlohmann::ordered_json to_json(const FairnessReport& report) {
  auto value = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    if (v) return *v;
    return nullptr;
  };
  nlohmann::ordered_json j;
  j["eopp0"] = value(report.eopp0);
  j["eopp1"] = value(report.eopp1);
  j["eodd"] = value(report.eodd);
  j["dp_gap"] = value(report.dp_gap);
  const std::pair<const char*, const GroupScore*> scores[] = {
      {"precision", &report.prf.precision},
      {"recall", &report.prf.recall},
      {"f1", &report.prf.f1},
      {"accuracy", &report.prf.accuracy},
  };
  for (const auto& [name, score] : scores) {
    const std::string n(name);
    j[n + "_g0"] = value(score->g0);
    j[n + "_g1"] = value(score->g1);
    j[n + "_avg"] = value(score->avg);
    j[n + "_diff"] = value(score->diff);
  }
  j["accuracy_overall"] = report.prf.overall_accuracy;
  j["skipped_classes"] = report.skipped_classes;
  return j;
}

std::string to_text(const FairnessReport& report) {
  std::ostringstream out;
  const nlohmann::ordered_json j = to_json(report);
  for (const auto& [key, v] : j.items()) {
    out << key << '=';
    if (v.is_null()) {
      out << "nan";
    } else if (v.is_number_float()) {
      out << format_double(v.get<double>());
    } else {
      out << v.dump();
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace fairexit

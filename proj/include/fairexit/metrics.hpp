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

#ifndef FAIREXIT_METRICS_HPP_
#define FAIREXIT_METRICS_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace fairexit {

// One-vs-rest confusion counts of a single class within a single group.
struct ConfusionCell {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t positives() const { return tp + fn; }
  std::int64_t negatives() const { return fp + tn; }
  friend bool operator==(const ConfusionCell&, const ConfusionCell&) = default;
};

// Per (class, group) confusion counts. Rates whose denominator is zero are
// reported as std::nullopt rather than 0.
class GroupRates {
 public:
  explicit GroupRates(int num_classes = 2);

  int num_classes() const { return num_classes_; }
  const ConfusionCell& cell(int cls, int group) const;
  ConfusionCell& cell(int cls, int group);
  std::int64_t group_size(int group) const { return group_size_[group]; }
  std::int64_t& group_size(int group) { return group_size_[group]; }

  std::optional<double> tpr(int cls, int group) const;
  std::optional<double> fpr(int cls, int group) const;
  std::optional<double> tnr(int cls, int group) const;

  // Adds the counts of another shard over the same classes.
  GroupRates& merge(const GroupRates& other);

 private:
  int num_classes_;
  std::vector<std::array<ConfusionCell, 2>> cells_;
  std::array<std::int64_t, 2> group_size_{0, 0};
};

// Throws DataError when m == 0, lengths differ, or a label is out of range.
GroupRates group_rates(std::span<const int> predictions, std::span<const int> labels,
                       std::span<const int> sensitive, int num_classes);

enum class ClassAggregation { kMean, kSum };

struct ClassGap {
  int cls = 0;
  double tpr = 0.0;  // |TPR_0 - TPR_1|
  double fpr = 0.0;
  double tnr = 0.0;
};

struct FairnessGaps {
  double eopp0 = 0.0;  // aggregated TNR gap
  double eopp1 = 0.0;  // aggregated TPR gap
  double eodd = 0.0;   // aggregated (TPR gap + FPR gap)
  std::size_t skipped_classes = 0;
  std::vector<ClassGap> per_class;  // only the classes that were used
};

// A class is skipped when any of its TPR/FPR/TNR is undefined in either
// group. Throws MetricUndefinedError if every class is skipped.
FairnessGaps fairness_metrics(const GroupRates& rates,
                              ClassAggregation aggregation = ClassAggregation::kMean);

// Mean over classes c of |P(pred = c | a = 0) - P(pred = c | a = 1)|.
// Throws MetricUndefinedError when only one group is present.
double dp_gap(std::span<const int> predictions, std::span<const int> sensitive, int num_classes,
              ClassAggregation aggregation = ClassAggregation::kMean);

// A score for each group plus their mean ("avg") and absolute difference
// ("diff"). Anything depending on an undefined group score is undefined.
struct GroupScore {
  std::optional<double> g0;
  std::optional<double> g1;
  std::optional<double> avg;
  std::optional<double> diff;
};

struct PrfReport {
  GroupScore precision;  // macro over classes with predictions in the group
  GroupScore recall;     // macro over classes with support in the group
  GroupScore f1;         // macro over classes where both are defined
  GroupScore accuracy;
  double overall_accuracy = 0.0;
};

PrfReport prf_report(std::span<const int> predictions, std::span<const int> labels,
                     std::span<const int> sensitive, int num_classes);

struct FairnessReport {
  std::optional<double> eopp0;
  std::optional<double> eopp1;
  std::optional<double> eodd;
  std::optional<double> dp_gap;
  std::size_t skipped_classes = 0;
  std::vector<ClassGap> per_class;
  PrfReport prf;
};

// All metrics at once. Undefined aggregates become std::nullopt.
FairnessReport evaluate(std::span<const int> predictions, std::span<const int> labels,
                        std::span<const int> sensitive, int num_classes,
                        ClassAggregation aggregation = ClassAggregation::kMean);

// Flat JSON object: eopp0, eopp1, eodd, dp_gap,
// {precision,recall,f1,accuracy}_{g0,g1,avg,diff}, accuracy_overall,
// skipped_classes. Undefined values are null.
nlohmann::ordered_json to_json(const FairnessReport& report);
// One "key=value" line per JSON key, same order; undefined values print "nan".
std::string to_text(const FairnessReport& report);

}  // namespace fairexit

#endif  // FAIREXIT_METRICS_HPP_

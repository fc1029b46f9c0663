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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "fairexit/dataset.hpp"
#include "fairexit/errors.hpp"

using namespace fairexit;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fairexit_dataset_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

template <typename E>
std::size_t line_of(const fs::path& p) {
  try {
    load_csv(p);
  } catch (const E& e) {
    return e.line();
  }
  ADD_FAILURE() << "expected an exception from " << p;
  return 0;
}

}  // namespace

TEST(Synthetic, DeterministicPerSeed) {
  SynthSpec s;
  s.m = 200;
  s.seed = 4;
  const Dataset a = generate_synthetic(s);
  EXPECT_EQ(a, generate_synthetic(s));
  s.seed = 5;
  EXPECT_NE(a, generate_synthetic(s));
  EXPECT_EQ(a.size(), 200u);
  EXPECT_EQ(a.dim(), 8u);
  EXPECT_NO_THROW(a.validate());
}

TEST(Synthetic, RejectsTooFewSamplesAndBadFields) {
  SynthSpec s;
  s.m = 5;
  EXPECT_THROW(generate_synthetic(s), DataError);
  s.m = 6;
  EXPECT_NO_THROW(generate_synthetic(s));
  s.spurious_strength = 1.5;
  EXPECT_THROW(generate_synthetic(s), ConfigError);
  s.spurious_strength = 0.5;
  s.noise_g1 = -1.0;
  EXPECT_THROW(generate_synthetic(s), ConfigError);
}

TEST(Synthetic, FullShortcutIsExactForGroupZero) {
  SynthSpec s;
  s.m = 500;
  s.spurious_strength = 1.0;
  s.seed = 9;
  const Dataset d = generate_synthetic(s);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.sensitive[i] != 0) continue;
    const auto row = d.features.row(i);
    for (std::size_t j = 0; j < s.d_spurious; ++j) {
      const double expected =
          static_cast<std::size_t>(d.targets[i]) % s.d_spurious == j ? s.class_separation : 0.0;
      EXPECT_EQ(row[s.d_signal + j], expected) << "row " << i;
    }
  }
}

TEST(Synthetic, GroupsAndClassesAreBalanced) {
  SynthSpec s;
  s.m = 10000;
  s.seed = 1;
  const Dataset d = generate_synthetic(s);
  std::size_t g1 = 0;
  std::vector<std::size_t> per_class(3, 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    g1 += d.sensitive[i];
    ++per_class[static_cast<std::size_t>(d.targets[i])];
  }
  const double m = 10000.0;
  EXPECT_LE(std::fabs(g1 - m / 2), 5 * std::sqrt(m * 0.25));
  const double p = 1.0 / 3.0;
  for (std::size_t c : per_class) EXPECT_LE(std::fabs(c - m * p), 5 * std::sqrt(m * p * (1 - p)));
}

TEST(Synthetic, GroupsExchangeableWithoutShortcutAndEqualNoise) {
  SynthSpec s;
  s.m = 10000;
  s.spurious_strength = 0.0;
  s.noise_g0 = s.noise_g1 = 1.0;
  s.seed = 2;
  const Dataset d = generate_synthetic(s);
  const std::size_t dim = d.dim();
  std::vector<double> mean[2] = {std::vector<double>(dim), std::vector<double>(dim)};
  std::vector<double> sq[2] = {std::vector<double>(dim), std::vector<double>(dim)};
  double count[2] = {0, 0};
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto g = static_cast<std::size_t>(d.sensitive[i]);
    count[g] += 1;
    for (std::size_t j = 0; j < dim; ++j) {
      mean[g][j] += d.features(i, j);
      sq[g][j] += d.features(i, j) * d.features(i, j);
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    double var = 0;
    for (int g = 0; g < 2; ++g) {
      mean[g][j] /= count[g];
      sq[g][j] = sq[g][j] / count[g] - mean[g][j] * mean[g][j];
      var = std::max(var, sq[g][j]);
    }
    const double se = std::sqrt(var / count[0] + var / count[1]);
    EXPECT_LE(std::fabs(mean[0][j] - mean[1][j]), 5 * se) << "feature " << j;
    EXPECT_NEAR(sq[0][j], sq[1][j], 0.15 * var) << "feature " << j;
  }
}

TEST(Csv, RoundTripIsBitIdentical) {
  SynthSpec s;
  s.m = 150;
  s.seed = 7;
  const Dataset d = generate_synthetic(s);
  const fs::path p = temp_file("roundtrip.csv");
  save_csv(d, p);
  const Dataset back = load_csv(p, d.num_classes);
  EXPECT_EQ(back, d);
  const fs::path p2 = temp_file("roundtrip2.csv");
  save_csv(back, p2);
  std::ifstream a(p), b(p2);
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
}

TEST(Csv, NumClassesDefaultsToMaxTargetPlusOne) {
  const fs::path p = temp_file("classes.csv");
  write_text(p, "f0,target,sensitive\n0.5,0,0\n1.5,4,1\n");
  EXPECT_EQ(load_csv(p).num_classes, 5);
  EXPECT_EQ(load_csv(p, 7).num_classes, 7);
}

TEST(Csv, SchemaAndParseErrorsCarryLineNumbers) {
  const fs::path bad_sensitive = temp_file("bad_sensitive.csv");
  write_text(bad_sensitive, "f0,f1,target,sensitive\n0,1,0,0\n0,1,1,2\n");
  EXPECT_EQ(line_of<SchemaError>(bad_sensitive), 3u);

  const fs::path malformed = temp_file("malformed.csv");
  write_text(malformed, "f0,f1,target,sensitive\n0,1,0,0\n1,1,1,1\n0,abc,1,0\n");
  EXPECT_EQ(line_of<ParseError>(malformed), 4u);

  const fs::path short_row = temp_file("short_row.csv");
  write_text(short_row, "f0,f1,target,sensitive\n0,1,0\n");
  EXPECT_EQ(line_of<SchemaError>(short_row), 2u);

  const fs::path header = temp_file("header.csv");
  write_text(header, "x0,f1,target,sensitive\n0,1,0,0\n");
  EXPECT_EQ(line_of<SchemaError>(header), 1u);

  const fs::path empty = temp_file("empty.csv");
  write_text(empty, "f0,target,sensitive\n");
  EXPECT_THROW(load_csv(empty), DataError);
  EXPECT_THROW(load_csv(temp_file("does_not_exist.csv")), DataError);
}

TEST(Csv, SingleGroupLoadsWithWarning) {
  const fs::path p = temp_file("single_group.csv");
  write_text(p, "f0,target,sensitive\n0.1,0,1\n0.2,1,1\n");
  Warnings w;
  const Dataset d = load_csv(p, std::nullopt, &w);
  EXPECT_EQ(d.size(), 2u);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("one sensitive group"), std::string::npos);
}

TEST(Split, IsASeededPartition) {
  SynthSpec s;
  s.m = 1000;
  s.seed = 3;
  const Dataset d = generate_synthetic(s);
  for (bool stratify : {false, true}) {
    const SplitResult r = split(d, SplitFractions{}, 17, stratify);
    EXPECT_EQ(r.train.size() + r.val.size() + r.test.size(), d.size());
    std::multiset<std::vector<double>> seen;
    for (const Dataset* part : {&r.train, &r.val, &r.test})
      for (std::size_t i = 0; i < part->size(); ++i) {
        const auto row = part->features.row(i);
        seen.emplace(row.begin(), row.end());
      }
    std::multiset<std::vector<double>> all;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto row = d.features.row(i);
      all.emplace(row.begin(), row.end());
    }
    EXPECT_EQ(seen, all);
    const SplitResult again = split(d, SplitFractions{}, 17, stratify);
    EXPECT_EQ(again.train, r.train);
    EXPECT_EQ(again.test, r.test);
    EXPECT_NE(split(d, SplitFractions{}, 18, stratify).train, r.train);
  }
}

TEST(Split, AllToTrain) {
  SynthSpec s;
  s.m = 120;
  const Dataset d = generate_synthetic(s);
  const SplitResult r = split(d, SplitFractions{1.0, 0.0, 0.0}, 1, true);
  EXPECT_EQ(r.train, d);
  EXPECT_EQ(r.val.size(), 0u);
  EXPECT_EQ(r.test.size(), 0u);
}

TEST(Split, StratifiedCellsStayProportional) {
  // 100 samples: 2 classes x 2 groups, 25 per cell.
  Dataset d;
  d.features = Matrix(100, 1);
  for (std::size_t i = 0; i < 100; ++i) {
    d.features(i, 0) = static_cast<double>(i);
    d.targets.push_back(static_cast<int>(i % 2));
    d.sensitive.push_back(static_cast<int>((i / 2) % 2));
  }
  const SplitFractions f{0.6, 0.2, 0.2};
  const SplitResult r = split(d, f, 5, true);
  auto cell_count = [](const Dataset& part, int y, int a) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < part.size(); ++i) n += part.targets[i] == y && part.sensitive[i] == a;
    return static_cast<double>(n);
  };
  for (int y = 0; y < 2; ++y)
    for (int a = 0; a < 2; ++a) {
      EXPECT_LE(std::fabs(cell_count(r.train, y, a) - 25 * f.train), 1.0);
      EXPECT_LE(std::fabs(cell_count(r.val, y, a) - 25 * f.val), 1.0);
      EXPECT_LE(std::fabs(cell_count(r.test, y, a) - 25 * f.test), 1.0);
    }
}

TEST(Split, SmallCellsGoToTrainWithWarning) {
  Dataset d;
  d.features = Matrix(12, 1);
  for (std::size_t i = 0; i < 12; ++i) {
    d.features(i, 0) = static_cast<double>(i);
    d.targets.push_back(i < 10 ? 0 : 1);
    d.sensitive.push_back(static_cast<int>(i % 2));
  }
  Warnings w;
  const SplitResult r = split(d, SplitFractions{}, 2, true, &w);
  EXPECT_EQ(w.size(), 2u);
  std::size_t ones = 0;
  for (int t : r.train.targets) ones += t == 1;
  EXPECT_EQ(ones, 2u);
}

TEST(Split, RejectsBadFractions) {
  SynthSpec s;
  s.m = 20;
  const Dataset d = generate_synthetic(s);
  EXPECT_THROW(split(d, SplitFractions{0.5, 0.2, 0.2}, 1, false), ConfigError);
  EXPECT_THROW(split(d, SplitFractions{1.2, -0.1, -0.1}, 1, false), ConfigError);
}

TEST(Augment, ZeroCopiesIsIdentity) {
  SynthSpec s;
  s.m = 50;
  const Dataset d = generate_synthetic(s);
  EXPECT_EQ(augment_jitter(d, 0.3, 0, 1), d);
}

TEST(Augment, ZeroSigmaDuplicates) {
  SynthSpec s;
  s.m = 30;
  const Dataset d = generate_synthetic(s);
  const Dataset a = augment_jitter(d, 0.0, 2, 1);
  ASSERT_EQ(a.size(), 90u);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 30; ++i) {
      EXPECT_EQ(a.targets[c * 30 + i], d.targets[i]);
      EXPECT_EQ(a.sensitive[c * 30 + i], d.sensitive[i]);
      for (std::size_t j = 0; j < d.dim(); ++j) EXPECT_EQ(a.features(c * 30 + i, j), d.features(i, j));
    }
  EXPECT_THROW(augment_jitter(d, -1.0, 1, 1), ConfigError);
}

TEST(Augment, JitterIsCentred) {
  SynthSpec s;
  s.m = 1000;
  const Dataset d = generate_synthetic(s);
  const double sigma = 0.5;
  const std::size_t copies = 3;
  const Dataset a = augment_jitter(d, sigma, copies, 8);
  EXPECT_EQ(a, augment_jitter(d, sigma, copies, 8));
  const std::size_t m = d.size();
  for (std::size_t j = 0; j < d.dim(); ++j) {
    double shift = 0;
    for (std::size_t c = 1; c <= copies; ++c)
      for (std::size_t i = 0; i < m; ++i) shift += a.features(c * m + i, j) - d.features(i, j);
    shift /= static_cast<double>(m * copies);
    EXPECT_LE(std::fabs(shift), 5 * sigma / std::sqrt(static_cast<double>(m * copies)));
  }
}

// Copyright 2026 The ecdgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ecdgraph/metrics.hpp"
#include "ecdgraph/rng.hpp"

namespace ecd {
namespace {

double BruteForceAuc(const std::vector<int>& y, const std::vector<double>& s) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

Metrics FromCounts(int tp, int fp, int fn, int tn) {
  std::vector<int> y, pred;
  std::vector<double> s;
  auto add = [&](int n, int label, int guess) {
    for (int i = 0; i < n; ++i) {
      y.push_back(label);
      pred.push_back(guess);
      s.push_back(guess == 1 ? 0.9 : 0.1);
    }
  };
  add(tp, 1, 1);
  add(fp, 0, 1);
  add(fn, 1, 0);
  add(tn, 0, 0);
  return ComputeMetrics(std::span<const int>(y), std::span<const int>(pred),
                        std::span<const double>(s));
}

TEST(Metrics, ConfusionExample) {
  Metrics m = FromCounts(57, 14, 10, 184);
  EXPECT_NEAR(m.precision, 0.80282, 5e-6);
  EXPECT_NEAR(m.recall, 0.85075, 5e-6);
  EXPECT_NEAR(m.f1, 0.82609, 5e-6);
  EXPECT_NEAR(m.accuracy, 0.90943, 5e-6);
  EXPECT_EQ(m.total(), 265u);
  EXPECT_FALSE(m.precision_undefined || m.recall_undefined || m.f1_undefined);
}

TEST(Metrics, AllCorrect) {
  Metrics m = FromCounts(5, 0, 0, 7);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.auc_roc, 1.0);
}

TEST(Metrics, NoPredictedPositivesIsFlaggedNotNan) {
  Metrics m = FromCounts(0, 0, 4, 6);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_TRUE(m.precision_undefined);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_FALSE(m.recall_undefined);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_TRUE(m.f1_undefined);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.6);
  auto undefined = m.ToJson()["undefined"];
  EXPECT_EQ(undefined.size(), 2u);
}

TEST(Metrics, ThresholdIsInclusive) {
  std::vector<int> y = {1, 0};
  std::vector<double> s = {0.5, 0.4999999};
  Metrics m = ComputeMetrics(std::span<const int>(y), std::span<const double>(s));
  EXPECT_EQ(m.tp, 1u);
  EXPECT_EQ(m.tn, 1u);
}

TEST(Metrics, EmptyOrMismatchedInputIsAnError) {
  std::vector<int> y;
  std::vector<double> s;
  EXPECT_THROW(ComputeMetrics(std::span<const int>(y), std::span<const double>(s)),
               ValidationError);
  y = {1, 0};
  s = {0.3};
  EXPECT_THROW(ComputeMetrics(std::span<const int>(y), std::span<const double>(s)),
               ValidationError);
}

TEST(Auc, PerfectAndReversedAndTied) {
  std::vector<int> y = {0, 0, 1, 1};
  EXPECT_EQ(AucRoc(y, std::vector<double>{0.1, 0.2, 0.8, 0.9}).value, 1.0);
  EXPECT_EQ(AucRoc(y, std::vector<double>{0.9, 0.8, 0.2, 0.1}).value, 0.0);
  EXPECT_EQ(AucRoc(y, std::vector<double>{0.5, 0.5, 0.5, 0.5}).value, 0.5);
  // One positive tied with one negative, above the other.
  EXPECT_EQ(AucRoc(y, std::vector<double>{0.1, 0.7, 0.7, 0.9}).value, 0.875);
}

TEST(Auc, SingleClassIsUndefined) {
  AucResult r = AucRoc(std::vector<int>{1, 1}, std::vector<double>{0.2, 0.3});
  EXPECT_TRUE(r.undefined);
  EXPECT_EQ(r.value, 0.5);
}

TEST(Auc, MatchesBruteForceOnRandomCases) {
  Rng rng(99);
  for (int trial = 0; trial < 220; ++trial) {
    const std::size_t n = trial < 20 ? 20 : 2 + rng.Below(300);
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.Below(2));
      // Coarse scores in some trials so ties are common.
      s[i] = trial % 3 == 0 ? static_cast<double>(rng.Below(5)) / 4.0
                            : rng.Uniform(0.0, 1.0);
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(AucRoc(y, s).value, BruteForceAuc(y, s), 1e-12) << trial;
  }
}

TEST(Auc, InvariantUnderMonotoneTransform) {
  Rng rng(100);
  std::vector<int> y(150);
  std::vector<double> s(150), t(150);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = static_cast<int>(rng.Below(2));
    s[i] = rng.Uniform(-3.0, 3.0);
    t[i] = 1.0 / (1.0 + std::exp(-s[i]));
  }
  EXPECT_DOUBLE_EQ(AucRoc(y, s).value, AucRoc(y, t).value);
}

TEST(InverseFreqWeights, Examples) {
  auto w = InverseFreqWeights(1982, 665);
  EXPECT_NEAR(w[0], 0.66776, 5e-6);
  EXPECT_NEAR(w[1], 1.99023, 5e-6);
  EXPECT_EQ(InverseFreqWeights(50, 50), (std::array<double, 2>{1.0, 1.0}));
  w = InverseFreqWeights(3, 1);
  EXPECT_NEAR(w[0], 4.0 / 6.0, 1e-15);
  EXPECT_EQ(w[1], 2.0);
  EXPECT_THROW(InverseFreqWeights(10, 0), ValidationError);
  EXPECT_THROW(InverseFreqWeights(std::vector<int>{0, 0, 0}), ValidationError);
  w = InverseFreqWeights(std::vector<int>{0, 0, 0, 1});
  EXPECT_EQ(w[1], 2.0);
}

}  // namespace
}  // namespace ecd

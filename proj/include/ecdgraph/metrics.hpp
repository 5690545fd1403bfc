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

#ifndef ECDGRAPH_METRICS_HPP
#define ECDGRAPH_METRICS_HPP

#include <algorithm>
#include <array>
#include <cstddef>
#include <numeric>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "ecdgraph/errors.hpp"

namespace ecd {

/// Binary classification metrics; class 1 is positive. Metrics whose
/// denominator is zero are reported as 0 with the matching flag set.
struct Metrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double auc_roc = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  bool auc_undefined = false;

  std::size_t total() const { return tp + fp + tn + fn; }

  nlohmann::json ToJson() const {
    nlohmann::json j = {{"precision", precision}, {"recall", recall},
                        {"f1", f1},               {"accuracy", accuracy},
                        {"auc_roc", auc_roc},     {"tp", tp},
                        {"fp", fp},               {"tn", tn},
                        {"fn", fn}};
    nlohmann::json undefined = nlohmann::json::array();
    if (precision_undefined) undefined.push_back("precision");
    if (recall_undefined) undefined.push_back("recall");
    if (f1_undefined) undefined.push_back("f1");
    if (auc_undefined) undefined.push_back("auc_roc");
    j["undefined"] = undefined;
    return j;
  }

  bool operator==(const Metrics&) const = default;
};

struct AucResult {
  double value = 0.0;
  bool undefined = false;
};

/// Mann-Whitney statistic: P(score of a random positive > score of a random
/// negative), ties counting one half. Undefined (0.5, flagged) when a class
/// is absent. O(n log n) via average ranks.
inline AucResult AucRoc(std::span<const int> labels,
                        std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw ValidationError("AucRoc: labels and scores differ in length");
  }
  const std::size_t n = labels.size();
  std::size_t pos = 0;
  for (int y : labels) pos += y == 1 ? 1 : 0;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return {0.5, true};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of (1-based, tie-averaged) ranks of the positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return {u / (p * static_cast<double>(neg)), false};
}

/// Confusion counts and derived metrics. `predicted` holds hard class
/// decisions, `scores` the positive-class probabilities used for AUC.
inline Metrics ComputeMetrics(std::span<const int> labels,
                              std::span<const int> predicted,
                              std::span<const double> scores) {
  if (labels.empty()) throw ValidationError("ComputeMetrics: empty input");
  if (labels.size() != predicted.size() || labels.size() != scores.size()) {
    throw ValidationError("ComputeMetrics: input lengths differ");
  }
  Metrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool truth = labels[i] == 1;
    const bool guess = predicted[i] == 1;
    if (truth && guess) ++m.tp;
    else if (!truth && guess) ++m.fp;
    else if (!truth && !guess) ++m.tn;
    else ++m.fn;
  }
  const auto d = [](std::size_t x) { return static_cast<double>(x); };
  if (m.tp + m.fp > 0) m.precision = d(m.tp) / d(m.tp + m.fp);
  else m.precision_undefined = true;
  if (m.tp + m.fn > 0) m.recall = d(m.tp) / d(m.tp + m.fn);
  else m.recall_undefined = true;
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1_undefined = true;
  }
  m.accuracy = d(m.tp + m.tn) / d(m.total());
  const AucResult auc = AucRoc(labels, scores);
  m.auc_roc = auc.value;
  m.auc_undefined = auc.undefined;
  return m;
}

/// Overload for the 0.5 decision threshold on positive-class probabilities.
inline Metrics ComputeMetrics(std::span<const int> labels,
                              std::span<const double> scores,
                              double threshold = 0.5) {
  std::vector<int> predicted(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    predicted[i] = scores[i] >= threshold ? 1 : 0;
  return ComputeMetrics(labels, predicted, scores);
}

/// w_k = N / (2 n_k). Throws ValidationError if a class is absent.
inline std::array<double, 2> InverseFreqWeights(std::size_t negatives,
                                                std::size_t positives) {
  if (negatives == 0 || positives == 0) {
    throw ValidationError("inverse-frequency weights need both classes");
  }
  const double n = static_cast<double>(negatives + positives);
  return {n / (2.0 * static_cast<double>(negatives)),
          n / (2.0 * static_cast<double>(positives))};
}

inline std::array<double, 2> InverseFreqWeights(std::span<const int> labels) {
  std::size_t pos = 0;
  for (int y : labels) pos += y == 1 ? 1 : 0;
  return InverseFreqWeights(labels.size() - pos, pos);
}

}  // namespace ecd

#endif  // ECDGRAPH_METRICS_HPP

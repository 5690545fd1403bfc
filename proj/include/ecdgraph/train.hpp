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

#ifndef ECDGRAPH_TRAIN_HPP
#define ECDGRAPH_TRAIN_HPP

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <string>
#include <vector>

#include "ecdgraph/config.hpp"
#include "ecdgraph/errors.hpp"
#include "ecdgraph/graph_io.hpp"
#include "ecdgraph/metrics.hpp"
#include "ecdgraph/model.hpp"
#include "ecdgraph/optim.hpp"
#include "ecdgraph/rng.hpp"

namespace ecd {

/// Positive-class probabilities for `graphs`, in order, with dropout off.
inline std::vector<double> PredictScores(const ParamSet& params,
                                         const ModelConfig& config,
                                         const std::vector<SentenceGraph>& graphs,
                                         const EmbeddingTable& embeddings,
                                         Index batch_size = 32) {
  std::vector<double> scores;
  scores.reserve(graphs.size());
  Rng unused;
  for (std::size_t start = 0; start < graphs.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(graphs.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<const SentenceGraph*> ptrs;
    for (std::size_t i = start; i < end; ++i) ptrs.push_back(&graphs[i]);
    GraphBatch batch = Batch(ptrs, config.reverse_edges);
    Tape tape(Tape::Mode::kNoGrad);
    ForwardOutput out =
        Forward(tape, config, params, batch, embeddings, false, unused);
    for (Index i = 0; i < out.probabilities.rows(); ++i)
      scores.push_back(out.probabilities.value()(i, 1));
  }
  return scores;
}

/// Deterministic evaluation at threshold 0.5. Throws ValidationError on an
/// empty split.
inline Metrics Evaluate(const ParamSet& params, const ModelConfig& config,
                        const std::vector<SentenceGraph>& graphs,
                        const EmbeddingTable& embeddings,
                        Index batch_size = 32) {
  if (graphs.empty()) throw ValidationError("Evaluate: empty split");
  std::vector<double> scores =
      PredictScores(params, config, graphs, embeddings, batch_size);
  std::vector<int> labels;
  labels.reserve(graphs.size());
  for (const SentenceGraph& g : graphs) labels.push_back(g.label);
  return ComputeMetrics(std::span<const int>(labels),
                        std::span<const double>(scores));
}

/// Resolves the configured class weights against the training labels.
inline std::array<double, 2> ResolveClassWeights(
    const ClassWeightSpec& spec, const std::vector<SentenceGraph>& train) {
  switch (spec.mode) {
    case ClassWeightSpec::Mode::kNone:
      return {1.0, 1.0};
    case ClassWeightSpec::Mode::kFixed:
      return spec.fixed;
    case ClassWeightSpec::Mode::kInverseFrequency: {
      std::vector<int> labels;
      for (const SentenceGraph& g : train) labels.push_back(g.label);
      return InverseFreqWeights(labels);
    }
  }
  return {1.0, 1.0};
}

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  Metrics dev;
  /// Metrics on the split used for model selection (dev unless configured).
  Metrics selection;
  bool improved = false;

  nlohmann::json ToJson() const {
    return {{"epoch", epoch},
            {"train_loss", train_loss},
            {"dev_f1", dev.f1},
            {"dev", dev.ToJson()},
            {"selection_f1", selection.f1},
            {"improved", improved}};
  }
};

struct TrainResult {
  ParamSet params;  // best-epoch parameters
  int best_epoch = 0;
  double best_f1 = 0.0;
  std::array<double, 2> class_weights = {1.0, 1.0};
  std::vector<EpochRecord> history;
  /// Optimizer state after the last step, declaration order.
  std::vector<MomentState> optimizer_state;
  std::int64_t optimizer_step = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch training with early stopping on the selection split's F1.
///
/// Stops after `patience` consecutive epochs without a strict improvement or
/// at `max_epochs`, and returns the parameters of the best epoch. Fully
/// determined by (dataset, config); init, shuffling and dropout each draw
/// from their own stream of the seed.
inline TrainResult Train(const TrainConfig& config, const Dataset& data,
                         const EpochCallback& on_epoch = {}) {
  config.Validate();
  const ModelConfig& mc = config.model;
  const auto& train = data.Split("train");
  const auto& dev = data.Split("dev");
  if (train.empty()) throw ValidationError("Train: empty train split");
  if (dev.empty()) throw ValidationError("Train: empty dev split");
  const auto& selection_split =
      config.select_on == SelectOn::kTest ? data.Split("test") : dev;
  if (selection_split.empty()) {
    throw ValidationError("Train: empty selection split");
  }
  const EmbeddingTable& embeddings = *data.embeddings;

  TrainResult result;
  result.class_weights = ResolveClassWeights(mc.class_weights, train);

  Rng init_rng(config.seed, Rng::kInitStream);
  ParamSet params = ParamSet::Init(mc, init_rng);
  std::vector<Var> manifold_params;
  if (params.centroids.defined()) manifold_params.push_back(params.centroids);
  AmsGrad optimizer(params.Euclidean(), manifold_params, mc.manifold,
                    {config.lr, 0.9, 0.999, 1e-8});

  Rng shuffle_rng(config.seed, Rng::kShuffleStream);
  Rng dropout_rng(config.seed, Rng::kDropoutStream);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  result.params = params.Clone();
  double best = -std::numeric_limits<double>::infinity();
  int since_best = 0;
  std::vector<Var> all = params.All();

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    Shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size), ++batch_index) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<const SentenceGraph*> ptrs;
      for (std::size_t i = start; i < end; ++i) ptrs.push_back(&train[order[i]]);
      GraphBatch batch = Batch(ptrs, mc.reverse_edges);

      Tape tape;
      Var loss = Loss(tape, mc, params, batch, embeddings,
                      result.class_weights, /*train=*/true, dropout_rng);
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite loss at epoch " +
                            std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      }
      tape.Backward(loss);
      try {
        ClipGlobalNorm(all, config.max_grad_norm);
        optimizer.Step();
      } catch (const std::exception& e) {
        throw TrainingError(std::string(e.what()) + " at epoch " +
                            std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      }
      params.ZeroGrad();
      loss_sum += value * static_cast<double>(ptrs.size());
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(train.size());
    record.dev = Evaluate(params, mc, dev, embeddings, config.batch_size);
    record.selection =
        config.select_on == SelectOn::kTest
            ? Evaluate(params, mc, selection_split, embeddings,
                       config.batch_size)
            : record.dev;
    if (record.selection.f1 > best) {
      best = record.selection.f1;
      result.params = params.Clone();
      result.best_epoch = epoch;
      record.improved = true;
      since_best = 0;
    } else {
      ++since_best;
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
    if (since_best >= config.patience) break;
  }
  result.best_f1 = best;
  for (MomentState* s : optimizer.States()) result.optimizer_state.push_back(*s);
  result.optimizer_step = optimizer.step();
  return result;
}

}  // namespace ecd

#endif  // ECDGRAPH_TRAIN_HPP

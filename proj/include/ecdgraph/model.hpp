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

// Relational message-passing classifier over dependency graphs.
//
// Node features are [word vector | POS embedding]. Each layer averages
// W_r h_u over the incoming edges (u -> v, r), adds a per-layer bias and
// applies LeakyReLU. Hyperbolic variants run this in the tangent space at
// the origin: inputs pass through log0 (except on the first layer, whose
// inputs are Euclidean features) and outputs through exp0. A readout pools
// nodes per graph and a linear layer produces two logits.

#ifndef ECDGRAPH_MODEL_HPP
#define ECDGRAPH_MODEL_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ecdgraph/errors.hpp"
#include "ecdgraph/graph_io.hpp"
#include "ecdgraph/manifolds.hpp"
#include "ecdgraph/numerics/tensor.hpp"
#include "ecdgraph/optim.hpp"
#include "ecdgraph/rng.hpp"

namespace ecd {

enum class ReadoutMode { kMeanPool, kCentroid };

inline std::string_view ToString(ReadoutMode m) {
  return m == ReadoutMode::kMeanPool ? "meanpool" : "centroid";
}

inline std::optional<ReadoutMode> ParseReadoutMode(std::string_view s) {
  if (s == "meanpool") return ReadoutMode::kMeanPool;
  if (s == "centroid") return ReadoutMode::kCentroid;
  return std::nullopt;
}

/// How the loss weights its two classes.
struct ClassWeightSpec {
  enum class Mode { kNone, kInverseFrequency, kFixed };
  Mode mode = Mode::kNone;
  std::array<double, 2> fixed = {1.0, 1.0};

  static ClassWeightSpec None() { return {}; }
  static ClassWeightSpec Inverse() { return {Mode::kInverseFrequency, {1, 1}}; }
  static ClassWeightSpec Fixed(double w0, double w1) {
    return {Mode::kFixed, {w0, w1}};
  }
  bool operator==(const ClassWeightSpec&) const = default;
};

struct ModelConfig {
  ManifoldKind manifold = ManifoldKind::kEuclidean;
  int layers = 4;
  Index hidden = 256;
  Index word_dim = 300;
  Index pos_dim = 0;  // 0 disables POS embeddings
  Index num_relations = 45;
  Index num_pos = 18;
  double dropout = 0.0;
  double leaky_slope = 0.5;
  ClassWeightSpec class_weights;
  ReadoutMode readout = ReadoutMode::kMeanPool;
  Index centroids = 30;
  bool reverse_edges = true;

  Index input_dim() const { return word_dim + pos_dim; }
  Index readout_dim() const {
    return readout == ReadoutMode::kMeanPool ? hidden : centroids;
  }

  void Validate() const {
    auto fail = [](const std::string& m) { throw ValidationError(m); };
    if (layers < 1) fail("layers must be >= 1");
    if (hidden <= 0) fail("hidden must be > 0");
    if (word_dim <= 0) fail("word_dim must be > 0");
    if (pos_dim < 0) fail("pos_dim must be >= 0");
    if (num_relations <= 0) fail("num_relations must be > 0");
    if (pos_dim > 0 && num_pos <= 0) fail("num_pos must be > 0 with POS");
    if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
    if (readout == ReadoutMode::kCentroid && centroids <= 0)
      fail("centroids must be > 0");
    if (class_weights.mode == ClassWeightSpec::Mode::kFixed &&
        !(class_weights.fixed[0] > 0.0 && class_weights.fixed[1] > 0.0))
      fail("class weights must be > 0");
  }

  bool operator==(const ModelConfig&) const = default;
};

// ---- parameter accounting -----------------------------------------------------

struct ParamCount {
  std::int64_t pos_embedding = 0;
  std::int64_t first_layer = 0;
  std::int64_t hidden_layers = 0;
  std::int64_t classifier = 0;
  std::int64_t centroids = 0;

  std::int64_t total() const {
    return pos_embedding + first_layer + hidden_layers + classifier +
           centroids;
  }
};

/// Closed-form count. Centroids are counted in stored coordinates
/// (K x (h + 1) on the Lorentz model).
inline ParamCount CountParams(const ModelConfig& c) {
  const std::int64_t r = c.num_relations;
  const std::int64_t h = c.hidden;
  ParamCount p;
  p.pos_embedding = c.pos_dim > 0 ? std::int64_t{c.num_pos} * c.pos_dim : 0;
  p.first_layer = r * c.input_dim() * h + h;
  p.hidden_layers = std::int64_t{c.layers - 1} * (r * h * h + h);
  p.classifier = std::int64_t{c.readout_dim()} * 2 + 2;
  if (c.readout == ReadoutMode::kCentroid) {
    p.centroids =
        std::int64_t{c.centroids} * manifold::AmbientDim(c.manifold, c.hidden);
  }
  return p;
}

// ---- parameters ---------------------------------------------------------------

/// All trainable tensors. Declaration order (used by checkpoints and by the
/// init stream): weights[layer][relation], biases[layer], pos_embedding,
/// classifier_weight, classifier_bias, centroids.
struct ParamSet {
  std::vector<std::vector<Var>> weights;
  std::vector<Var> biases;
  Var pos_embedding;
  Var classifier_weight;
  Var classifier_bias;
  Var centroids;

  static ParamSet Init(const ModelConfig& c, Rng& rng) {
    c.Validate();
    ParamSet p;
    for (int l = 0; l < c.layers; ++l) {
      const Index in = l == 0 ? c.input_dim() : c.hidden;
      std::vector<Var> per_rel;
      per_rel.reserve(static_cast<std::size_t>(c.num_relations));
      for (Index r = 0; r < c.num_relations; ++r) {
        per_rel.emplace_back(XavierUniform(in, c.hidden, rng), true);
      }
      p.weights.push_back(std::move(per_rel));
      p.biases.emplace_back(Matrix::Zero(1, c.hidden), true);
    }
    if (c.pos_dim > 0) {
      p.pos_embedding = Var(XavierUniform(c.num_pos, c.pos_dim, rng), true);
    }
    p.classifier_weight = Var(XavierUniform(c.readout_dim(), 2, rng), true);
    p.classifier_bias = Var(Matrix::Zero(1, 2), true);
    if (c.readout == ReadoutMode::kCentroid) {
      Matrix tangent = XavierUniform(c.centroids, c.hidden, rng);
      Matrix points(c.centroids, manifold::AmbientDim(c.manifold, c.hidden));
      for (Index k = 0; k < c.centroids; ++k) {
        RowVector v = tangent.row(k);
        if (c.manifold == ManifoldKind::kLorentz) {
          RowVector t(c.hidden + 1);
          t << 0.0, v;
          v = t;
        }
        points.row(k) = manifold::Exp0(c.manifold, v);
      }
      p.centroids = Var(std::move(points), true);
    }
    return p;
  }

  /// Every parameter tensor in declaration order.
  std::vector<Var> All() const {
    std::vector<Var> out = Euclidean();
    if (centroids.defined()) out.push_back(centroids);
    return out;
  }

  /// Parameters updated by plain AMSGrad.
  std::vector<Var> Euclidean() const {
    std::vector<Var> out;
    for (const auto& layer : weights) out.insert(out.end(), layer.begin(), layer.end());
    out.insert(out.end(), biases.begin(), biases.end());
    if (pos_embedding.defined()) out.push_back(pos_embedding);
    out.push_back(classifier_weight);
    out.push_back(classifier_bias);
    return out;
  }

  std::int64_t ElementCount() const {
    std::int64_t n = 0;
    for (const Var& v : All()) n += v.size();
    return n;
  }

  ParamSet Clone() const {
    ParamSet p;
    for (const auto& layer : weights) {
      std::vector<Var> copy;
      for (const Var& w : layer) copy.push_back(w.Clone());
      p.weights.push_back(std::move(copy));
    }
    for (const Var& b : biases) p.biases.push_back(b.Clone());
    if (pos_embedding.defined()) p.pos_embedding = pos_embedding.Clone();
    p.classifier_weight = classifier_weight.Clone();
    p.classifier_bias = classifier_bias.Clone();
    if (centroids.defined()) p.centroids = centroids.Clone();
    return p;
  }

  /// Overwrites values with those of `other` (same layout).
  void CopyValuesFrom(const ParamSet& other) {
    auto dst = All();
    auto src = other.All();
    if (dst.size() != src.size()) throw ShapeError("ParamSet layout mismatch");
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i].mutable_value() = src[i].value();
  }

  void ZeroGrad() {
    for (Var& v : All()) v.ZeroGrad();
  }
};

// ---- forward pass -------------------------------------------------------------

/// Edges grouped by relation so each W_r multiplies one gathered block.
struct RelationPlan {
  std::vector<Index> relations;
  std::vector<std::vector<Index>> sources;
  std::vector<Index> targets;  // concatenated in relation-group order
  Index node_count = 0;

  static RelationPlan Build(const GraphBatch& batch, Index num_relations) {
    RelationPlan plan;
    plan.node_count = batch.node_count();
    std::map<Index, std::pair<std::vector<Index>, std::vector<Index>>> groups;
    for (const Edge& e : batch.edges) {
      if (e.rel < 0 || e.rel >= num_relations) {
        throw ValidationError("relation id " + std::to_string(e.rel) +
                              " out of range [0, " +
                              std::to_string(num_relations) + ")");
      }
      groups[e.rel].first.push_back(e.src);
      groups[e.rel].second.push_back(e.dst);
    }
    for (auto& [rel, group] : groups) {
      plan.relations.push_back(rel);
      plan.sources.push_back(std::move(group.first));
      plan.targets.insert(plan.targets.end(), group.second.begin(),
                          group.second.end());
    }
    return plan;
  }
};

/// Rows are [word vector | POS embedding] per node.
inline Var AssembleFeatures(Tape& tape, const GraphBatch& batch,
                            const EmbeddingTable& embeddings,
                            const ParamSet& params, const ModelConfig& c) {
  if (embeddings.dim() != c.word_dim) {
    throw ValidationError("embedding dim " + std::to_string(embeddings.dim()) +
                          " does not match word_dim " +
                          std::to_string(c.word_dim));
  }
  const Index n = batch.node_count();
  Matrix words(n, c.word_dim);
  for (Index v = 0; v < n; ++v) {
    auto row = embeddings.Row(batch.node_token_ids[static_cast<std::size_t>(v)]);
    for (Index j = 0; j < c.word_dim; ++j)
      words(v, j) = static_cast<double>(row[static_cast<std::size_t>(j)]);
  }
  Var word_block = tape.Constant(std::move(words));
  if (c.pos_dim == 0) return word_block;
  for (Index id : batch.node_pos_ids) {
    if (id < 0 || id >= c.num_pos) {
      throw ValidationError("POS id " + std::to_string(id) +
                            " out of range [0, " + std::to_string(c.num_pos) +
                            ")");
    }
  }
  Var pos_block = tape.GatherRows(params.pos_embedding, batch.node_pos_ids);
  return tape.ConcatCols(word_block, pos_block);
}

struct LayerParams {
  std::span<const Var> weights;  // one per relation
  const Var& bias;
};

/// One relational layer. `h` holds Euclidean features (first layer or
/// Euclidean model) or manifold points (later hyperbolic layers).
inline Var LayerForward(Tape& tape, ManifoldKind kind, const Var& h,
                        const RelationPlan& plan, LayerParams layer,
                        bool is_first, double slope, double dropout,
                        bool train, Rng& rng) {
  Var x = is_first ? h : manifold::Log0Rows(tape, kind, h);
  const Index width = layer.bias.cols();
  if (!layer.weights.empty() && x.cols() != layer.weights[0].rows()) {
    throw ShapeError("LayerForward: input width " + std::to_string(x.cols()) +
                     " does not match weight rows " +
                     std::to_string(layer.weights[0].rows()));
  }
  Var messages;
  if (plan.relations.empty()) {
    messages = tape.Constant(Matrix::Zero(plan.node_count, width));
  } else {
    std::vector<Var> parts;
    parts.reserve(plan.relations.size());
    for (std::size_t g = 0; g < plan.relations.size(); ++g) {
      const Var& w = layer.weights[static_cast<std::size_t>(plan.relations[g])];
      parts.push_back(tape.MatMul(tape.GatherRows(x, plan.sources[g]), w));
    }
    messages = tape.ScatterMean(tape.ConcatRows(parts), plan.targets,
                                plan.node_count);
  }
  Var act = tape.LeakyRelu(tape.AddRow(messages, layer.bias), slope);
  act = tape.Dropout(act, dropout, train, rng);
  return manifold::Exp0Rows(tape, kind, act);
}

/// Per-graph representation: tangent mean of node embeddings (meanpool) or
/// mean distance to each centroid (centroid).
inline Var Readout(Tape& tape, ManifoldKind kind, const Var& h,
                   const GraphBatch& batch, ReadoutMode mode,
                   const Var& centroids) {
  switch (mode) {
    case ReadoutMode::kMeanPool:
      return tape.ScatterMean(manifold::Log0Rows(tape, kind, h),
                              batch.graph_of_node, batch.graph_count);
    case ReadoutMode::kCentroid:
      if (!centroids.defined()) {
        throw ValidationError("centroid readout without centroids");
      }
      return tape.ScatterMean(
          manifold::PairwiseDistances(tape, kind, h, centroids),
          batch.graph_of_node, batch.graph_count);
  }
  throw ValidationError("unknown readout mode");
}

struct Logits {
  Var logits;
  Var probabilities;  // column 1 is p(claim)
};

inline Logits Classify(Tape& tape, const Var& repr, const Var& weight,
                       const Var& bias) {
  if (repr.cols() != weight.rows()) {
    throw ShapeError("Classify: representation width " +
                     std::to_string(repr.cols()) + " vs classifier input " +
                     std::to_string(weight.rows()));
  }
  Var logits = tape.AddRow(tape.MatMul(repr, weight), bias);
  return {logits, tape.Softmax(logits)};
}

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean over rows of -w[label] * log(max(p[label], 1e-12)).
inline Var WeightedCrossEntropy(Tape& tape, const Var& probabilities,
                                std::span<const int> labels,
                                std::array<double, 2> weights = {1.0, 1.0}) {
  if (static_cast<Index>(labels.size()) != probabilities.rows() ||
      probabilities.cols() != 2) {
    throw ShapeError("WeightedCrossEntropy: " +
                     std::to_string(labels.size()) + " labels vs " +
                     ShapeString(probabilities.value()));
  }
  for (int y : labels) {
    if (y != 0 && y != 1) {
      throw ValidationError("label " + std::to_string(y) + " outside {0,1}");
    }
  }
  Var logp = tape.Log(probabilities, kProbabilityFloor);
  const auto n = static_cast<double>(labels.size());
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    total -= weights[y] * logp.value()(static_cast<Index>(i), labels[i]);
  }
  Matrix out(1, 1);
  out(0, 0) = total / n;
  std::vector<int> ys(labels.begin(), labels.end());
  return tape.Record("WeightedCrossEntropy", std::move(out), {logp},
                     [logp, ys, weights, n](const Matrix& g) mutable {
                       Matrix gl = Matrix::Zero(logp.rows(), logp.cols());
                       for (std::size_t i = 0; i < ys.size(); ++i) {
                         gl(static_cast<Index>(i), ys[i]) =
                             -g(0, 0) * weights[static_cast<std::size_t>(ys[i])] / n;
                       }
                       logp.AccumulateGrad(gl);
                     });
}

struct ForwardOutput {
  std::vector<Var> layer_outputs;
  Var graph_repr;
  Var logits;
  Var probabilities;
};

/// Full forward pass. Dropout (rate c.dropout) is applied to the assembled
/// features and after the activation of every layer except the last; it is
/// inactive unless `train` is set.
inline ForwardOutput Forward(Tape& tape, const ModelConfig& c,
                             const ParamSet& params, const GraphBatch& batch,
                             const EmbeddingTable& embeddings, bool train,
                             Rng& dropout_rng) {
  const RelationPlan plan = RelationPlan::Build(batch, c.num_relations);
  ForwardOutput out;
  Var h = AssembleFeatures(tape, batch, embeddings, params, c);
  h = tape.Dropout(h, c.dropout, train, dropout_rng);
  for (int l = 0; l < c.layers; ++l) {
    const bool last = l + 1 == c.layers;
    const auto li = static_cast<std::size_t>(l);
    h = LayerForward(tape, c.manifold, h, plan,
                     {params.weights[li], params.biases[li]}, l == 0,
                     c.leaky_slope, last ? 0.0 : c.dropout, train,
                     dropout_rng);
    out.layer_outputs.push_back(h);
  }
  out.graph_repr =
      Readout(tape, c.manifold, h, batch, c.readout, params.centroids);
  Logits cls = Classify(tape, out.graph_repr, params.classifier_weight,
                        params.classifier_bias);
  out.logits = cls.logits;
  out.probabilities = cls.probabilities;
  return out;
}

/// Convenience: forward + weighted cross-entropy.
inline Var Loss(Tape& tape, const ModelConfig& c, const ParamSet& params,
                const GraphBatch& batch, const EmbeddingTable& embeddings,
                std::array<double, 2> weights, bool train, Rng& dropout_rng) {
  ForwardOutput f =
      Forward(tape, c, params, batch, embeddings, train, dropout_rng);
  return WeightedCrossEntropy(tape, f.probabilities, batch.labels, weights);
}

}  // namespace ecd

#endif  // ECDGRAPH_MODEL_HPP

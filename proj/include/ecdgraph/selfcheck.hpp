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

#ifndef ECDGRAPH_SELFCHECK_HPP
#define ECDGRAPH_SELFCHECK_HPP

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "ecdgraph/manifolds.hpp"
#include "ecdgraph/model.hpp"
#include "ecdgraph/numerics/gradcheck.hpp"
#include "ecdgraph/optim.hpp"
#include "ecdgraph/synthetic.hpp"

namespace ecd {

/// Small configuration exercising every model component.
inline ModelConfig TinyModelConfig(ManifoldKind kind,
                                   ReadoutMode readout = ReadoutMode::kMeanPool) {
  ModelConfig c;
  c.manifold = kind;
  c.layers = 4;
  c.hidden = 5;
  c.word_dim = 6;
  c.pos_dim = 3;
  c.num_relations = 4;
  c.num_pos = 4;
  c.readout = readout;
  c.centroids = 3;
  c.reverse_edges = true;
  return c;
}

/// Finite-difference check of the full model loss (dropout off) on one
/// batch of `graphs`, over every parameter tensor. Biases are randomized so
/// their gradients are exercised away from zero.
inline GradCheckReport ModelGradCheck(ModelConfig config,
                                      const std::vector<SentenceGraph>& graphs,
                                      const EmbeddingTable& embeddings,
                                      std::array<double, 2> weights,
                                      std::uint64_t seed,
                                      std::size_t max_per_param = 0,
                                      double eps = 1e-5) {
  config.dropout = 0.0;
  Rng rng(seed, Rng::kInitStream);
  ParamSet params = ParamSet::Init(config, rng);
  for (Var& b : params.biases) {
    for (Index i = 0; i < b.size(); ++i)
      b.mutable_value().data()[i] = rng.Uniform(-0.1, 0.1);
  }
  GraphBatch batch = Batch(std::span<const SentenceGraph>(graphs),
                           config.reverse_edges);
  auto loss = [&](Tape& tape) {
    Rng unused;
    return Loss(tape, config, params, batch, embeddings, weights, false,
                unused);
  };
  std::vector<Var> all = params.All();
  Rng sample_rng(seed, 99);
  return FiniteDiffCheck(loss, all, eps, max_per_param, &sample_rng);
}

/// Largest |log0(exp0(v)) - v| over `trials` random tangents with |v| <= 3.
inline double MaxRoundTripError(ManifoldKind kind, Index dim, int trials,
                                Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    RowVector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = rng.Uniform(-1.0, 1.0);
    const double target = rng.Uniform(0.0, 3.0);
    v *= target / v.norm();
    RowVector tangent = v;
    if (kind == ManifoldKind::kLorentz) {
      tangent = RowVector(dim + 1);
      tangent << 0.0, v;
    }
    RowVector back =
        manifold::Log0(kind, manifold::Exp0(kind, tangent));
    worst = std::max(worst, (back - tangent).cwiseAbs().maxCoeff());
  }
  return worst;
}

struct InvariantSweep {
  double max_poincare_norm = 0.0;
  double max_lorentz_defect = 0.0;
  std::size_t points_checked = 0;
};

/// Trains a tiny centroid-readout model for `steps` AMSGrad steps on random
/// graphs and records the worst manifold constraint violation over every
/// node embedding and centroid after every step.
inline InvariantSweep ManifoldInvariantSweep(ManifoldKind kind, int steps,
                                             std::uint64_t seed,
                                             double lr = 1e-3) {
  SyntheticSpec spec;
  Rng rng(seed, 11);
  auto embeddings = RandomEmbeddings(spec, rng);
  ModelConfig config = TinyModelConfig(kind, ReadoutMode::kCentroid);
  config.word_dim = spec.word_dim;
  config.num_relations = spec.num_relations;
  config.num_pos = spec.num_pos;
  Rng init(seed, Rng::kInitStream);
  ParamSet params = ParamSet::Init(config, init);
  AmsGrad opt(params.Euclidean(), {params.centroids}, kind, {lr});
  std::vector<Var> all = params.All();
  InvariantSweep sweep;
  auto audit = [&](const Matrix& points) {
    for (Index i = 0; i < points.rows(); ++i) {
      RowVector p = points.row(i);
      if (kind == ManifoldKind::kPoincare) {
        sweep.max_poincare_norm = std::max(sweep.max_poincare_norm, p.norm());
      } else if (kind == ManifoldKind::kLorentz) {
        sweep.max_lorentz_defect =
            std::max(sweep.max_lorentz_defect,
                     std::abs(manifold::MinkowskiDot(p, p) + 1.0));
      }
      ++sweep.points_checked;
    }
  };
  Rng dropout(seed, Rng::kDropoutStream);
  for (int s = 0; s < steps; ++s) {
    std::vector<SentenceGraph> graphs;
    for (int k = 0; k < 4; ++k) {
      graphs.push_back(RandomTreeGraph(
          2 + static_cast<Index>(rng.Below(7)), spec, rng));
    }
    GraphBatch batch = Batch(std::span<const SentenceGraph>(graphs), true);
    Tape tape;
    ForwardOutput out =
        Forward(tape, config, params, batch, *embeddings, true, dropout);
    for (const Var& h : out.layer_outputs) audit(h.value());
    Var loss = WeightedCrossEntropy(tape, out.probabilities, batch.labels);
    tape.Backward(loss);
    ClipGlobalNorm(all, 1.0);
    opt.Step();
    params.ZeroGrad();
    audit(params.centroids.value());
  }
  return sweep;
}

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// The CLI `selfcheck` suite: gradients, manifold maps, optimizer
/// invariants and parameter accounting.
inline std::vector<CheckResult> RunSelfCheck(bool quick) {
  std::vector<CheckResult> results;
  const int graphs_per_kind = quick ? 3 : 10;
  const int sweep_steps = quick ? 100 : 1000;
  for (ManifoldKind kind : {ManifoldKind::kEuclidean, ManifoldKind::kPoincare,
                            ManifoldKind::kLorentz}) {
    for (ReadoutMode readout : {ReadoutMode::kMeanPool, ReadoutMode::kCentroid}) {
      SyntheticSpec spec;
      spec.word_dim = 6;
      spec.num_relations = 4;
      spec.num_pos = 4;
      Rng rng(17, 3);
      auto embeddings = RandomEmbeddings(spec, rng);
      double worst = 0.0;
      std::size_t kinked = 0, checked = 0;
      bool ok = true;
      for (int g = 0; g < graphs_per_kind; ++g) {
        std::vector<SentenceGraph> one = {RandomTreeGraph(
            1 + static_cast<Index>(rng.Below(8)), spec, rng)};
        GradCheckReport r = ModelGradCheck(TinyModelConfig(kind, readout), one,
                                           *embeddings, {0.6678, 1.9897},
                                           1000 + static_cast<std::uint64_t>(g));
        worst = std::max(worst, r.max_rel_error);
        kinked += r.kinked.size();
        checked += r.checked;
        ok = ok && r.Passed(1e-4);
      }
      ok = ok && kinked * 100 <= checked + kinked;
      std::ostringstream d;
      d << "max relative error " << worst << " over " << checked
        << " coordinates";
      if (kinked > 0) d << ", " << kinked << " straddling a kink";
      results.push_back({"gradient " + std::string(ToString(kind)) + "/" +
                             std::string(ToString(readout)),
                         ok, d.str()});
    }
  }
  Rng rng(5, 5);
  for (ManifoldKind kind : {ManifoldKind::kEuclidean, ManifoldKind::kPoincare,
                            ManifoldKind::kLorentz}) {
    const double err = MaxRoundTripError(kind, 16, 1000, rng);
    std::ostringstream d;
    d << "max |log0(exp0(v)) - v| = " << err;
    results.push_back({"round trip " + std::string(ToString(kind)),
                       err < 1e-9, d.str()});
  }
  {
    InvariantSweep p = ManifoldInvariantSweep(ManifoldKind::kPoincare,
                                              sweep_steps, 21);
    std::ostringstream d;
    d << "max norm " << p.max_poincare_norm << " over " << p.points_checked
      << " points";
    results.push_back({"poincare invariant",
                       p.max_poincare_norm <= 1.0 - manifold::kBallEps,
                       d.str()});
    InvariantSweep l = ManifoldInvariantSweep(ManifoldKind::kLorentz,
                                              sweep_steps, 22);
    std::ostringstream e;
    e << "max |<x,x>+1| " << l.max_lorentz_defect << " over "
      << l.points_checked << " points";
    results.push_back(
        {"lorentz invariant", l.max_lorentz_defect <= 1e-6, e.str()});
  }
  {
    ModelConfig base;
    ModelConfig pos16 = base;
    pos16.pos_dim = 16;
    const auto a = CountParams(base).total();
    const auto b = CountParams(pos16).total();
    std::ostringstream d;
    d << "base " << a << ", pos16 " << b;
    results.push_back(
        {"parameter count", a == 12304898 && b == 12489506, d.str()});
  }
  return results;
}

}  // namespace ecd

#endif  // ECDGRAPH_SELFCHECK_HPP

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

// Random dependency-like graphs and in-memory corpora for self-checks,
// tests and smoke training runs.

#ifndef ECDGRAPH_SYNTHETIC_HPP
#define ECDGRAPH_SYNTHETIC_HPP

#include <memory>
#include <string>
#include <vector>

#include "ecdgraph/graph_io.hpp"
#include "ecdgraph/rng.hpp"

namespace ecd {

struct SyntheticSpec {
  Index vocab_size = 20;  // includes the reserved OOV row 0
  Index word_dim = 8;
  Index num_relations = 5;
  Index num_pos = 4;
  Index min_nodes = 2;
  Index max_nodes = 8;
};

/// A random rooted tree on `n` nodes: each node other than the root takes a
/// head among the nodes already attached, so the result is always a tree.
inline SentenceGraph RandomTreeGraph(Index n, const SyntheticSpec& spec,
                                     Rng& rng, std::string id = "g") {
  SentenceGraph g;
  g.id = std::move(id);
  g.split = "train";
  g.label = static_cast<int>(rng.Below(2));
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Shuffle(order.begin(), order.end(), rng);
  for (Index i = 0; i < n; ++i) {
    g.token_ids.push_back(static_cast<Index>(
        rng.Below(static_cast<std::uint64_t>(spec.vocab_size))));
    g.pos_ids.push_back(
        static_cast<Index>(rng.Below(static_cast<std::uint64_t>(spec.num_pos))));
  }
  const auto rel = [&] {
    return static_cast<Index>(
        rng.Below(static_cast<std::uint64_t>(spec.num_relations)));
  };
  g.edges.push_back({order[0], order[0], rel()});
  for (Index k = 1; k < n; ++k) {
    const Index head =
        order[static_cast<std::size_t>(rng.Below(static_cast<std::uint64_t>(k)))];
    g.edges.push_back({head, order[static_cast<std::size_t>(k)], rel()});
  }
  return g;
}

/// Uniform(-1, 1) word vectors with row 0 zeroed (OOV).
inline std::shared_ptr<const EmbeddingTable> RandomEmbeddings(
    const SyntheticSpec& spec, Rng& rng) {
  std::vector<float> data(
      static_cast<std::size_t>(spec.vocab_size * spec.word_dim), 0.0f);
  for (std::size_t i = static_cast<std::size_t>(spec.word_dim); i < data.size();
       ++i) {
    data[i] = static_cast<float>(rng.Uniform(-1.0, 1.0));
  }
  return std::make_shared<const EmbeddingTable>(spec.vocab_size, spec.word_dim,
                                                std::move(data));
}

inline Vocab SyntheticVocab(const SyntheticSpec& spec) {
  std::vector<std::string> tokens, deps, pos;
  tokens.push_back("<unk>");
  for (Index i = 1; i < spec.vocab_size; ++i) tokens.push_back("w" + std::to_string(i));
  for (Index i = 0; i < spec.num_relations; ++i) deps.push_back("rel" + std::to_string(i));
  for (Index i = 0; i < spec.num_pos; ++i) pos.push_back("POS" + std::to_string(i));
  return Vocab(tokens, deps, pos, spec.word_dim);
}

/// Linearly separable corpus: a graph is positive exactly when it contains
/// the marker token (id 1), whose vector is a constant +2 on every
/// coordinate; other tokens never use id 1. Every split holds the same
/// graphs, so selection and evaluation happen on the training data.
inline Dataset SeparableCorpus(std::size_t count, const SyntheticSpec& spec,
                               std::uint64_t seed) {
  Rng rng(seed, 7);
  Dataset ds;
  ds.vocab = SyntheticVocab(spec);
  std::vector<float> data(
      static_cast<std::size_t>(spec.vocab_size * spec.word_dim), 0.0f);
  for (Index r = 2; r < spec.vocab_size; ++r) {
    for (Index j = 0; j < spec.word_dim; ++j) {
      data[static_cast<std::size_t>(r * spec.word_dim + j)] =
          static_cast<float>(rng.Uniform(-1.0, 1.0));
    }
  }
  for (Index j = 0; j < spec.word_dim; ++j) {
    data[static_cast<std::size_t>(spec.word_dim + j)] = 2.0f;
  }
  ds.embeddings = std::make_shared<const EmbeddingTable>(
      spec.vocab_size, spec.word_dim, std::move(data));

  std::vector<SentenceGraph> graphs;
  for (std::size_t i = 0; i < count; ++i) {
    const Index n = spec.min_nodes +
                    static_cast<Index>(rng.Below(static_cast<std::uint64_t>(
                        spec.max_nodes - spec.min_nodes + 1)));
    SentenceGraph g = RandomTreeGraph(n, spec, rng, "s" + std::to_string(i));
    g.label = i % 2 == 0 ? 1 : 0;
    for (Index& t : g.token_ids) {
      t = 2 + static_cast<Index>(
                  rng.Below(static_cast<std::uint64_t>(spec.vocab_size - 2)));
    }
    if (g.label == 1) {
      g.token_ids[static_cast<std::size_t>(
          rng.Below(static_cast<std::uint64_t>(n)))] = 1;
    }
    graphs.push_back(std::move(g));
  }
  for (const char* split : {"train", "dev", "test"}) {
    auto copy = graphs;
    for (SentenceGraph& g : copy) g.split = split;
    ds.splits[split] = std::move(copy);
  }
  return ds;
}

}  // namespace ecd

#endif  // ECDGRAPH_SYNTHETIC_HPP

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

// Corpus bundle loading and graph batching.
//
// A bundle directory holds
//   graphs.jsonl    one sentence per line:
//                   {"id", "split", "label", "tokens": [{"i","t","pos","head","dep"}]}
//   vocab.json      {"tokens": [...], "deps": [...], "pos": [...],
//                    "embedding_dim": 300}; token id 0 is reserved for OOV
//   embeddings.bin  little-endian float32, row-major, len(tokens) x dim

#ifndef ECDGRAPH_GRAPH_IO_HPP
#define ECDGRAPH_GRAPH_IO_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ecdgraph/errors.hpp"
#include "ecdgraph/numerics/tensor.hpp"

namespace ecd {

struct ParsedToken {
  Index index = 0;
  std::string text;
  std::string pos;
  Index head = 0;  // head == index marks the root
  std::string dep;
};

/// Directed labeled edge; src is the syntactic head, dst the dependent.
struct Edge {
  Index src = 0;
  Index dst = 0;
  Index rel = 0;

  bool operator==(const Edge&) const = default;
};

struct SentenceGraph {
  std::string id;
  std::string split;
  int label = 0;
  std::vector<Index> token_ids;
  std::vector<Index> pos_ids;
  /// Tree edges only (head -> dependent plus the root self-loop).
  std::vector<Edge> edges;

  Index size() const { return static_cast<Index>(token_ids.size()); }
  bool operator==(const SentenceGraph&) const = default;
};

class Vocab {
 public:
  Vocab() = default;
  Vocab(std::vector<std::string> tokens, std::vector<std::string> deps,
        std::vector<std::string> pos, Index embedding_dim)
      : tokens_(std::move(tokens)),
        deps_(std::move(deps)),
        pos_(std::move(pos)),
        embedding_dim_(embedding_dim) {
    for (std::size_t i = 0; i < tokens_.size(); ++i)
      token_ids_.emplace(tokens_[i], static_cast<Index>(i));
    for (std::size_t i = 0; i < deps_.size(); ++i)
      dep_ids_.emplace(deps_[i], static_cast<Index>(i));
    for (std::size_t i = 0; i < pos_.size(); ++i)
      pos_ids_.emplace(pos_[i], static_cast<Index>(i));
  }

  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::string>& deps() const { return deps_; }
  const std::vector<std::string>& pos() const { return pos_; }
  Index embedding_dim() const { return embedding_dim_; }
  Index num_relations() const { return static_cast<Index>(deps_.size()); }
  Index num_pos() const { return static_cast<Index>(pos_.size()); }

  /// Unknown tokens map to the reserved id 0.
  Index TokenId(const std::string& t) const {
    auto it = token_ids_.find(t);
    return it == token_ids_.end() ? 0 : it->second;
  }
  std::optional<Index> DepId(const std::string& d) const {
    auto it = dep_ids_.find(d);
    if (it == dep_ids_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<Index> PosId(const std::string& p) const {
    auto it = pos_ids_.find(p);
    if (it == pos_ids_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::string> deps_;
  std::vector<std::string> pos_;
  Index embedding_dim_ = 300;
  std::unordered_map<std::string, Index> token_ids_;
  std::unordered_map<std::string, Index> dep_ids_;
  std::unordered_map<std::string, Index> pos_ids_;
};

/// Read-only word-vector table; row id follows vocab token order.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(Index rows, Index dim, std::vector<float> data)
      : rows_(rows), dim_(dim), data_(std::move(data)) {
    if (static_cast<Index>(data_.size()) != rows_ * dim_) {
      throw ValidationError("EmbeddingTable: data size does not match shape");
    }
  }

  Index rows() const { return rows_; }
  Index dim() const { return dim_; }

  std::span<const float> Row(Index id) const {
    if (id < 0 || id >= rows_) {
      throw ValidationError("EmbeddingTable: token id " + std::to_string(id) +
                            " out of range [0, " + std::to_string(rows_) + ")");
    }
    return {data_.data() + id * dim_, static_cast<std::size_t>(dim_)};
  }

 private:
  Index rows_ = 0;
  Index dim_ = 0;
  std::vector<float> data_;
};

// ---- edges and tree checks --------------------------------------------------

/// Appends dependent -> head for every non-self-loop edge, reusing its
/// relation id.
inline void AppendReverseEdges(std::vector<Edge>& edges) {
  const std::size_t n = edges.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Edge e = edges[i];
    if (e.src != e.dst) edges.push_back({e.dst, e.src, e.rel});
  }
}

/// One head -> dependent edge per non-root token, a self-loop for the root,
/// and optionally the reversed copies. Throws ValidationError for heads out
/// of range or relations missing from `vocab`.
inline std::vector<Edge> MakeEdges(std::span<const ParsedToken> tokens,
                                   const Vocab& vocab, bool reverse_edges) {
  const auto n = static_cast<Index>(tokens.size());
  std::vector<Edge> edges;
  edges.reserve(tokens.size() * (reverse_edges ? 2 : 1));
  for (Index i = 0; i < n; ++i) {
    const ParsedToken& t = tokens[static_cast<std::size_t>(i)];
    if (t.head < 0 || t.head >= n) {
      throw ValidationError("token " + std::to_string(i) + ": head " +
                            std::to_string(t.head) + " out of range [0, " +
                            std::to_string(n) + ")");
    }
    auto rel = vocab.DepId(t.dep);
    if (!rel) {
      throw ValidationError("token " + std::to_string(i) +
                            ": unknown dependency relation '" + t.dep + "'");
    }
    edges.push_back({t.head, i, *rel});
  }
  if (reverse_edges) AppendReverseEdges(edges);
  return edges;
}

/// Empty string when `g` is a rooted tree (one self-loop, in-degree one for
/// every other node over non-loop edges, acyclic); otherwise the problem.
inline std::string TreeViolation(const SentenceGraph& g) {
  const Index n = g.size();
  if (static_cast<Index>(g.pos_ids.size()) != n) return "pos/token length mismatch";
  std::vector<Index> head(static_cast<std::size_t>(n), -1);
  Index root = -1;
  for (const Edge& e : g.edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      return "edge index out of range";
    }
    if (e.src == e.dst) {
      if (root >= 0) return "more than one root self-loop";
      root = e.src;
      continue;
    }
    if (head[static_cast<std::size_t>(e.dst)] >= 0) {
      return "node " + std::to_string(e.dst) + " has more than one head";
    }
    head[static_cast<std::size_t>(e.dst)] = e.src;
  }
  if (n == 0) return "empty sentence";
  if (root < 0) return "no root self-loop";
  if (head[static_cast<std::size_t>(root)] >= 0) return "root has a head";
  for (Index v = 0; v < n; ++v) {
    if (v != root && head[static_cast<std::size_t>(v)] < 0) {
      return "node " + std::to_string(v) + " has no head";
    }
    Index at = v;
    for (Index steps = 0; at != root; ++steps) {
      if (steps > n) return "cycle through node " + std::to_string(v);
      at = head[static_cast<std::size_t>(at)];
    }
  }
  return {};
}

/// True when no two arcs cross (every arc's span is covered by descendants
/// of its head). Assumes TreeViolation(g) is empty.
inline bool IsProjective(const SentenceGraph& g) {
  for (const Edge& a : g.edges) {
    if (a.src == a.dst) continue;
    const Index lo1 = std::min(a.src, a.dst), hi1 = std::max(a.src, a.dst);
    for (const Edge& b : g.edges) {
      if (b.src == b.dst) continue;
      const Index lo2 = std::min(b.src, b.dst), hi2 = std::max(b.src, b.dst);
      if (lo1 < lo2 && lo2 < hi1 && hi1 < hi2) return false;
    }
  }
  // Arcs may also not cover the root.
  Index root = -1;
  for (const Edge& e : g.edges)
    if (e.src == e.dst) root = e.src;
  for (const Edge& a : g.edges) {
    if (a.src == a.dst) continue;
    const Index lo = std::min(a.src, a.dst), hi = std::max(a.src, a.dst);
    if (lo < root && root < hi) return false;
  }
  return true;
}

// ---- bundle loading -----------------------------------------------------------

struct LoadOptions {
  bool check_projective = true;
};

struct Dataset {
  Vocab vocab;
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::map<std::string, std::vector<SentenceGraph>> splits;
  /// Records dropped by the tree/relation checks, with reasons.
  std::vector<std::string> rejected;

  const std::vector<SentenceGraph>& Split(const std::string& name) const {
    static const std::vector<SentenceGraph> kEmpty;
    auto it = splits.find(name);
    return it == splits.end() ? kEmpty : it->second;
  }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [name, graphs] : splits) n += graphs.size();
    return n;
  }
};

namespace detail {

inline std::ifstream OpenOrThrow(const std::filesystem::path& path,
                                 std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw ValidationError("missing bundle file: " + path.string());
  return in;
}

inline float LittleEndianFloat(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                       (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

}  // namespace detail

inline Vocab LoadVocab(const std::filesystem::path& path) {
  auto in = detail::OpenOrThrow(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": malformed JSON: " + e.what());
  }
  try {
    return Vocab(j.at("tokens").get<std::vector<std::string>>(),
                 j.at("deps").get<std::vector<std::string>>(),
                 j.at("pos").get<std::vector<std::string>>(),
                 j.value("embedding_dim", Index{300}));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline EmbeddingTable LoadEmbeddings(const std::filesystem::path& path,
                                     Index expected_rows, Index dim) {
  auto in = detail::OpenOrThrow(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const auto row_bytes = static_cast<std::size_t>(dim) * 4;
  if (dim <= 0 || bytes.size() % row_bytes != 0) {
    throw ValidationError(path.string() + ": size " +
                          std::to_string(bytes.size()) +
                          " bytes is not a whole number of " +
                          std::to_string(dim) + "-float rows");
  }
  const auto rows = static_cast<Index>(bytes.size() / row_bytes);
  if (rows != expected_rows) {
    std::ostringstream msg;
    msg << path.string() << ": expected " << expected_rows << " rows, found "
        << rows;
    if (rows < expected_rows) msg << " (deficit " << expected_rows - rows << ")";
    else msg << " (surplus " << rows - expected_rows << ")";
    throw ValidationError(msg.str());
  }
  std::vector<float> data(bytes.size() / 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = detail::LittleEndianFloat(bytes.data() + 4 * i);
  }
  return EmbeddingTable(rows, dim, std::move(data));
}

/// Parses one graphs.jsonl record into tokens. Throws ValidationError for
/// schema problems (the caller adds the line number).
inline std::vector<ParsedToken> ParseTokens(const nlohmann::json& rec) {
  std::vector<ParsedToken> tokens;
  for (const auto& t : rec.at("tokens")) {
    ParsedToken tok;
    tok.index = t.at("i").get<Index>();
    tok.text = t.at("t").get<std::string>();
    tok.pos = t.at("pos").get<std::string>();
    tok.head = t.at("head").get<Index>();
    tok.dep = t.at("dep").get<std::string>();
    if (tok.index != static_cast<Index>(tokens.size())) {
      throw ValidationError("token index " + std::to_string(tok.index) +
                            " out of sequence");
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

/// Builds a SentenceGraph from parsed tokens. Throws ValidationError when
/// the record must be rejected.
inline SentenceGraph BuildGraph(std::string id, std::string split, int label,
                                std::span<const ParsedToken> tokens,
                                const Vocab& vocab,
                                const LoadOptions& options = {}) {
  SentenceGraph g;
  g.id = std::move(id);
  g.split = std::move(split);
  g.label = label;
  for (const ParsedToken& t : tokens) {
    g.token_ids.push_back(vocab.TokenId(t.text));
    auto pos = vocab.PosId(t.pos);
    if (!pos) throw ValidationError("unknown POS tag '" + t.pos + "'");
    g.pos_ids.push_back(*pos);
  }
  g.edges = MakeEdges(tokens, vocab, /*reverse_edges=*/false);
  if (auto why = TreeViolation(g); !why.empty()) throw ValidationError(why);
  if (options.check_projective && !IsProjective(g)) {
    throw ValidationError("non-projective parse");
  }
  return g;
}

/// Loads graphs.jsonl, vocab.json and embeddings.bin from `dir`.
///
/// Structural problems (missing files, malformed JSON, labels outside
/// {0,1}, embedding size mismatch) throw ValidationError. Records whose parse
/// is not a projective tree over known relations are skipped and listed in
/// Dataset::rejected.
inline Dataset LoadBundle(const std::filesystem::path& dir,
                          const LoadOptions& options = {}) {
  Dataset ds;
  ds.vocab = LoadVocab(dir / "vocab.json");
  ds.embeddings = std::make_shared<const EmbeddingTable>(
      LoadEmbeddings(dir / "embeddings.bin",
                     static_cast<Index>(ds.vocab.tokens().size()),
                     ds.vocab.embedding_dim()));

  const auto graphs_path = dir / "graphs.jsonl";
  auto in = detail::OpenOrThrow(graphs_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where =
        graphs_path.string() + ":" + std::to_string(line_no);
    nlohmann::json rec;
    std::string id, split;
    int label = 0;
    std::vector<ParsedToken> tokens;
    try {
      rec = nlohmann::json::parse(line);
      id = rec.at("id").get<std::string>();
      split = rec.at("split").get<std::string>();
      label = rec.at("label").get<int>();
      tokens = ParseTokens(rec);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": malformed record: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (label != 0 && label != 1) {
      throw ValidationError(where + ": label " + std::to_string(label) +
                            " outside {0,1}");
    }
    try {
      ds.splits[split].push_back(
          BuildGraph(id, split, label, tokens, ds.vocab, options));
    } catch (const ValidationError& e) {
      ds.rejected.push_back(where + " (" + id + "): " + e.what());
    }
  }
  return ds;
}

// ---- vocabulary report --------------------------------------------------------

struct VocabReport {
  Index num_relations = 0;
  Index num_pos = 0;
  Index num_tokens = 0;
  Index embedding_dim = 0;
  /// split -> {negatives, positives}
  std::map<std::string, std::pair<std::size_t, std::size_t>> class_counts;
  std::size_t graphs = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t tree_violations = 0;
  std::vector<std::string> rejected;

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["num_relations"] = num_relations;
    j["num_pos"] = num_pos;
    j["num_tokens"] = num_tokens;
    j["embedding_dim"] = embedding_dim;
    j["graphs"] = graphs;
    j["nodes"] = nodes;
    j["edges"] = edges;
    j["tree_ok"] = tree_violations == 0;
    j["rejected"] = rejected;
    for (const auto& [split, counts] : class_counts) {
      const double total = static_cast<double>(counts.first + counts.second);
      j["class_counts"][split] = {
          {"negative", counts.first},
          {"positive", counts.second},
          {"positive_ratio",
           total > 0 ? static_cast<double>(counts.second) / total : 0.0}};
    }
    return j;
  }
};

inline VocabReport MakeVocabReport(const Dataset& ds) {
  VocabReport r;
  r.num_relations = ds.vocab.num_relations();
  r.num_pos = ds.vocab.num_pos();
  r.num_tokens = static_cast<Index>(ds.vocab.tokens().size());
  r.embedding_dim = ds.vocab.embedding_dim();
  r.rejected = ds.rejected;
  for (const auto& [split, graphs] : ds.splits) {
    auto& counts = r.class_counts[split];
    for (const SentenceGraph& g : graphs) {
      (g.label == 1 ? counts.second : counts.first) += 1;
      ++r.graphs;
      r.nodes += static_cast<std::size_t>(g.size());
      r.edges += g.edges.size();
      if (!TreeViolation(g).empty()) ++r.tree_violations;
    }
  }
  return r;
}

// ---- batching -------------------------------------------------------------------

/// Disjoint union of graphs. Edges of graph k occupy
/// [edge_offset[k], edge_offset[k+1]); the first tree_edge_count[k] of them
/// are the tree edges, the rest reversed copies.
struct GraphBatch {
  std::vector<std::string> ids;
  std::vector<std::string> splits;
  std::vector<Index> node_token_ids;
  std::vector<Index> node_pos_ids;
  std::vector<Edge> edges;
  std::vector<Index> graph_of_node;
  std::vector<Index> node_offset;  // graph_count + 1 entries
  std::vector<Index> edge_offset;  // graph_count + 1 entries
  std::vector<Index> tree_edge_count;
  std::vector<int> labels;
  Index graph_count = 0;

  Index node_count() const {
    return static_cast<Index>(node_token_ids.size());
  }
};

inline GraphBatch Batch(std::span<const SentenceGraph* const> graphs,
                        bool reverse_edges = false) {
  if (graphs.empty()) throw ValidationError("Batch: empty graph list");
  GraphBatch b;
  b.graph_count = static_cast<Index>(graphs.size());
  b.node_offset.push_back(0);
  b.edge_offset.push_back(0);
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const SentenceGraph& g = *graphs[k];
    const Index offset = b.node_offset.back();
    b.ids.push_back(g.id);
    b.splits.push_back(g.split);
    b.labels.push_back(g.label);
    b.node_token_ids.insert(b.node_token_ids.end(), g.token_ids.begin(),
                            g.token_ids.end());
    b.node_pos_ids.insert(b.node_pos_ids.end(), g.pos_ids.begin(),
                          g.pos_ids.end());
    b.graph_of_node.insert(b.graph_of_node.end(),
                           static_cast<std::size_t>(g.size()),
                           static_cast<Index>(k));
    std::vector<Edge> edges = g.edges;
    b.tree_edge_count.push_back(static_cast<Index>(edges.size()));
    if (reverse_edges) AppendReverseEdges(edges);
    for (const Edge& e : edges) {
      b.edges.push_back({e.src + offset, e.dst + offset, e.rel});
    }
    b.node_offset.push_back(offset + g.size());
    b.edge_offset.push_back(static_cast<Index>(b.edges.size()));
  }
  return b;
}

inline GraphBatch Batch(std::span<const SentenceGraph> graphs,
                        bool reverse_edges = false) {
  std::vector<const SentenceGraph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const SentenceGraph& g : graphs) ptrs.push_back(&g);
  return Batch(std::span<const SentenceGraph* const>(ptrs), reverse_edges);
}

/// Recovers the batched graphs (tree edges only).
inline std::vector<SentenceGraph> Unbatch(const GraphBatch& b) {
  std::vector<SentenceGraph> out;
  for (Index k = 0; k < b.graph_count; ++k) {
    SentenceGraph g;
    g.id = b.ids[static_cast<std::size_t>(k)];
    g.split = b.splits[static_cast<std::size_t>(k)];
    g.label = b.labels[static_cast<std::size_t>(k)];
    const Index lo = b.node_offset[static_cast<std::size_t>(k)];
    const Index hi = b.node_offset[static_cast<std::size_t>(k) + 1];
    g.token_ids.assign(b.node_token_ids.begin() + lo,
                       b.node_token_ids.begin() + hi);
    g.pos_ids.assign(b.node_pos_ids.begin() + lo, b.node_pos_ids.begin() + hi);
    const Index e0 = b.edge_offset[static_cast<std::size_t>(k)];
    const Index e1 = e0 + b.tree_edge_count[static_cast<std::size_t>(k)];
    for (Index e = e0; e < e1; ++e) {
      const Edge& edge = b.edges[static_cast<std::size_t>(e)];
      g.edges.push_back({edge.src - lo, edge.dst - lo, edge.rel});
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace ecd

#endif  // ECDGRAPH_GRAPH_IO_HPP

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

#ifndef ECDGRAPH_TESTS_TEST_UTIL_HPP
#define ECDGRAPH_TESTS_TEST_UTIL_HPP

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecdgraph/graph_io.hpp"

namespace ecd::testing {

inline std::filesystem::path FixturePath(const std::string& rel) {
  return std::filesystem::path(ECDGRAPH_FIXTURES) / rel;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("ecdgraph-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void WriteFile(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline void WriteEmbeddings(const std::filesystem::path& p,
                            const std::vector<float>& values) {
  std::ofstream out(p, std::ios::binary);
  for (float f : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    const unsigned char b[4] = {static_cast<unsigned char>(bits),
                                static_cast<unsigned char>(bits >> 8),
                                static_cast<unsigned char>(bits >> 16),
                                static_cast<unsigned char>(bits >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  }
}

/// Writes `ds` as a bundle. Graph heads come from the tree edges.
inline void WriteBundle(const Dataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const Vocab& v = ds.vocab;
  nlohmann::json vocab = {{"tokens", v.tokens()},
                          {"deps", v.deps()},
                          {"pos", v.pos()},
                          {"embedding_dim", v.embedding_dim()}};
  WriteFile(dir / "vocab.json", vocab.dump());
  std::vector<float> emb;
  for (Index r = 0; r < ds.embeddings->rows(); ++r) {
    auto row = ds.embeddings->Row(r);
    emb.insert(emb.end(), row.begin(), row.end());
  }
  WriteEmbeddings(dir / "embeddings.bin", emb);
  std::ofstream out(dir / "graphs.jsonl");
  for (const auto& [split, graphs] : ds.splits) {
    for (const SentenceGraph& g : graphs) {
      std::vector<Index> head(static_cast<std::size_t>(g.size()));
      std::vector<Index> rel(static_cast<std::size_t>(g.size()));
      for (const Edge& e : g.edges) {
        head[static_cast<std::size_t>(e.dst)] = e.src;
        rel[static_cast<std::size_t>(e.dst)] = e.rel;
      }
      nlohmann::json tokens = nlohmann::json::array();
      for (Index i = 0; i < g.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        tokens.push_back({{"i", i},
                          {"t", v.tokens()[static_cast<std::size_t>(g.token_ids[k])]},
                          {"pos", v.pos()[static_cast<std::size_t>(g.pos_ids[k])]},
                          {"head", head[k]},
                          {"dep", v.deps()[static_cast<std::size_t>(rel[k])]}});
      }
      out << nlohmann::json{{"id", g.id}, {"split", split}, {"label", g.label},
                            {"tokens", tokens}}
                 .dump()
          << "\n";
    }
  }
}

}  // namespace ecd::testing

#endif  // ECDGRAPH_TESTS_TEST_UTIL_HPP

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

// Training configuration and its flat JSON form.
//
//   {"manifold": "poincare", "pos_dim": 128, "dropout": 0.3,
//    "class_weights": "inverse", "seed": 7}
//
// class_weights is null (unweighted), "inverse" (N / (2 n_k) on the train
// split) or a two-element array. Unknown keys are rejected.

#ifndef ECDGRAPH_CONFIG_HPP
#define ECDGRAPH_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <string>

#include "ecdgraph/errors.hpp"
#include "ecdgraph/graph_io.hpp"
#include "ecdgraph/manifolds.hpp"
#include "ecdgraph/model.hpp"

namespace ecd {

enum class SelectOn { kDev, kTest };

struct TrainConfig {
  ModelConfig model;
  double lr = 1e-3;
  int max_epochs = 30;
  int patience = 8;
  Index batch_size = 32;
  std::uint64_t seed = 0;
  double max_grad_norm = 1.0;
  SelectOn select_on = SelectOn::kDev;

  void Validate() const {
    model.Validate();
    if (!(lr >= 0.0)) throw ValidationError("lr must be >= 0");
    if (max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
    if (patience < 1 || patience > max_epochs) {
      throw ValidationError("patience must be in [1, max_epochs]");
    }
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (!(max_grad_norm > 0.0)) throw ValidationError("max_grad_norm must be > 0");
  }

  bool operator==(const TrainConfig&) const = default;
};

inline nlohmann::json ClassWeightsToJson(const ClassWeightSpec& w) {
  switch (w.mode) {
    case ClassWeightSpec::Mode::kNone:
      return nullptr;
    case ClassWeightSpec::Mode::kInverseFrequency:
      return "inverse";
    case ClassWeightSpec::Mode::kFixed:
      return {w.fixed[0], w.fixed[1]};
  }
  return nullptr;
}

inline ClassWeightSpec ClassWeightsFromJson(const nlohmann::json& j) {
  if (j.is_null()) return ClassWeightSpec::None();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inverse") return ClassWeightSpec::Inverse();
    if (s == "none") return ClassWeightSpec::None();
    throw ValidationError("class_weights: unknown mode '" + s + "'");
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return ClassWeightSpec::Fixed(j[0].get<double>(), j[1].get<double>());
  }
  throw ValidationError("class_weights must be null, \"inverse\" or [w0, w1]");
}

inline nlohmann::json ToJson(const TrainConfig& c) {
  const ModelConfig& m = c.model;
  return {{"manifold", std::string(ToString(m.manifold))},
          {"layers", m.layers},
          {"hidden", m.hidden},
          {"word_dim", m.word_dim},
          {"pos_dim", m.pos_dim},
          {"num_relations", m.num_relations},
          {"num_pos", m.num_pos},
          {"dropout", m.dropout},
          {"leaky_slope", m.leaky_slope},
          {"class_weights", ClassWeightsToJson(m.class_weights)},
          {"readout", std::string(ToString(m.readout))},
          {"centroids", m.centroids},
          {"reverse_edges", m.reverse_edges},
          {"lr", c.lr},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"max_grad_norm", c.max_grad_norm},
          {"select_on", c.select_on == SelectOn::kDev ? "dev" : "test"}};
}

/// Overlays the keys of `j` onto `base`. Throws ValidationError on unknown
/// keys, wrong types or invalid values.
inline TrainConfig ParseTrainConfig(const nlohmann::json& j,
                                    TrainConfig base = {}) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  TrainConfig c = base;
  ModelConfig& m = c.model;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "manifold") {
        auto kind = ParseManifoldKind(v.get<std::string>());
        if (!kind) throw ValidationError("unknown manifold '" + v.get<std::string>() + "'");
        m.manifold = *kind;
      } else if (key == "layers") {
        m.layers = v.get<int>();
      } else if (key == "hidden") {
        m.hidden = v.get<Index>();
      } else if (key == "word_dim") {
        m.word_dim = v.get<Index>();
      } else if (key == "pos_dim") {
        m.pos_dim = v.get<Index>();
      } else if (key == "num_relations") {
        m.num_relations = v.get<Index>();
      } else if (key == "num_pos") {
        m.num_pos = v.get<Index>();
      } else if (key == "dropout") {
        m.dropout = v.get<double>();
      } else if (key == "leaky_slope") {
        m.leaky_slope = v.get<double>();
      } else if (key == "class_weights") {
        m.class_weights = ClassWeightsFromJson(v);
      } else if (key == "readout") {
        auto mode = ParseReadoutMode(v.get<std::string>());
        if (!mode) throw ValidationError("unknown readout '" + v.get<std::string>() + "'");
        m.readout = *mode;
      } else if (key == "centroids") {
        m.centroids = v.get<Index>();
      } else if (key == "reverse_edges") {
        m.reverse_edges = v.get<bool>();
      } else if (key == "lr") {
        c.lr = v.get<double>();
      } else if (key == "max_epochs") {
        c.max_epochs = v.get<int>();
      } else if (key == "patience") {
        c.patience = v.get<int>();
      } else if (key == "batch_size") {
        c.batch_size = v.get<Index>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "max_grad_norm") {
        c.max_grad_norm = v.get<double>();
      } else if (key == "select_on") {
        const auto s = v.get<std::string>();
        if (s == "dev") c.select_on = SelectOn::kDev;
        else if (s == "test") c.select_on = SelectOn::kTest;
        else throw ValidationError("select_on must be dev or test");
      } else {
        throw ValidationError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.Validate();
  return c;
}

inline nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": malformed JSON: " + e.what());
  }
}

/// Takes word_dim, num_relations and num_pos from the bundle's vocabulary.
inline TrainConfig AlignWithVocab(TrainConfig c, const Vocab& vocab) {
  c.model.word_dim = vocab.embedding_dim();
  c.model.num_relations = vocab.num_relations();
  c.model.num_pos = vocab.num_pos();
  c.Validate();
  return c;
}

}  // namespace ecd

#endif  // ECDGRAPH_CONFIG_HPP

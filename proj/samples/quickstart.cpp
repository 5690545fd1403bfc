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

// Trains a small Poincare model on a synthetic corpus and prints its
// training-set metrics.

#include <iostream>

#include "ecdgraph/ecdgraph.hpp"

int main() {
  ecd::SyntheticSpec spec;
  ecd::Dataset data = ecd::SeparableCorpus(100, spec, /*seed=*/1);

  ecd::TrainConfig config;
  config.model.manifold = ecd::ManifoldKind::kPoincare;
  config.model.layers = 2;
  config.model.hidden = 16;
  config.lr = 0.01;
  config = ecd::AlignWithVocab(config, data.vocab);

  ecd::TrainResult result = ecd::Train(config, data);
  ecd::Metrics m = ecd::Evaluate(result.params, config.model,
                                 data.Split("train"), *data.embeddings);
  std::cout << "best epoch " << result.best_epoch << ": "
            << m.ToJson().dump() << "\n";
  return 0;
}

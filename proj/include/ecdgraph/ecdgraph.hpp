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

// Umbrella header.
#ifndef ECDGRAPH_ECDGRAPH_HPP
#define ECDGRAPH_ECDGRAPH_HPP

#include "ecdgraph/checkpoint.hpp"
#include "ecdgraph/config.hpp"
#include "ecdgraph/errors.hpp"
#include "ecdgraph/graph_io.hpp"
#include "ecdgraph/grid.hpp"
#include "ecdgraph/manifolds.hpp"
#include "ecdgraph/metrics.hpp"
#include "ecdgraph/model.hpp"
#include "ecdgraph/numerics/gradcheck.hpp"
#include "ecdgraph/numerics/tensor.hpp"
#include "ecdgraph/optim.hpp"
#include "ecdgraph/rng.hpp"
#include "ecdgraph/selfcheck.hpp"
#include "ecdgraph/synthetic.hpp"
#include "ecdgraph/train.hpp"

#endif  // ECDGRAPH_ECDGRAPH_HPP

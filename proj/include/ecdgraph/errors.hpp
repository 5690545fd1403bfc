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

#ifndef ECDGRAPH_ERRORS_HPP
#define ECDGRAPH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ecd {

/// Bad input data or configuration: bundle schema, config keys, shapes
/// requested by the user. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shape mismatch inside the numerics engine.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside a function's domain (artanh |x| >= 1, arcosh x < 1,
/// point off its manifold).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Training diverged or failed at runtime. The CLI maps these to exit code 2.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ecd

#endif  // ECDGRAPH_ERRORS_HPP

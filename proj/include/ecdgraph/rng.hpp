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

#ifndef ECDGRAPH_RNG_HPP
#define ECDGRAPH_RNG_HPP

#include <cstdint>
#include <limits>

namespace ecd {

/// Counter-based 64-bit generator: the n-th draw of stream s under seed k is
/// splitmix64(k ^ mix(s) + n * golden). Streams are independent, so init,
/// shuffling and dropout each get their own stream and never perturb one
/// another's sequence.
///
/// Stream ids used by the library:
///   0  parameter initialization (declaration order)
///   1  per-epoch shuffling of the training split
///   2  dropout masks (layer order, then row-major within a layer)
class Rng {
 public:
  using result_type = std::uint64_t;

  static constexpr std::uint64_t kInitStream = 0;
  static constexpr std::uint64_t kShuffleStream = 1;
  static constexpr std::uint64_t kDropoutStream = 2;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : key_(seed ^ Mix(stream + 0x9E3779B97F4A7C15ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return Mix(key_ + (counter_++) * kGolden); }

  /// Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t Below(std::uint64_t n) {
    // Lemire-style rejection keeps the result unbiased.
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % n;
  }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t Mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Fisher-Yates with Rng::Below, so the permutation is identical across
/// standard library implementations.
template <typename RandomIt>
void Shuffle(RandomIt first, RandomIt last, Rng& rng) {
  const auto n = last - first;
  for (auto i = n - 1; i > 0; --i) {
    const auto j = static_cast<decltype(i)>(
        rng.Below(static_cast<std::uint64_t>(i) + 1));
    using std::swap;
    swap(first[i], first[j]);
  }
}

}  // namespace ecd

#endif  // ECDGRAPH_RNG_HPP

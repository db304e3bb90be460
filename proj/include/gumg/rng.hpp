// Copyright 2026 The gumg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GUMG_RNG_HPP
#define GUMG_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <vector>

namespace gumg {

// Seeded 64-bit generator. Independent streams are derived from a master seed
// plus a path of stream indices (iteration, agent, cell, ...), so results do
// not depend on the order in which streams are consumed.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : Rng(seed, {}) {}

  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * path.size());
    push(words, seed);
    for (auto p : path) push(words, p);
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits; independent of the standard
  // library's distribution implementations.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Inverse-CDF draw from unnormalized nonnegative weights given by
  // weight(k), k in [0, n). Falls back to the last positive index when
  // rounding leaves the threshold above the cumulative sum.
  template <typename WeightFn>
  int categorical(int n, WeightFn&& weight) {
    const double u = uniform();
    double cumulative = 0.0;
    int last_positive = -1;
    for (int k = 0; k < n; ++k) {
      const double w = weight(k);
      if (w > 0.0) last_positive = k;
      cumulative += w;
      if (u < cumulative) return k;
    }
    return last_positive < 0 ? n - 1 : last_positive;
  }

  // Seed for a child stream; lets a caller-owned generator fan out into
  // deterministic per-task streams.
  std::uint64_t split() { return engine_(); }

 private:
  static void push(std::vector<std::uint32_t>& words, std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  }

  std::mt19937_64 engine_;
};

}  // namespace gumg

#endif  // GUMG_RNG_HPP

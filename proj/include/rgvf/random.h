// Copyright 2026 The rgvf Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RGVF_RANDOM_H_
#define RGVF_RANDOM_H_

#include <cstdint>
#include <random>

namespace rgvf {

// Seedable 64-bit generator with platform-independent sampling.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The distributions in <random> are implementation-defined, so the
// integer and real draws below are done by hand to keep every seeded result
// (generated networks, initial weights, rollouts) identical across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias. n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  // Uniform real in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Bernoulli(p).
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace rgvf

#endif  // RGVF_RANDOM_H_

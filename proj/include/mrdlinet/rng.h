/*
 * Copyright 2026 The MRD-LiNet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MRDLINET_RNG_H_
#define MRDLINET_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace mrdlinet {

// Stable 64-bit hash of a byte string (FNV-1a followed by a splitmix64
// finalizer). Unlike std::hash the value is identical across platforms and
// runs, so it can be used to derive seeds.
uint64_t stable_hash(std::string_view bytes);

// Combines a parent seed with a label and an index into a child seed.
uint64_t derive_seed(uint64_t seed, std::string_view label, uint64_t index = 0);

// Thin wrapper over mt19937_64 with hand-written distribution mappings.
// The standard distributions are implementation-defined, these are not.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  uint64_t below(uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mrdlinet

#endif  // MRDLINET_RNG_H_

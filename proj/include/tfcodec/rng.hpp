// Copyright 2026 The TFCodec Authors
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

#ifndef TFCODEC_RNG_HPP_
#define TFCODEC_RNG_HPP_

#include <cstdint>
#include <random>
#include <string>

namespace tfcodec {

// Seeded random source with hand-rolled transforms. std::* distributions are
// implementation-defined, so uniform/normal/gumbel are built here from raw
// mt19937_64 output to keep runs reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  // Standard normal via Box-Muller on deterministic math.
  double normal();

  // Gumbel(0,1) with the argument clamped away from {0,1}.
  double gumbel();

  bool bernoulli(double p) { return uniform() < p; }

  // Independent stream derived from this seed and a label; drawing from the
  // substream never perturbs the parent.
  static Rng substream(std::uint64_t seed, const std::string& label);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a, used for substream labels and codebook fingerprints.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 1469598103934665603ull);

}  // namespace tfcodec

#endif  // TFCODEC_RNG_HPP_
